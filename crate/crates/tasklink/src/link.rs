//! Transmit-side packet assembly and human-readable packet dumps.

use std::fmt::Write;

use tasklink_core::bch::{BchCode, Codeword};
use tasklink_core::bits::to_bitstring;
use tasklink_core::channel::{airtime, COMMAND_LATENCY_BUDGET_S, LINK_RATE_BPS};
use tasklink_core::codec::{encode_command, MissionCommand, QuantTable, MESSAGE_BITS, PATTERN_ID_BITS, PAYLOAD_BITS};
use tasklink_core::executor::Reception;
use tasklink_core::framing::{frame, Packet, DELIMITER, GUARD, PREAMBLE};

use crate::spec::{format_spec, format_value};

#[derive(Clone, Debug, PartialEq)]
pub struct EncodedPacket {
    pub command: MissionCommand,
    pub message: Vec<bool>,
    pub codeword: Codeword,
    pub packet: Packet,
}

/// Payload → 56-bit message → BCH codeword → 100-bit packet.
pub fn encode_packet(cmd: &MissionCommand, code: &BchCode) -> EncodedPacket {
    let message = encode_command(cmd).to_message();
    let codeword = code.encode(&message).expect("message is k bits");
    let packet = frame(&codeword).expect("link codeword is 72 bits");
    EncodedPacket { command: *cmd, message, codeword, packet }
}

/// Airtime of `bits` against the per-command latency budget.
pub fn latency_report(bits: usize) -> String {
    let t = airtime(bits, LINK_RATE_BPS);
    let budget = COMMAND_LATENCY_BUDGET_S;
    let verdict = if t <= budget { "within budget".to_string() } else { format!("exceeds budget by {:.3} ms", (t - budget) * 1e3) };
    format!("{bits} bits at {} bit/s = {:.3} ms airtime; latency budget {:.3} ms ({verdict})", LINK_RATE_BPS, t * 1e3, budget * 1e3)
}

/// Field-by-field dump of an encoded packet.
pub fn breakdown(enc: &EncodedPacket, table: &QuantTable) -> String {
    let mut out = String::new();
    let cmd = &enc.command;
    let cw = enc.codeword.bits();
    writeln!(out, "packet     {}", enc.packet.to_hex()).unwrap();
    writeln!(out, "preamble   {}", to_bitstring(&PREAMBLE)).unwrap();
    writeln!(out, "delimiter  {}", to_bitstring(&DELIMITER)).unwrap();
    writeln!(out, "pattern    {} id={}", cmd.pattern(), to_bitstring(&cw[..PATTERN_ID_BITS])).unwrap();
    let raw = cmd.raw_params();
    for (i, slot) in cmd.pattern().slots().iter().enumerate() {
        let bits = to_bitstring(&cw[PATTERN_ID_BITS + 8 * i..PATTERN_ID_BITS + 8 * (i + 1)]);
        match slot {
            Some(s) => {
                let q = table.rule(s.role).expect("table has every role");
                let v = q.dequantize(raw[i]);
                writeln!(out, "param {}    {:<15}{} raw={:<3} = {} {}", i + 1, s.key, bits, raw[i], format_value(s.role, v), q.unit).unwrap();
            }
            None => writeln!(out, "param {}    {:<15}{}", i + 1, "(unused)", bits).unwrap(),
        }
    }
    writeln!(out, "pad        {}", to_bitstring(&cw[PAYLOAD_BITS..MESSAGE_BITS])).unwrap();
    writeln!(out, "parity     {}", to_bitstring(&cw[MESSAGE_BITS..])).unwrap();
    writeln!(out, "guard      {}", to_bitstring(&GUARD)).unwrap();
    writeln!(out, "latency    {}", latency_report(enc.packet.len())).unwrap();
    writeln!(out, "spec       {}", format_spec(cmd, table)).unwrap();
    out
}

/// Receive-side summary.
pub fn reception_report(rx: &Reception, table: &QuantTable) -> String {
    let mut out = String::new();
    writeln!(out, "status     {}", rx.disposition).unwrap();
    if let Some(off) = rx.offset {
        writeln!(out, "sync       bit {off}").unwrap();
    }
    if !rx.corrected_positions.is_empty() {
        let pos: Vec<String> = rx.corrected_positions.iter().map(|p| p.to_string()).collect();
        writeln!(out, "corrected  {} bit(s) at codeword positions {}", pos.len(), pos.join(",")).unwrap();
    }
    if let Some(cmd) = &rx.command {
        writeln!(out, "spec       {}", format_spec(cmd, table)).unwrap();
    }
    if let Some(r) = &rx.reason {
        writeln!(out, "reason     {r}").unwrap();
    }
    out
}
