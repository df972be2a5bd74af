use std::process::Command;

use clap::Parser;
use proptest::prelude::*;

use tasklink::cli::{parse_hex_stream, run, Cli, EXIT_REJECTED};
use tasklink::spec::{format_spec, parse_spec};
use tasklink_core::bch::BchCode;
use tasklink_core::codec::{MissionCommand, PatternType, QuantTable, PARAM_SLOTS};
use tasklink_core::executor::{receive, Disposition};
use tasklink_core::framing::{Packet, SyncTolerance, PACKET_HEX_DIGITS};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tasklink"))
}

fn run_args(args: &[&str]) -> (i32, String) {
    let cli = Cli::try_parse_from(std::iter::once("tasklink").chain(args.iter().copied())).unwrap();
    let mut out = Vec::new();
    let code = run(cli, &mut out).unwrap();
    (code, String::from_utf8(out).unwrap())
}

#[test]
fn encode_then_decode() {
    let (code, hex) = run_args(&["encode", "circle", "--speed", "0.5", "--depth", "1", "--radius", "3", "--dir", "ccw", "--hex"]);
    assert_eq!(code, 0);
    let hex = hex.trim();
    assert_eq!(hex.len(), PACKET_HEX_DIGITS);
    let (code, text) = run_args(&["decode", hex]);
    assert_eq!(code, 0);
    assert!(text.contains("status     CLEAN"), "{text}");
    assert!(text.contains("spec       circle speed=0.5 depth=1 radius=3 dir=ccw"), "{text}");
}

#[test]
fn encode_breakdown() {
    let (code, text) = run_args(&["encode", "helix", "--speed", "0.3", "--start-depth", "0.5", "--end-depth", "3", "--radius", "2", "--turns", "3", "--dir", "cw"]);
    assert_eq!(code, 0);
    for field in ["preamble   1010101010101010", "delimiter  10110111", "start-depth", "parity", "guard      0000", "latency"] {
        assert!(text.contains(field), "{field} missing from\n{text}");
    }
}

#[test]
fn binary_exit_codes() {
    let out = bin().args(["decode", "ABC"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hex digits"));
    let out = bin().args(["encode", "square", "--speed", "0.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing"));
    let out = bin().args(["encode", "zigzag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // all zeros: no preamble anywhere
    let out = bin().args(["decode", &"0".repeat(PACKET_HEX_DIGITS)]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_REJECTED));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FRAME_FAIL"));
    let out = bin().args(["encode", "hover", "--duration", "60", "--depth", "1", "--heading", "90", "--hex"]).output().unwrap();
    assert!(out.status.success());
    let hex = String::from_utf8(out.stdout).unwrap();
    let out = bin().args(["decode", hex.trim()]).output().unwrap();
    assert!(out.status.success());
}

#[test]
fn decode_finds_packet_in_longer_stream() {
    let t = QuantTable::default();
    let cmd = parse_spec("straight speed=1 depth=2 duration=30 heading=180", &t).unwrap();
    let hex = tasklink::link::encode_packet(&cmd, &BchCode::link_default()).packet.to_hex();
    let (code, text) = run_args(&["decode", &format!("00{hex}0")]);
    assert_eq!(code, 0);
    assert!(text.contains("sync       bit 8"), "{text}");
}

#[test]
fn sweep_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let args = ["sweep", "--trials", "300", "--seed", "3", "--t", "1,2", "--ber", "0,0.05", "--out", out.to_str().unwrap()];
    let (code, text) = run_args(&args);
    assert_eq!(code, 0);
    let tsv = std::fs::read_to_string(out.join("sweep.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 5);
    for line in tsv.lines().skip(1).filter(|l| l.split('\t').nth(2) == Some("0")) {
        assert_eq!(line.split('\t').nth(5), Some("1.000000"), "{line}");
    }
    assert!(text.starts_with(&tsv));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(json["rng"], "chacha8");
    assert_eq!(json["cells"].as_array().unwrap().len(), 4);
    // same seed, same table
    let (_, again) = run_args(&args);
    assert_eq!(again, text);
}

#[test]
fn default_sweep_shape() {
    let (code, text) = run_args(&["sweep", "--trials", "50"]);
    assert_eq!(code, 0);
    let rows: Vec<&str> = text.split("\n\n").next().unwrap().lines().skip(1).collect();
    assert_eq!(rows.len(), 32);
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.split('\t').nth(5).unwrap().parse::<f64>().unwrap())));
}

#[test]
fn simulate_writes_logs() {
    let dir = tempfile::tempdir().unwrap();
    let schedule = dir.path().join("plan.txt");
    std::fs::write(&schedule, "0 cmd square speed=0.5 depth=0.5 side=4 dir=ccw\n10 cmd circle speed=0.5 depth=1 radius=2 dir=cw flip=3,61\n").unwrap();
    let out = dir.path().join("out");
    let args = ["simulate", "--schedule", schedule.to_str().unwrap(), "--duration", "20", "--out", out.to_str().unwrap()];
    let (code, text) = run_args(&args);
    assert_eq!(code, 0);
    assert!(text.contains("CLEAN") && text.contains("CORRECTED"), "{text}");
    let traj = std::fs::read_to_string(out.join("trajectory.tsv")).unwrap();
    assert_eq!(traj.lines().count(), 2001);
    assert!(traj.starts_with("t\tphase\tx\ty\tz\tpsi\twp_index\tplan_id\n"));
    let commands = std::fs::read_to_string(out.join("commands.tsv")).unwrap();
    assert_eq!(commands.lines().count(), 3);
    let first = traj.clone();
    run_args(&args);
    assert_eq!(std::fs::read_to_string(out.join("trajectory.tsv")).unwrap(), first);
}

#[test]
fn bad_schedule_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let schedule = dir.path().join("plan.txt");
    std::fs::write(&schedule, "5 cmd hover duration=10 depth=1 heading=0\n1 cmd hover duration=10 depth=1 heading=0\n").unwrap();
    let out = bin().args(["simulate", "--schedule", schedule.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn config_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("quantization.toml"), "version = 2\n").unwrap();
    let out = bin().args(["--config", dir.path().to_str().unwrap(), "encode", "hover", "--duration", "1", "--depth", "1", "--heading", "0"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("quantization.toml"));
}

fn command() -> impl Strategy<Value = MissionCommand> {
    (0..PatternType::ALL.len(), any::<[u8; PARAM_SLOTS]>()).prop_filter_map("raw outside range", |(p, raw)| {
        let pattern = PatternType::ALL[p];
        let table = QuantTable::default();
        let mut raw = raw;
        for (i, slot) in pattern.slots().iter().enumerate() {
            match slot {
                None => raw[i] = 0,
                Some(s) if !table.rule(s.role).unwrap().raw_valid(raw[i]) => return None,
                _ => {}
            }
        }
        MissionCommand::new(pattern, raw, &table).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn decode_inverts_encode(cmd in command()) {
        let table = QuantTable::default();
        let spec = format_spec(&cmd, &table);
        let mut args = vec!["encode".to_string(), cmd.pattern().name().to_string(), "--hex".to_string()];
        for tok in spec.split_whitespace().skip(1) {
            let (k, v) = tok.split_once('=').unwrap();
            args.push(format!("--{k}"));
            args.push(v.to_string());
        }
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, hex) = run_args(&refs);
        prop_assert_eq!(code, 0);
        let (code, text) = run_args(&["decode", hex.trim()]);
        prop_assert_eq!(code, 0);
        prop_assert!(text.contains("status     CLEAN"));
        let expected = format!("spec       {}", spec);
        prop_assert!(text.contains(&expected), "{}", text);
    }

    /// One corrupted hex digit is corrected or refused, never accepted as
    /// a different command.
    #[test]
    fn corrupted_digit_never_silent(cmd in command(), pos in 0..PACKET_HEX_DIGITS, delta in 1u32..16) {
        let table = QuantTable::default();
        let code = BchCode::link_default();
        let hex = tasklink::link::encode_packet(&cmd, &code).packet.to_hex();
        let mut digits: Vec<char> = hex.chars().collect();
        let v = digits[pos].to_digit(16).unwrap() ^ delta;
        digits[pos] = char::from_digit(v, 16).unwrap().to_ascii_uppercase();
        let corrupted: String = digits.into_iter().collect();
        let bits = parse_hex_stream(&corrupted).unwrap();
        let rx = receive(&code, &table, SyncTolerance::default(), &bits);
        if rx.disposition.accepted() {
            prop_assert_eq!(rx.command, Some(cmd));
        }
        // digits 6..24 carry the codeword; the rest is sync and guard
        let in_codeword = (6..24).contains(&pos);
        if in_codeword {
            prop_assert_ne!(rx.disposition, Disposition::Clean);
            if delta.count_ones() <= 2 {
                prop_assert_eq!(rx.disposition, Disposition::Corrected);
            }
        }
        prop_assert!(Packet::from_hex(&corrupted).is_ok());
    }
}
