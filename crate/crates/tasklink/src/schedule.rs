//! Packet schedules for headless runs.
//!
//! One entry per line, `#` starts a comment:
//!
//! ```text
//! 0     cmd square speed=0.5 depth=0.5 side=10 dir=ccw
//! 30    cmd circle speed=0.5 depth=1 radius=4 dir=ccw flip=3,61
//! 45.5  hex AAAAB760C0A400000000D2410
//! ```
//!
//! `flip=` lists codeword bit indices (0..72) to invert before framing.

use tasklink_core::bch::BchCode;
use tasklink_core::codec::QuantTable;
use tasklink_core::framing::{frame, Bitstream, Packet};

use crate::link::encode_packet;
use crate::spec::{parse_spec, SpecError};

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduledPacket {
    pub time: f64,
    pub bits: Bitstream,
    /// Source text of the entry.
    pub label: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ScheduleError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Spec { line: usize, source: SpecError },
    #[error("line {line}: times must not decrease")]
    Order { line: usize },
}

pub fn parse_schedule(text: &str, table: &QuantTable) -> Result<Vec<ScheduledPacket>, ScheduleError> {
    let code = BchCode::link_default();
    let mut out: Vec<ScheduledPacket> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap().trim();
        if body.is_empty() {
            continue;
        }
        let syntax = |message: String| ScheduleError::Syntax { line, message };
        let mut parts = body.splitn(3, char::is_whitespace);
        let time: f64 = parts
            .next()
            .and_then(|t| t.parse().ok())
            .filter(|t: &f64| t.is_finite() && *t >= 0.0)
            .ok_or_else(|| syntax("expected a non-negative time".into()))?;
        let kind = parts.next().unwrap_or("");
        let rest = parts.next().unwrap_or("").trim();
        let bits = match kind {
            "hex" => Bitstream::from(Packet::from_hex(rest).map_err(|e| syntax(e.to_string()))?),
            "cmd" => {
                let mut flips = Vec::new();
                let mut spec = Vec::new();
                for tok in rest.split_whitespace() {
                    match tok.strip_prefix("flip=") {
                        Some(list) => {
                            for f in list.split(',').filter(|s| !s.is_empty()) {
                                let idx: usize = f.parse().map_err(|_| syntax(format!("bad flip index `{f}`")))?;
                                if idx >= code.n() {
                                    return Err(syntax(format!("flip index {idx} outside the {}-bit codeword", code.n())));
                                }
                                flips.push(idx);
                            }
                        }
                        None => spec.push(tok),
                    }
                }
                let cmd = parse_spec(&spec.join(" "), table).map_err(|source| ScheduleError::Spec { line, source })?;
                let mut cw = encode_packet(&cmd, &code).codeword;
                for idx in flips {
                    cw.0[idx] = !cw.0[idx];
                }
                frame(&cw).expect("72-bit codeword").into()
            }
            other => return Err(syntax(format!("unknown entry kind `{other}` (expected cmd or hex)"))),
        };
        if out.last().is_some_and(|p| p.time > time) {
            return Err(ScheduleError::Order { line });
        }
        out.push(ScheduledPacket { time, bits, label: body.to_string() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_entries() {
        let t = QuantTable::default();
        let text = "# demo\n0 cmd square speed=0.5 depth=0.5 side=10 dir=ccw\n\n30 cmd circle speed=0.5 depth=1 radius=4 dir=ccw flip=3,61\n";
        let s = parse_schedule(text, &t).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].time, 30.0);
        let hex = Packet::from_hex(&crate::link::encode_packet(&parse_spec("hover duration=10 depth=1 heading=0", &t).unwrap(), &BchCode::link_default()).packet.to_hex()).unwrap();
        let s2 = parse_schedule(&format!("1.5 hex {}", hex.to_hex()), &t).unwrap();
        assert_eq!(s2[0].bits, Bitstream::from(hex));
    }

    #[test]
    fn rejects_bad_lines() {
        let t = QuantTable::default();
        assert!(matches!(parse_schedule("x cmd hover", &t), Err(ScheduleError::Syntax { line: 1, .. })));
        assert!(matches!(parse_schedule("1 cmd hover duration=10 depth=1", &t), Err(ScheduleError::Spec { .. })));
        assert!(matches!(parse_schedule("1 cmd hover duration=10 depth=1 heading=0 flip=72", &t), Err(ScheduleError::Syntax { .. })));
        assert!(matches!(parse_schedule("5 hex 00\n", &t), Err(ScheduleError::Syntax { .. })));
        let two = "5 cmd hover duration=10 depth=1 heading=0\n4 cmd hover duration=10 depth=1 heading=0";
        assert!(matches!(parse_schedule(two, &t), Err(ScheduleError::Order { line: 2 })));
    }
}
