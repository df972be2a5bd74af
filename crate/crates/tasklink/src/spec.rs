//! Text form of a mission command: `square speed=0.5 depth=0.5 side=10 dir=ccw`.
//!
//! Keys are the pattern's slot names. `dir` takes `cw`/`ccw` (or 0/1).
//! Formatting prints the dequantized values, so `format → parse` is exact.

use std::fmt::Write;

use tasklink_core::error::CodecError;
use tasklink_core::codec::{MissionCommand, ParamRole, PatternType, QuantTable};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("empty command")]
    Empty,
    #[error("unknown pattern `{0}`")]
    UnknownPattern(String),
    #[error("{pattern} has no parameter `{key}` (expected {expected})")]
    UnknownKey { pattern: PatternType, key: String, expected: String },
    #[error("`{0}` given twice")]
    Duplicate(String),
    #[error("missing `{key}` for {pattern}")]
    Missing { pattern: PatternType, key: &'static str },
    #[error("`{key}`: cannot parse `{value}`")]
    BadValue { key: String, value: String },
    #[error("expected key=value, got `{0}`")]
    BadToken(String),
    #[error("`{key}` = {value} outside [{min}, {max}] {unit}")]
    OutOfRange { key: &'static str, value: f64, min: f64, max: f64, unit: String },
    #[error(transparent)]
    Codec(#[from] CodecError),
}

pub fn parse_pattern(name: &str) -> Result<PatternType, SpecError> {
    PatternType::from_name(name).map_err(|_| SpecError::UnknownPattern(name.to_string()))
}

fn parse_value(role: ParamRole, key: &str, value: &str) -> Result<f64, SpecError> {
    if role == ParamRole::Direction {
        match value.to_ascii_lowercase().as_str() {
            "cw" | "0" => return Ok(0.0),
            "ccw" | "1" => return Ok(1.0),
            _ => {}
        }
    }
    value.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| SpecError::BadValue { key: key.to_string(), value: value.to_string() })
}

/// Build a command from a pattern and textual key/value pairs.
pub fn command_from_pairs(pattern: PatternType, pairs: &[(String, String)], table: &QuantTable) -> Result<MissionCommand, SpecError> {
    let slots = pattern.slots();
    let expected = || slots.iter().flatten().map(|s| s.key).collect::<Vec<_>>().join(", ");
    let mut values: Vec<(&'static str, f64)> = Vec::new();
    for (key, value) in pairs {
        let Some(slot) = slots.iter().flatten().find(|s| s.key == key.as_str()) else {
            return Err(SpecError::UnknownKey { pattern, key: key.clone(), expected: expected() });
        };
        if values.iter().any(|(k, _)| *k == slot.key) {
            return Err(SpecError::Duplicate(key.clone()));
        }
        values.push((slot.key, parse_value(slot.role, key, value)?));
    }
    for slot in slots.iter().flatten() {
        if !values.iter().any(|(k, _)| *k == slot.key) {
            return Err(SpecError::Missing { pattern, key: slot.key });
        }
    }
    for &(key, value) in &values {
        let role = slots.iter().flatten().find(|s| s.key == key).unwrap().role;
        let q = table.rule(role)?;
        if q.quantize(role, value).is_err() {
            return Err(SpecError::OutOfRange { key, value, min: q.min, max: q.max, unit: q.unit.clone() });
        }
    }
    Ok(MissionCommand::from_physical(pattern, &values, table)?)
}

pub fn parse_spec(text: &str, table: &QuantTable) -> Result<MissionCommand, SpecError> {
    let mut tokens = text.split_whitespace();
    let pattern = parse_pattern(tokens.next().ok_or(SpecError::Empty)?)?;
    let pairs = tokens
        .map(|t| t.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())).ok_or_else(|| SpecError::BadToken(t.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    command_from_pairs(pattern, &pairs, table)
}

pub fn format_value(role: ParamRole, value: f64) -> String {
    match role {
        ParamRole::Direction => if value >= 0.5 { "ccw" } else { "cw" }.to_string(),
        _ => format!("{value}"),
    }
}

pub fn format_spec(cmd: &MissionCommand, table: &QuantTable) -> String {
    let mut out = cmd.pattern().name().to_string();
    for (key, role, _, value) in cmd.fields(table) {
        write!(out, " {key}={}", format_value(role, value)).unwrap();
    }
    out
}
