//! Command dictionary and payload packing.
//!
//! A command is a 4-bit pattern id followed by six 8-bit parameter slots,
//! 52 bits in all. Slots a pattern does not use travel as zero and must decode
//! as zero. Physical values map to slot bytes through a versioned
//! quantization table (`raw = round((value − offset) / scale)`).

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::bits::{push_uint, read_uint};
use crate::error::CodecError;

pub const PATTERN_ID_BITS: usize = 4;
pub const PARAM_SLOTS: usize = 6;
pub const PARAM_BITS: usize = 8;
/// 4 + 6 × 8.
pub const PAYLOAD_BITS: usize = PATTERN_ID_BITS + PARAM_SLOTS * PARAM_BITS;
/// Payload bits are followed by zero padding up to the BCH message length.
pub const MESSAGE_BITS: usize = 56;
/// Version of the quantization table compiled into [`QuantTable::default`].
pub const QUANT_TABLE_VERSION: u32 = 1;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PatternType {
    Straight,
    Square,
    Lawnmower,
    Circle,
    Spiral,
    Helix,
    Hover,
    BoxOrbit,
}

impl PatternType {
    pub const ALL: [PatternType; 8] = [
        PatternType::Straight,
        PatternType::Square,
        PatternType::Lawnmower,
        PatternType::Circle,
        PatternType::Spiral,
        PatternType::Helix,
        PatternType::Hover,
        PatternType::BoxOrbit,
    ];

    pub fn id(self) -> u8 {
        match self {
            PatternType::Straight => 0b0000,
            PatternType::Square => 0b0001,
            PatternType::Lawnmower => 0b0010,
            PatternType::Circle => 0b0011,
            PatternType::Spiral => 0b0100,
            PatternType::Helix => 0b0101,
            PatternType::Hover => 0b0110,
            PatternType::BoxOrbit => 0b0111,
        }
    }

    /// Ids 1000–1111 are reserved.
    pub fn from_id(id: u8) -> Result<Self, CodecError> {
        Self::ALL.into_iter().find(|p| p.id() == id).ok_or(CodecError::UnknownPattern(id))
    }

    pub fn name(self) -> &'static str {
        match self {
            PatternType::Straight => "straight",
            PatternType::Square => "square",
            PatternType::Lawnmower => "lawnmower",
            PatternType::Circle => "circle",
            PatternType::Spiral => "spiral",
            PatternType::Helix => "helix",
            PatternType::Hover => "hover",
            PatternType::BoxOrbit => "box_orbit",
        }
    }

    /// Accepts `box_orbit`, `box-orbit` and `boxorbit`, case-insensitive.
    pub fn from_name(name: &str) -> Result<Self, CodecError> {
        let norm: String = name.chars().filter(|c| *c != '_' && *c != '-').flat_map(char::to_lowercase).collect();
        Self::ALL
            .into_iter()
            .find(|p| p.name().replace('_', "") == norm)
            .ok_or_else(|| CodecError::UnknownPatternName(name.to_string()))
    }

    /// Parameter slots 1..6, top to bottom as in the command dictionary.
    pub fn slots(self) -> [Option<Slot>; PARAM_SLOTS] {
        use ParamRole::*;
        let s = |key, role| Some(Slot { key, role });
        match self {
            PatternType::Straight => [s("speed", Speed), s("depth", Depth), s("duration", Duration), s("heading", Heading), None, None],
            PatternType::Square => [s("speed", Speed), s("depth", Depth), s("side", Span), s("dir", Direction), None, None],
            PatternType::Lawnmower => [s("speed", Speed), s("depth", Depth), s("width", Span), s("height", Span), s("laps", Count), None],
            PatternType::Circle => [s("speed", Speed), s("depth", Depth), s("radius", Span), s("dir", Direction), None, None],
            PatternType::Spiral => [
                s("speed", Speed),
                s("depth", Depth),
                s("initial-radius", Span),
                s("final-radius", Span),
                s("loops", Count),
                s("dir", Direction),
            ],
            PatternType::Helix => [
                s("speed", Speed),
                s("start-depth", Depth),
                s("end-depth", Depth),
                s("radius", Span),
                s("turns", Count),
                s("dir", Direction),
            ],
            PatternType::Hover => [s("duration", Duration), s("depth", Depth), s("heading", Heading), None, None, None],
            PatternType::BoxOrbit => [s("speed", Speed), s("depth", Depth), s("radius", Span), s("dir", Direction), s("laps", Count), None],
        }
    }

    /// Index of the slot called `key`.
    pub fn slot_index(self, key: &str) -> Option<usize> {
        self.slots().iter().position(|s| s.is_some_and(|s| s.key == key))
    }
}

impl fmt::Display for PatternType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A named parameter slot of a pattern.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Slot {
    pub key: &'static str,
    pub role: ParamRole,
}

/// Physical meaning of a slot; selects the quantization rule.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ParamRole {
    Speed,
    Depth,
    Duration,
    Heading,
    /// Radius, side, grid width or height.
    Span,
    /// Laps, loops, turns.
    Count,
    /// 0 = clockwise, 1 = counter-clockwise.
    Direction,
}

impl ParamRole {
    pub const ALL: [ParamRole; 7] = [
        ParamRole::Speed,
        ParamRole::Depth,
        ParamRole::Duration,
        ParamRole::Heading,
        ParamRole::Span,
        ParamRole::Count,
        ParamRole::Direction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamRole::Speed => "speed",
            ParamRole::Depth => "depth",
            ParamRole::Duration => "duration",
            ParamRole::Heading => "heading",
            ParamRole::Span => "span",
            ParamRole::Count => "count",
            ParamRole::Direction => "direction",
        }
    }
}

impl fmt::Display for ParamRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Quantization rule for one role: `physical = raw × scale + offset`.
#[derive(Clone, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Quantization {
    pub scale: f64,
    pub offset: f64,
    pub unit: String,
    pub min: f64,
    pub max: f64,
    /// Half-open `[min, max)` range that wraps modulo 256 steps (headings).
    #[cfg_attr(feature = "serde", serde(default))]
    pub circular: bool,
}

impl Quantization {
    fn new(scale: f64, unit: &str, max: f64) -> Self {
        Quantization { scale, offset: 0.0, unit: unit.to_string(), min: 0.0, max, circular: false }
    }

    pub fn quantize(&self, role: ParamRole, value: f64) -> Result<u8, CodecError> {
        // same slack as raw_valid, so dequantized values always re-quantize
        let eps = self.scale * 1e-6;
        let in_range = if self.circular {
            value >= self.min - eps && value < self.max
        } else {
            value >= self.min - eps && value <= self.max + eps
        };
        let out_of_range = || CodecError::RoleOutOfRange { role, value, min: self.min, max: self.max };
        if !in_range || !value.is_finite() {
            return Err(out_of_range());
        }
        let steps = libm::round((value - self.offset) / self.scale);
        if self.circular {
            return Ok((steps as i64).rem_euclid(256) as u8);
        }
        if !(0.0..=255.0).contains(&steps) {
            return Err(out_of_range());
        }
        Ok(steps as u8)
    }

    pub fn dequantize(&self, raw: u8) -> f64 {
        raw as f64 * self.scale + self.offset
    }

    /// Whether a received byte maps back inside the declared range.
    pub fn raw_valid(&self, raw: u8) -> bool {
        let v = self.dequantize(raw);
        let eps = self.scale * 1e-6;
        if self.circular {
            v >= self.min - eps && v < self.max
        } else {
            v >= self.min - eps && v <= self.max + eps
        }
    }
}

/// Role → quantization rule, with a version stamp.
#[derive(Clone, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuantTable {
    pub version: u32,
    pub roles: alloc::collections::BTreeMap<ParamRole, Quantization>,
}

impl Default for QuantTable {
    fn default() -> Self {
        let mut roles = alloc::collections::BTreeMap::new();
        roles.insert(ParamRole::Speed, Quantization::new(0.01, "m/s", 2.55));
        roles.insert(ParamRole::Depth, Quantization::new(0.1, "m", 25.5));
        roles.insert(ParamRole::Duration, Quantization::new(10.0, "s", 2550.0));
        roles.insert(
            ParamRole::Heading,
            Quantization { circular: true, ..Quantization::new(360.0 / 256.0, "deg", 360.0) },
        );
        roles.insert(ParamRole::Span, Quantization::new(0.5, "m", 127.5));
        roles.insert(ParamRole::Count, Quantization::new(1.0, "", 255.0));
        roles.insert(ParamRole::Direction, Quantization::new(1.0, "", 1.0));
        QuantTable { version: QUANT_TABLE_VERSION, roles }
    }
}

impl QuantTable {
    pub fn rule(&self, role: ParamRole) -> Result<&Quantization, CodecError> {
        self.roles.get(&role).ok_or(CodecError::MissingRole(role))
    }

    pub fn check_version(&self, expected: u32) -> Result<(), CodecError> {
        if self.version != expected {
            return Err(CodecError::TableVersion { expected, found: self.version });
        }
        Ok(())
    }

    /// Every role present with a positive scale and a range that fits 8 bits.
    pub fn validate(&self) -> Result<(), CodecError> {
        for role in ParamRole::ALL {
            let q = self.rule(role)?;
            let fits = q.scale > 0.0 && q.min >= q.offset && (q.max - q.offset) / q.scale <= 256.0 + 1e-9;
            if !fits {
                return Err(CodecError::RoleOutOfRange { role, value: q.max, min: q.offset, max: q.offset + 255.0 * q.scale });
            }
        }
        Ok(())
    }

    pub fn quantize(&self, role: ParamRole, value: f64) -> Result<u8, CodecError> {
        self.rule(role)?.quantize(role, value)
    }

    pub fn dequantize(&self, role: ParamRole, raw: u8) -> Result<f64, CodecError> {
        Ok(self.rule(role)?.dequantize(raw))
    }
}

/// A pattern plus its six raw parameter bytes.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MissionCommand {
    pattern: PatternType,
    params: [u8; PARAM_SLOTS],
}

impl MissionCommand {
    /// Checks that unused slots are zero and used slots map inside their
    /// role's range.
    pub fn new(pattern: PatternType, params: [u8; PARAM_SLOTS], table: &QuantTable) -> Result<Self, CodecError> {
        for (slot, (spec, &raw)) in pattern.slots().iter().zip(&params).enumerate() {
            match spec {
                None if raw != 0 => return Err(CodecError::NonZeroUnusedSlot { slot: slot + 1, raw }),
                None => {}
                Some(s) if !table.rule(s.role)?.raw_valid(raw) => return Err(CodecError::InvalidRaw { slot: slot + 1, role: s.role, raw }),
                Some(_) => {}
            }
        }
        Ok(MissionCommand { pattern, params })
    }

    /// Build from physical values keyed by slot name. Every slot the pattern
    /// uses must be given; unknown keys are rejected.
    pub fn from_physical(pattern: PatternType, values: &[(&str, f64)], table: &QuantTable) -> Result<Self, CodecError> {
        let mut params = [0u8; PARAM_SLOTS];
        let mut given = [false; PARAM_SLOTS];
        for &(key, value) in values {
            let slot = pattern.slot_index(key).ok_or_else(|| CodecError::UnknownPatternName(alloc::format!("{pattern}.{key}")))?;
            let role = pattern.slots()[slot].expect("slot index points at a used slot").role;
            params[slot] = table.quantize(role, value).map_err(|e| match e {
                CodecError::RoleOutOfRange { role, value, min, max } => CodecError::OutOfRange { slot: slot + 1, role, value, min, max },
                other => other,
            })?;
            given[slot] = true;
        }
        if let Some(slot) = pattern.slots().iter().zip(&given).position(|(s, &g)| s.is_some() && !g) {
            let role = pattern.slots()[slot].unwrap().role;
            let q = table.rule(role)?;
            return Err(CodecError::OutOfRange { slot: slot + 1, role, value: f64::NAN, min: q.min, max: q.max });
        }
        Self::new(pattern, params, table)
    }

    pub fn pattern(&self) -> PatternType {
        self.pattern
    }

    pub fn raw_params(&self) -> [u8; PARAM_SLOTS] {
        self.params
    }

    pub fn raw(&self, key: &str) -> Option<u8> {
        self.pattern.slot_index(key).map(|i| self.params[i])
    }

    /// Physical value of the slot called `key`.
    pub fn value(&self, key: &str, table: &QuantTable) -> Option<f64> {
        let i = self.pattern.slot_index(key)?;
        let role = self.pattern.slots()[i]?.role;
        table.dequantize(role, self.params[i]).ok()
    }

    /// (key, role, raw, physical) for every used slot.
    pub fn fields(&self, table: &QuantTable) -> Vec<(&'static str, ParamRole, u8, f64)> {
        self.pattern
            .slots()
            .iter()
            .zip(&self.params)
            .filter_map(|(s, &raw)| {
                let s = (*s)?;
                Some((s.key, s.role, raw, table.dequantize(s.role, raw).unwrap_or(f64::NAN)))
            })
            .collect()
    }
}

/// 52 payload bits.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct RawPayload(Vec<bool>);

impl RawPayload {
    pub fn from_bits(bits: Vec<bool>) -> Result<Self, CodecError> {
        if bits.len() != PAYLOAD_BITS {
            return Err(CodecError::LengthMismatch { expected: PAYLOAD_BITS, got: bits.len() });
        }
        Ok(RawPayload(bits))
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Payload followed by zero padding to the 56-bit BCH message.
    pub fn to_message(&self) -> Vec<bool> {
        let mut m = self.0.clone();
        m.resize(MESSAGE_BITS, false);
        m
    }

    /// Strip and check the padding of a decoded BCH message.
    pub fn from_message(message: &[bool]) -> Result<Self, CodecError> {
        if message.len() != MESSAGE_BITS {
            return Err(CodecError::LengthMismatch { expected: MESSAGE_BITS, got: message.len() });
        }
        if message[PAYLOAD_BITS..].iter().any(|&b| b) {
            return Err(CodecError::PaddingNotZero);
        }
        Ok(RawPayload(message[..PAYLOAD_BITS].to_vec()))
    }
}

pub fn encode_command(cmd: &MissionCommand) -> RawPayload {
    let mut bits = Vec::with_capacity(PAYLOAD_BITS);
    push_uint(&mut bits, cmd.pattern.id() as u64, PATTERN_ID_BITS);
    for &p in &cmd.params {
        push_uint(&mut bits, p as u64, PARAM_BITS);
    }
    RawPayload(bits)
}

pub fn decode_payload(payload: &RawPayload, table: &QuantTable) -> Result<MissionCommand, CodecError> {
    let bits = payload.bits();
    let pattern = PatternType::from_id(read_uint(&bits[..PATTERN_ID_BITS]) as u8)?;
    let mut params = [0u8; PARAM_SLOTS];
    for (i, chunk) in bits[PATTERN_ID_BITS..].chunks(PARAM_BITS).enumerate() {
        params[i] = read_uint(chunk) as u8;
    }
    MissionCommand::new(pattern, params, table)
}
