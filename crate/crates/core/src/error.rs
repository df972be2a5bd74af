use thiserror::Error;

use crate::codec::ParamRole;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("field degree m = {0} is not supported (2..=16)")]
    UnsupportedDegree(u32),
    #[error("polynomial {poly:#x} is not primitive of degree {m}")]
    NotPrimitive { m: u32, poly: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BchError {
    #[error("correction strength T = {0} must be at least 1")]
    InvalidStrength(usize),
    #[error("message length k must be at least 1")]
    EmptyMessage,
    #[error("(k = {k}, T = {t}) needs n = {n} bits but GF(2^{m}) only supports n <= {max}")]
    Infeasible { k: usize, t: usize, m: u32, n: usize, max: usize },
    #[error("expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("slot {slot} ({role}): {value} outside [{min}, {max}]")]
    OutOfRange { slot: usize, role: ParamRole, value: f64, min: f64, max: f64 },
    #[error("{role}: {value} outside [{min}, {max}]")]
    RoleOutOfRange { role: ParamRole, value: f64, min: f64, max: f64 },
    #[error("slot {slot} ({role}): raw value {raw} is not valid")]
    InvalidRaw { slot: usize, role: ParamRole, raw: u8 },
    #[error("unknown pattern id {0:#06b}")]
    UnknownPattern(u8),
    #[error("unknown pattern name `{0}`")]
    UnknownPatternName(alloc::string::String),
    #[error("slot {slot} is unused by this pattern but carries {raw}")]
    NonZeroUnusedSlot { slot: usize, raw: u8 },
    #[error("payload padding bits are not zero")]
    PaddingNotZero,
    #[error("expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("quantization table version {found} does not match expected {expected}")]
    TableVersion { expected: u32, found: u32 },
    #[error("quantization table has no entry for role {0}")]
    MissingRole(ParamRole),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FramingError {
    #[error("expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid hex digit `{0}`")]
    BadHexDigit(char),
    #[error("hex dump has {got} digits, expected {expected}")]
    HexLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PatternError {
    #[error("degenerate geometry: {0}")]
    Degenerate(&'static str),
    #[error("cruise speed is zero on a moving pattern")]
    ZeroSpeed,
    #[error("command has no `{0}` parameter")]
    MissingParam(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VehicleError {
    #[error("vehicle needs at least one thruster")]
    NoThrusters,
    #[error("mass must be positive, got {0}")]
    NonPositiveMass(f64),
    #[error("maneuver log needs at least two samples, got {0}")]
    ShortLog(usize),
    #[error("maneuver log spans zero time")]
    ZeroDuration,
}
