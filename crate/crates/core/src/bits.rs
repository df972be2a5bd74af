//! Bit-sequence helpers. Bit sequences are `[bool]`, index 0 first on the wire.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::FramingError;

/// Append the low `width` bits of `value`, MSB first.
pub fn push_uint(out: &mut Vec<bool>, value: u64, width: usize) {
    for i in (0..width).rev() {
        out.push((value >> i) & 1 == 1);
    }
}

/// Read `bits` as an unsigned integer, MSB first. At most 64 bits.
pub fn read_uint(bits: &[bool]) -> u64 {
    debug_assert!(bits.len() <= 64);
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

pub fn hamming(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub fn weight(bits: &[bool]) -> usize {
    bits.iter().filter(|&&b| b).count()
}

/// Parse a string of `0`/`1` characters; other characters are ignored.
pub fn from_bitstring(s: &str) -> Vec<bool> {
    s.chars().filter_map(|c| match c {
        '0' => Some(false),
        '1' => Some(true),
        _ => None,
    }).collect()
}

pub fn to_bitstring(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// MSB-first hex dump; the last digit is zero-padded on the right when the
/// length is not a multiple of four.
pub fn to_hex(bits: &[bool]) -> String {
    bits.chunks(4)
        .map(|chunk| {
            let mut v = 0u32;
            for i in 0..4 {
                v = (v << 1) | chunk.get(i).copied().unwrap_or(false) as u32;
            }
            core::char::from_digit(v, 16).unwrap().to_ascii_uppercase()
        })
        .collect()
}

/// Inverse of [`to_hex`] for a dump of exactly `nbits.div_ceil(4)` digits.
pub fn from_hex(s: &str, nbits: usize) -> Result<Vec<bool>, FramingError> {
    let digits = s.trim();
    let expected = nbits.div_ceil(4);
    let count = digits.chars().count();
    if count != expected {
        return Err(FramingError::HexLength { expected, got: count });
    }
    let mut out = Vec::with_capacity(expected * 4);
    for c in digits.chars() {
        let v = c.to_digit(16).ok_or(FramingError::BadHexDigit(c))?;
        push_uint(&mut out, v as u64, 4);
    }
    out.truncate(nbits);
    Ok(out)
}
