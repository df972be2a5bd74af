//! 100-bit transmission packets.
//!
//! ```text
//! | preamble (16) | delimiter (8) | codeword (72) | guard (4) |
//!   1010…10         10110111                        0000
//! ```
//!
//! The deframer only produces candidates. False syncs on random bits are
//! possible and are left for the BCH re-check to reject.

use alloc::string::String;
use alloc::vec::Vec;

use crate::bch::Codeword;
use crate::bits::{self, hamming};
use crate::error::FramingError;

pub const PREAMBLE_BITS: usize = 16;
pub const DELIMITER_BITS: usize = 8;
pub const GUARD_BITS: usize = 4;
/// Bits in front of the codeword.
pub const HEADER_BITS: usize = PREAMBLE_BITS + DELIMITER_BITS;
/// Framing overhead per packet.
pub const OVERHEAD_BITS: usize = HEADER_BITS + GUARD_BITS;
/// Codeword length of the mission link.
pub const LINK_CODEWORD_BITS: usize = 72;
pub const PACKET_BITS: usize = OVERHEAD_BITS + LINK_CODEWORD_BITS;
pub const PACKET_HEX_DIGITS: usize = PACKET_BITS / 4;

pub const PREAMBLE: [bool; PREAMBLE_BITS] = {
    let mut p = [false; PREAMBLE_BITS];
    let mut i = 0;
    while i < PREAMBLE_BITS {
        p[i] = i % 2 == 0;
        i += 1;
    }
    p
};
pub const DELIMITER: [bool; DELIMITER_BITS] = [true, false, true, true, false, true, true, true];
pub const GUARD: [bool; GUARD_BITS] = [false; GUARD_BITS];

pub const DEFAULT_MAX_PREAMBLE_ERRORS: usize = 2;
pub const DEFAULT_MAX_DELIMITER_ERRORS: usize = 1;

/// Sync tolerances for [`deframe`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SyncTolerance {
    pub max_preamble_errors: usize,
    pub max_delimiter_errors: usize,
}

impl Default for SyncTolerance {
    fn default() -> Self {
        SyncTolerance {
            max_preamble_errors: DEFAULT_MAX_PREAMBLE_ERRORS,
            max_delimiter_errors: DEFAULT_MAX_DELIMITER_ERRORS,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Packet(Vec<bool>);

impl Packet {
    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn codeword_bits(&self) -> &[bool] {
        &self.0[HEADER_BITS..self.0.len() - GUARD_BITS]
    }

    /// 25 hex digits, MSB first. Only defined for 100-bit packets.
    pub fn to_hex(&self) -> String {
        bits::to_hex(&self.0)
    }

    /// Parse a 25-digit hex dump. Framing bits are not validated, so a
    /// corrupted dump still goes through the deframer.
    pub fn from_hex(s: &str) -> Result<Self, FramingError> {
        Ok(Packet(bits::from_hex(s, PACKET_BITS)?))
    }
}

/// Raw received bits.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Bitstream(pub Vec<bool>);

impl Bitstream {
    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Packet> for Bitstream {
    fn from(p: Packet) -> Self {
        Bitstream(p.0)
    }
}

/// preamble ∥ delimiter ∥ codeword ∥ guard.
///
/// Any codeword length is accepted so that codes other than the 72-bit link
/// code can run through the same channel.
pub fn frame_any(codeword: &Codeword) -> Packet {
    let mut bits = Vec::with_capacity(OVERHEAD_BITS + codeword.len());
    bits.extend_from_slice(&PREAMBLE);
    bits.extend_from_slice(&DELIMITER);
    bits.extend_from_slice(codeword.bits());
    bits.extend_from_slice(&GUARD);
    Packet(bits)
}

/// Frame a 72-bit link codeword into a 100-bit packet.
pub fn frame(codeword: &Codeword) -> Result<Packet, FramingError> {
    if codeword.len() != LINK_CODEWORD_BITS {
        return Err(FramingError::LengthMismatch { expected: LINK_CODEWORD_BITS, got: codeword.len() });
    }
    Ok(frame_any(codeword))
}

/// Sync distance at `offset`, or `None` when outside tolerance.
fn sync_distance(bits: &[bool], offset: usize, tol: SyncTolerance) -> Option<usize> {
    let pre = hamming(&PREAMBLE, &bits[offset..offset + PREAMBLE_BITS]);
    if pre > tol.max_preamble_errors {
        return None;
    }
    let del = hamming(&DELIMITER, &bits[offset + PREAMBLE_BITS..offset + HEADER_BITS]);
    if del > tol.max_delimiter_errors {
        return None;
    }
    Some(pre + del)
}

/// Scan `stream` for packets carrying `codeword_bits`-bit codewords.
///
/// A sync is accepted when the preamble and delimiter are both within
/// tolerance. If a sync with a strictly smaller distance starts before the
/// accepted packet would end, the scanner moves to it. After emitting a
/// candidate the scan resumes after the packet's guard.
pub fn deframe_with(stream: &Bitstream, codeword_bits: usize, tol: SyncTolerance) -> Vec<(usize, Codeword)> {
    let bits = stream.bits();
    let packet_len = OVERHEAD_BITS + codeword_bits;
    let last_start = match bits.len().checked_sub(HEADER_BITS + codeword_bits) {
        Some(l) => l,
        None => return Vec::new(),
    };
    let mut out = Vec::new();
    let mut offset = 0;
    while offset <= last_start {
        let Some(mut best) = sync_distance(bits, offset, tol) else {
            offset += 1;
            continue;
        };
        let mut start = offset;
        let mut probe = offset + 1;
        while best > 0 && probe < start + packet_len && probe <= last_start {
            if let Some(d) = sync_distance(bits, probe, tol) {
                if d < best {
                    best = d;
                    start = probe;
                }
            }
            probe += 1;
        }
        let cw = bits[start + HEADER_BITS..start + HEADER_BITS + codeword_bits].to_vec();
        out.push((start, Codeword(cw)));
        offset = start + packet_len;
    }
    out
}

/// Deframe 72-bit link codewords with the given preamble tolerance and the
/// default 1-bit delimiter tolerance.
pub fn deframe(stream: &Bitstream, max_preamble_errors: usize) -> Vec<(usize, Codeword)> {
    let tol = SyncTolerance { max_preamble_errors, ..SyncTolerance::default() };
    deframe_with(stream, LINK_CODEWORD_BITS, tol)
}
