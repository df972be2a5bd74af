//! Low-bandwidth mission command link for small AUVs.
//!
//! Operator commands (a waypoint pattern and up to six 8-bit parameters) are
//! packed into a 52-bit payload, protected by a shortened BCH(72, 56) code and
//! framed into 100-bit packets. The same crate carries the receiving side: a
//! bit-flip channel model, the deframer and decoder, waypoint pattern
//! generation, a 4-DOF vehicle model with PD depth control, and the online
//! mission executor that re-plans when a new command arrives.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bch;
pub mod bits;
pub mod channel;
pub mod codec;
pub mod error;
pub mod executor;
pub mod framing;
pub mod gf;
pub mod linalg;
pub mod pattern;
pub mod vehicle;

pub use bch::{BchCode, Codeword, DecodeResult, DecodeStatus};
pub use error::{BchError, FieldError};
pub use gf::{FieldElement, FieldPolynomial, GaloisField};
