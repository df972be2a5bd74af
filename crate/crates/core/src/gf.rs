//! Arithmetic over binary extension fields GF(2^m).
//!
//! Elements are polynomials over GF(2) of degree < m packed into the low bits
//! of a `u16`; bit `i` is the coefficient of `x^i`. Addition is XOR.
//! Multiplication goes through log/antilog tables built once when the field is
//! constructed, with α = `x` as the primitive element.
//!
//! The mission link uses GF(2^8) under x⁸+x⁴+x³+x²+1 (`0x11D`). Other degrees
//! exist so that the code-rate analysis can vary `m`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::FieldError;

/// Primitive polynomial for GF(2^8): x⁸+x⁴+x³+x²+1.
pub const GF256_PRIMITIVE_POLY: u32 = 0x11D;

/// Conventional primitive polynomials for m = 2..=16 (index = m).
const DEFAULT_PRIMITIVE_POLYS: [u32; 17] = [
    0, 0, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B,
    0x4443, 0x8003, 0x1100B,
];

/// An element of GF(2^m).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FieldElement(pub u16);

impl FieldElement {
    pub const ZERO: Self = FieldElement(0);
    pub const ONE: Self = FieldElement(1);

    #[inline]
    pub fn value(self) -> u16 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

// addition in characteristic 2 is XOR
#[allow(clippy::suspicious_arithmetic_impl)]
impl core::ops::Add for FieldElement {
    type Output = FieldElement;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        FieldElement(self.0 ^ rhs.0)
    }
}

#[allow(clippy::suspicious_op_assign_impl)]
impl core::ops::AddAssign for FieldElement {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.0 ^= rhs.0;
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#04x}", self.0)
    }
}

/// Polynomial with coefficients in GF(2^m), lowest degree first.
///
/// Always normalized: no trailing zero coefficients, so the zero polynomial is
/// the empty list.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct FieldPolynomial {
    coeffs: Vec<FieldElement>,
}

impl FieldPolynomial {
    pub fn zero() -> Self {
        FieldPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        FieldPolynomial { coeffs: vec![FieldElement::ONE] }
    }

    pub fn from_coeffs(coeffs: impl Into<Vec<FieldElement>>) -> Self {
        let mut p = FieldPolynomial { coeffs: coeffs.into() };
        p.normalize();
        p
    }

    /// Build from GF(2) coefficients given as bits of `mask` (bit i = x^i).
    pub fn from_binary_mask(mask: u64) -> Self {
        let coeffs = (0..64)
            .map(|i| FieldElement(((mask >> i) & 1) as u16))
            .collect::<Vec<_>>();
        Self::from_coeffs(coeffs)
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs.get(i).copied().unwrap_or(FieldElement::ZERO)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when every coefficient lies in the prime subfield GF(2).
    pub fn is_binary(&self) -> bool {
        self.coeffs.iter().all(|c| c.0 <= 1)
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|i| self.coeff(i) + other.coeff(i)).collect::<Vec<_>>();
        Self::from_coeffs(coeffs)
    }
}

/// GF(2^m) with precomputed log/antilog tables.
#[derive(Clone)]
pub struct GaloisField {
    m: u32,
    poly: u32,
    order: usize,
    /// exp[i] = α^i for i in 0..2·order, doubled so products skip a modulo.
    exp: Vec<u16>,
    /// log[a] = i with α^i = a; log[0] is unused.
    log: Vec<u16>,
}

impl fmt::Debug for GaloisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaloisField").field("m", &self.m).field("poly", &format_args!("{:#x}", self.poly)).finish()
    }
}

impl GaloisField {
    /// GF(2^8) under `0x11D`.
    pub fn gf256() -> Self {
        Self::with_poly(8, GF256_PRIMITIVE_POLY).expect("0x11D is primitive")
    }

    /// GF(2^m) with the conventional primitive polynomial for `m` (2..=16).
    pub fn new(m: u32) -> Result<Self, FieldError> {
        let poly = *DEFAULT_PRIMITIVE_POLYS.get(m as usize).ok_or(FieldError::UnsupportedDegree(m))?;
        if poly == 0 {
            return Err(FieldError::UnsupportedDegree(m));
        }
        Self::with_poly(m, poly)
    }

    /// GF(2^m) reduced modulo `poly`, which must be primitive of degree `m`.
    pub fn with_poly(m: u32, poly: u32) -> Result<Self, FieldError> {
        if !(2..=16).contains(&m) {
            return Err(FieldError::UnsupportedDegree(m));
        }
        if poly >> m != 1 {
            return Err(FieldError::NotPrimitive { m, poly });
        }
        let size = 1usize << m;
        let order = size - 1;
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; size];
        let mut seen = vec![false; size];
        let mut x: u32 = 1;
        for i in 0..order {
            if seen[x as usize] {
                // α has order < 2^m − 1
                return Err(FieldError::NotPrimitive { m, poly });
            }
            seen[x as usize] = true;
            exp[i] = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(FieldError::NotPrimitive { m, poly });
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(GaloisField { m, poly, order, exp, log })
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn primitive_poly(&self) -> u32 {
        self.poly
    }

    /// Size of the multiplicative group, 2^m − 1.
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn contains(&self, a: FieldElement) -> bool {
        (a.0 as usize) <= self.order
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.is_zero() || b.is_zero() {
            return FieldElement::ZERO;
        }
        let i = self.log[a.0 as usize] as usize + self.log[b.0 as usize] as usize;
        FieldElement(self.exp[i])
    }

    pub fn inverse(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        let l = self.log[a.0 as usize] as usize;
        Ok(FieldElement(self.exp[(self.order - l) % self.order]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inverse(b)?))
    }

    /// α^(e mod 2^m−1); negative exponents wrap.
    #[inline]
    pub fn alpha_power(&self, e: i64) -> FieldElement {
        let idx = e.rem_euclid(self.order as i64) as usize;
        FieldElement(self.exp[idx])
    }

    /// Discrete log base α. `None` for zero.
    #[inline]
    pub fn log(&self, a: FieldElement) -> Option<usize> {
        if a.is_zero() {
            None
        } else {
            Some(self.log[a.0 as usize] as usize)
        }
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        match self.log(a) {
            None if e == 0 => FieldElement::ONE,
            None => FieldElement::ZERO,
            Some(l) => {
                let idx = ((l as u128 * e as u128) % self.order as u128) as usize;
                FieldElement(self.exp[idx])
            }
        }
    }

    /// Horner evaluation of `p` at `x`.
    pub fn eval_poly(&self, p: &FieldPolynomial, x: FieldElement) -> FieldElement {
        p.coeffs.iter().rev().fold(FieldElement::ZERO, |acc, &c| self.mul(acc, x) + c)
    }

    pub fn poly_mul(&self, a: &FieldPolynomial, b: &FieldPolynomial) -> FieldPolynomial {
        if a.is_zero() || b.is_zero() {
            return FieldPolynomial::zero();
        }
        let mut out = vec![FieldElement::ZERO; a.coeffs.len() + b.coeffs.len() - 1];
        for (i, &ca) in a.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (j, &cb) in b.coeffs.iter().enumerate() {
                out[i + j] += self.mul(ca, cb);
            }
        }
        FieldPolynomial::from_coeffs(out)
    }

    pub fn poly_scale(&self, p: &FieldPolynomial, s: FieldElement) -> FieldPolynomial {
        FieldPolynomial::from_coeffs(p.coeffs.iter().map(|&c| self.mul(c, s)).collect::<Vec<_>>())
    }

    /// Multiply `p` by `x^shift`.
    pub fn poly_shift(&self, p: &FieldPolynomial, shift: usize) -> FieldPolynomial {
        if p.is_zero() {
            return FieldPolynomial::zero();
        }
        let mut coeffs = vec![FieldElement::ZERO; shift];
        coeffs.extend_from_slice(&p.coeffs);
        FieldPolynomial { coeffs }
    }

    /// Cyclotomic coset of `i` under multiplication by 2 modulo 2^m − 1.
    pub fn cyclotomic_coset(&self, i: usize) -> Vec<usize> {
        let mut coset = Vec::new();
        let mut j = i % self.order;
        loop {
            coset.push(j);
            j = (j * 2) % self.order;
            if j == i % self.order {
                break;
            }
        }
        coset
    }

    /// Minimal polynomial of α^i over GF(2): product of (x − α^j) over the
    /// cyclotomic coset of i.
    pub fn minimal_polynomial(&self, i: usize) -> FieldPolynomial {
        self.cyclotomic_coset(i).into_iter().fold(FieldPolynomial::one(), |acc, j| {
            let factor = FieldPolynomial::from_coeffs(vec![self.alpha_power(j as i64), FieldElement::ONE]);
            self.poly_mul(&acc, &factor)
        })
    }
}
