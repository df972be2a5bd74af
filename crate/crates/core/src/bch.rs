//! Shortened binary BCH codes.
//!
//! A code is built from its parent narrow-sense BCH code of length 2^m − 1
//! and shortened by fixing leading message bits to zero. The shipped mission
//! link code is (n = 72, k = 56, T = 2) over GF(2^8), shortened by 183 from
//! BCH(255, 239).
//!
//! Bit order: index 0 is the first transmitted bit and the coefficient of the
//! highest power, so position `i` of an `n`-bit word carries `x^(n-1-i)`. The
//! same exponent is used in the parent code because the shortened bits are
//! the high-order zeros.
//!
//! Decoding is the classic hard-decision pipeline: syndromes, Berlekamp–Massey
//! for the error locator, Chien search for its roots, flip, then a mandatory
//! syndrome re-check before anything is reported as corrected.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::BchError;
use crate::gf::{FieldElement, FieldPolynomial, GaloisField};

/// Strength of the mission link code.
pub const LINK_T: usize = 2;
/// Message bits of the mission link code.
pub const LINK_K: usize = 56;
/// Field degree of the mission link code.
pub const LINK_M: u32 = 8;

/// An `n`-bit codeword, index 0 first on the wire.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Codeword(pub Vec<bool>);

impl Codeword {
    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flip(&mut self, pos: usize) {
        self.0[pos] = !self.0[pos];
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DecodeStatus {
    Clean,
    Corrected,
    Failure,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DecodeResult {
    /// Systematic message bits as received (uncorrected on failure).
    pub message: Vec<bool>,
    pub corrected_positions: Vec<usize>,
    pub status: DecodeStatus,
}

impl DecodeResult {
    pub fn is_ok(&self) -> bool {
        self.status != DecodeStatus::Failure
    }
}

/// Chien search found a different number of roots than the locator degree.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct LocatorMismatch {
    pub degree: usize,
    pub roots: usize,
}

#[derive(Clone, Debug)]
pub struct BchCode {
    field: GaloisField,
    n: usize,
    k: usize,
    t: usize,
    generator: FieldPolynomial,
    /// Coefficients of g(x) for x^(r-1) down to x^0.
    feedback: Vec<bool>,
    shorten_by: usize,
}

impl BchCode {
    /// The (72, 56, T=2) mission link code.
    pub fn link_default() -> Self {
        Self::build(LINK_T, LINK_K, LINK_M).expect("link code parameters are feasible")
    }

    /// Construct a T-error-correcting code carrying `k` message bits over
    /// GF(2^m). The generator is the lcm of the minimal polynomials of
    /// α, α², …, α^(2T); n = k + deg g.
    pub fn build(t: usize, k: usize, m: u32) -> Result<Self, BchError> {
        let field = GaloisField::new(m)?;
        Self::with_field(field, t, k)
    }

    pub fn with_field(field: GaloisField, t: usize, k: usize) -> Result<Self, BchError> {
        if t == 0 {
            return Err(BchError::InvalidStrength(t));
        }
        if k == 0 {
            return Err(BchError::EmptyMessage);
        }
        let order = field.order();
        if 2 * t >= order {
            return Err(BchError::Infeasible { k, t, m: field.degree(), n: usize::MAX, max: order });
        }
        // Even powers share a coset with a smaller odd power, so distinct
        // cosets cover everything.
        let mut covered = vec![false; order];
        let mut generator = FieldPolynomial::one();
        for i in 1..=2 * t {
            if covered[i % order] {
                continue;
            }
            for j in field.cyclotomic_coset(i) {
                covered[j] = true;
            }
            generator = field.poly_mul(&generator, &field.minimal_polynomial(i));
        }
        debug_assert!(generator.is_binary());
        let r = generator.degree().unwrap_or(0);
        let n = k + r;
        if n > order {
            return Err(BchError::Infeasible { k, t, m: field.degree(), n, max: order });
        }
        let feedback = (0..r).map(|j| generator.coeff(r - 1 - j).0 == 1).collect();
        Ok(BchCode { n, k, t, generator, feedback, shorten_by: order - n, field })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn m(&self) -> u32 {
        self.field.degree()
    }

    pub fn parity_bits(&self) -> usize {
        self.n - self.k
    }

    pub fn shorten_by(&self) -> usize {
        self.shorten_by
    }

    pub fn generator(&self) -> &FieldPolynomial {
        &self.generator
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    /// Code rate k/n.
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Parent-code exponent of bit position `pos`.
    #[inline]
    pub fn exponent_of(&self, pos: usize) -> usize {
        self.n - 1 - pos
    }

    /// Systematic encoding: c(x) = m(x)·x^r + (m(x)·x^r mod g(x)).
    pub fn encode(&self, message: &[bool]) -> Result<Codeword, BchError> {
        if message.len() != self.k {
            return Err(BchError::LengthMismatch { expected: self.k, got: message.len() });
        }
        let r = self.parity_bits();
        let mut reg = vec![false; r];
        for &bit in message {
            let fb = bit ^ reg.first().copied().unwrap_or(false);
            reg.rotate_left(1);
            if let Some(last) = reg.last_mut() {
                *last = false;
            }
            if fb {
                for (x, &g) in reg.iter_mut().zip(&self.feedback) {
                    *x ^= g;
                }
            }
        }
        let mut bits = Vec::with_capacity(self.n);
        bits.extend_from_slice(message);
        bits.extend_from_slice(&reg);
        Ok(Codeword(bits))
    }

    /// S_i = r(α^i) for i = 1..=2T.
    pub fn compute_syndromes(&self, received: &Codeword) -> Result<Vec<FieldElement>, BchError> {
        if received.len() != self.n {
            return Err(BchError::LengthMismatch { expected: self.n, got: received.len() });
        }
        let mut syn = vec![FieldElement::ZERO; 2 * self.t];
        for (pos, _) in received.0.iter().enumerate().filter(|(_, &b)| b) {
            let e = self.exponent_of(pos) as i64;
            for (i, s) in syn.iter_mut().enumerate() {
                *s += self.field.alpha_power(e * (i as i64 + 1));
            }
        }
        Ok(syn)
    }

    /// Berlekamp–Massey: shortest LFSR (connection polynomial Λ with Λ(0) = 1)
    /// generating the syndrome sequence.
    pub fn berlekamp_massey(&self, syndromes: &[FieldElement]) -> FieldPolynomial {
        berlekamp_massey(&self.field, syndromes)
    }

    /// Positions whose locator X = α^e satisfies Λ(X⁻¹) = 0, in ascending
    /// order. Roots falling in the shortened range are not positions, so they
    /// show up as a count mismatch.
    pub fn chien_search(&self, locator: &FieldPolynomial) -> Result<Vec<usize>, LocatorMismatch> {
        let degree = locator.degree().unwrap_or(0);
        if degree == 0 {
            return Ok(Vec::new());
        }
        let positions = (0..self.n)
            .filter(|&pos| {
                let x = self.field.alpha_power(-(self.exponent_of(pos) as i64));
                self.field.eval_poly(locator, x).is_zero()
            })
            .collect::<Vec<_>>();
        if positions.len() != degree {
            return Err(LocatorMismatch { degree, roots: positions.len() });
        }
        Ok(positions)
    }

    pub fn decode(&self, received: &Codeword) -> Result<DecodeResult, BchError> {
        let syn = self.compute_syndromes(received)?;
        let as_received = |status| DecodeResult {
            message: received.0[..self.k].to_vec(),
            corrected_positions: Vec::new(),
            status,
        };
        if syn.iter().all(|s| s.is_zero()) {
            return Ok(as_received(DecodeStatus::Clean));
        }
        let locator = self.berlekamp_massey(&syn);
        if locator.degree().is_none_or(|d| d == 0 || d > self.t) {
            return Ok(as_received(DecodeStatus::Failure));
        }
        let Ok(positions) = self.chien_search(&locator) else {
            return Ok(as_received(DecodeStatus::Failure));
        };
        let mut fixed = received.clone();
        for &p in &positions {
            fixed.flip(p);
        }
        if self.compute_syndromes(&fixed)?.iter().any(|s| !s.is_zero()) {
            return Ok(as_received(DecodeStatus::Failure));
        }
        Ok(DecodeResult {
            message: fixed.0[..self.k].to_vec(),
            corrected_positions: positions,
            status: DecodeStatus::Corrected,
        })
    }
}

pub fn berlekamp_massey(field: &GaloisField, syndromes: &[FieldElement]) -> FieldPolynomial {
    let mut c = vec![FieldElement::ONE];
    let mut b = vec![FieldElement::ONE];
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut last_d = FieldElement::ONE;
    for n in 0..syndromes.len() {
        let mut d = syndromes[n];
        for i in 1..=l.min(n) {
            d += field.mul(c.get(i).copied().unwrap_or_default(), syndromes[n - i]);
        }
        if d.is_zero() {
            shift += 1;
            continue;
        }
        let coef = field.div(d, last_d).expect("last discrepancy is nonzero");
        let mut next = c.clone();
        if next.len() < b.len() + shift {
            next.resize(b.len() + shift, FieldElement::ZERO);
        }
        for (i, &bi) in b.iter().enumerate() {
            next[i + shift] += field.mul(coef, bi);
        }
        if 2 * l <= n {
            l = n + 1 - l;
            b = c;
            last_d = d;
            shift = 1;
        } else {
            shift += 1;
        }
        c = next;
    }
    FieldPolynomial::from_coeffs(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
        (0..n).map(|_| rng.gen()).collect()
    }

    /// Remainder of a GF(2) polynomial (highest degree first) by `divisor`
    /// (lowest degree first, binary), by schoolbook long division.
    fn gf2_remainder(dividend_msb_first: &[bool], divisor: &FieldPolynomial) -> Vec<bool> {
        let d = divisor.degree().unwrap();
        let mut work = dividend_msb_first.to_vec();
        for i in 0..work.len().saturating_sub(d) {
            if work[i] {
                for j in 0..=d {
                    work[i + j] ^= divisor.coeff(d - j).0 == 1;
                }
            }
        }
        work[work.len() - d..].to_vec()
    }

    #[test]
    fn build_code_dimensions() {
        let c2 = BchCode::build(2, 56, 8).unwrap();
        assert_eq!((c2.n(), c2.k(), c2.parity_bits(), c2.shorten_by()), (72, 56, 16, 183));
        let c1 = BchCode::build(1, 56, 8).unwrap();
        assert_eq!((c1.n(), c1.parity_bits()), (64, 8));
        let c3 = BchCode::build(3, 56, 8).unwrap();
        assert_eq!((c3.n(), c3.parity_bits()), (80, 24));
        let c4 = BchCode::build(4, 56, 8).unwrap();
        assert_eq!((c4.n(), c4.parity_bits()), (88, 32));
    }

    #[test]
    fn generator_degree_matches_coset_oracle() {
        // Brute-force orbit sizes of i under doubling mod 255.
        for t in 1..=4usize {
            let mut reps: Vec<Vec<usize>> = Vec::new();
            for i in 1..=2 * t {
                let mut orbit = vec![i];
                let mut j = (2 * i) % 255;
                while j != i {
                    orbit.push(j);
                    j = (2 * j) % 255;
                }
                orbit.sort();
                if !reps.contains(&orbit) {
                    reps.push(orbit);
                }
            }
            let expected: usize = reps.iter().map(|o| o.len()).sum();
            let code = BchCode::build(t, 56, 8).unwrap();
            assert_eq!(code.parity_bits(), expected, "T = {t}");
            let gf = code.field();
            for i in 1..=2 * t {
                assert!(gf.eval_poly(code.generator(), gf.alpha_power(i as i64)).is_zero());
            }
        }
    }

    #[test]
    fn infeasible_codes_rejected() {
        assert_eq!(BchCode::build(0, 56, 8).unwrap_err(), BchError::InvalidStrength(0));
        assert!(matches!(BchCode::build(2, 56, 6), Err(BchError::Infeasible { .. })));
        assert!(matches!(BchCode::build(2, 56, 4), Err(BchError::Infeasible { .. })));
        assert!(matches!(BchCode::build(2, 240, 8), Err(BchError::Infeasible { .. })));
    }

    #[test]
    fn encode_examples() {
        let code = BchCode::link_default();
        let zero = code.encode(&[false; 56]).unwrap();
        assert!(zero.bits().iter().all(|&b| !b));

        // Last message bit set: m(x) = 1, parity = x^16 mod g(x).
        let mut msg = vec![false; 56];
        msg[55] = true;
        let cw = code.encode(&msg).unwrap();
        let mut dividend = vec![false; 17];
        dividend[0] = true;
        assert_eq!(&cw.bits()[56..], &gf2_remainder(&dividend, code.generator())[..]);

        // First message bit set: m(x) = x^55.
        let mut msg = vec![false; 56];
        msg[0] = true;
        let cw = code.encode(&msg).unwrap();
        let mut dividend = vec![false; 72];
        dividend[0] = true;
        assert_eq!(&cw.bits()[56..], &gf2_remainder(&dividend, code.generator())[..]);

        assert_eq!(code.encode(&[true; 55]).unwrap_err(), BchError::LengthMismatch { expected: 56, got: 55 });
    }

    #[test]
    fn codewords_divisible_by_generator() {
        let code = BchCode::link_default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let msg = random_bits(&mut rng, 56);
            let cw = code.encode(&msg).unwrap();
            assert_eq!(&cw.bits()[..56], &msg[..]);
            assert!(gf2_remainder(cw.bits(), code.generator()).iter().all(|&b| !b));
            assert!(code.compute_syndromes(&cw).unwrap().iter().all(|s| s.is_zero()));
        }
    }

    #[test]
    fn single_error_syndromes() {
        let code = BchCode::link_default();
        let gf = code.field();
        let zero = Codeword(vec![false; 72]);
        assert!(code.compute_syndromes(&zero).unwrap().iter().all(|s| s.is_zero()));
        for pos in 0..72 {
            let mut r = zero.clone();
            r.flip(pos);
            let syn = code.compute_syndromes(&r).unwrap();
            // cross-check against direct polynomial evaluation
            let poly = FieldPolynomial::from_coeffs(
                r.bits().iter().rev().map(|&b| FieldElement(b as u16)).collect::<Vec<_>>(),
            );
            for (i, s) in syn.iter().enumerate() {
                assert_eq!(*s, gf.eval_poly(&poly, gf.alpha_power(i as i64 + 1)));
            }
            assert_eq!(syn[0], gf.alpha_power((71 - pos) as i64));
        }
    }

    #[test]
    fn berlekamp_massey_matches_known_locators() {
        let code = BchCode::link_default();
        let gf = code.field();
        assert_eq!(code.berlekamp_massey(&[FieldElement::ZERO; 4]), FieldPolynomial::one());

        let zero = Codeword(vec![false; 72]);
        for pos in 0..72 {
            let mut r = zero.clone();
            r.flip(pos);
            let loc = code.berlekamp_massey(&code.compute_syndromes(&r).unwrap());
            // single error: Λ(x) = 1 + S1·x
            let s1 = gf.alpha_power((71 - pos) as i64);
            assert_eq!(loc, FieldPolynomial::from_coeffs(vec![FieldElement::ONE, s1]));
        }
        for a in 0..72 {
            for b in a + 1..72 {
                let mut r = zero.clone();
                r.flip(a);
                r.flip(b);
                let loc = code.berlekamp_massey(&code.compute_syndromes(&r).unwrap());
                let xa = gf.alpha_power((71 - a) as i64);
                let xb = gf.alpha_power((71 - b) as i64);
                let expected = FieldPolynomial::from_coeffs(vec![FieldElement::ONE, xa + xb, gf.mul(xa, xb)]);
                assert_eq!(loc, expected, "errors at {a}, {b}");
            }
        }
    }

    #[test]
    fn chien_search_examples() {
        let code = BchCode::link_default();
        assert_eq!(code.chien_search(&FieldPolynomial::one()), Ok(vec![]));
        let mut r = Codeword(vec![false; 72]);
        r.flip(7);
        let loc = code.berlekamp_massey(&code.compute_syndromes(&r).unwrap());
        assert_eq!(code.chien_search(&loc), Ok(vec![7]));
        // A locator whose root sits at parent exponent 100 (a shortened position).
        let gf = code.field();
        let loc = FieldPolynomial::from_coeffs(vec![FieldElement::ONE, gf.alpha_power(100)]);
        assert_eq!(code.chien_search(&loc), Err(LocatorMismatch { degree: 1, roots: 0 }));
    }

    #[test]
    fn decode_all_single_and_double_errors() {
        let code = BchCode::link_default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let msg = random_bits(&mut rng, 56);
        let cw = code.encode(&msg).unwrap();
        let clean = code.decode(&cw).unwrap();
        assert_eq!(clean, DecodeResult { message: msg.clone(), corrected_positions: vec![], status: DecodeStatus::Clean });
        for a in 0..72 {
            let mut r = cw.clone();
            r.flip(a);
            let d = code.decode(&r).unwrap();
            assert_eq!((d.status, d.corrected_positions, &d.message), (DecodeStatus::Corrected, vec![a], &msg));
            for b in a + 1..72 {
                let mut r2 = r.clone();
                r2.flip(b);
                let d = code.decode(&r2).unwrap();
                assert_eq!(d.status, DecodeStatus::Corrected);
                assert_eq!(d.corrected_positions, vec![a, b]);
                assert_eq!(d.message, msg);
            }
        }
    }

    #[test]
    fn triple_errors_never_claim_false_correction() {
        let code = BchCode::link_default();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let msg = random_bits(&mut rng, 56);
        let cw = code.encode(&msg).unwrap();
        let mut failures = 0;
        for _ in 0..10_000 {
            let mut r = cw.clone();
            let mut picked = Vec::new();
            while picked.len() < 3 {
                let p = rng.gen_range(0..72);
                if !picked.contains(&p) {
                    picked.push(p);
                }
            }
            for &p in &picked {
                r.flip(p);
            }
            let d = code.decode(&r).unwrap();
            match d.status {
                DecodeStatus::Failure => failures += 1,
                DecodeStatus::Corrected => {
                    // miscorrection lands on another codeword
                    let mut fixed = r.clone();
                    for &p in &d.corrected_positions {
                        fixed.flip(p);
                    }
                    assert!(code.compute_syndromes(&fixed).unwrap().iter().all(|s| s.is_zero()));
                    assert!(d.corrected_positions.len() <= 2);
                    assert_ne!(d.message, msg);
                }
                DecodeStatus::Clean => panic!("weight-3 error cannot be a codeword (d >= 5)"),
            }
        }
        assert!(failures > 0);
    }

    #[test]
    fn other_strengths_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for t in 1..=4 {
            let code = BchCode::build(t, 56, 8).unwrap();
            for _ in 0..200 {
                let msg = random_bits(&mut rng, 56);
                let mut r = code.encode(&msg).unwrap();
                let mut picked = Vec::new();
                let w = rng.gen_range(0..=t);
                while picked.len() < w {
                    let p = rng.gen_range(0..code.n());
                    if !picked.contains(&p) {
                        picked.push(p);
                    }
                }
                for &p in &picked {
                    r.flip(p);
                }
                let d = code.decode(&r).unwrap();
                assert!(d.is_ok());
                assert_eq!(d.message, msg);
                picked.sort();
                assert_eq!(d.corrected_positions, picked);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1_000))]
            #[test]
            fn encoding_is_linear(a in proptest::collection::vec(any::<bool>(), 56), b in proptest::collection::vec(any::<bool>(), 56)) {
                let code = BchCode::link_default();
                let sum: Vec<bool> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
                let ca = code.encode(&a).unwrap();
                let cb = code.encode(&b).unwrap();
                let xor: Vec<bool> = ca.bits().iter().zip(cb.bits()).map(|(x, y)| x ^ y).collect();
                prop_assert_eq!(xor, code.encode(&sum).unwrap().0);
            }

            #[test]
            fn corrects_up_to_two(msg in proptest::collection::vec(any::<bool>(), 56), e1 in 0usize..72, e2 in 0usize..72) {
                let code = BchCode::link_default();
                let mut r = code.encode(&msg).unwrap();
                r.flip(e1);
                if e2 != e1 {
                    r.flip(e2);
                }
                let d = code.decode(&r).unwrap();
                prop_assert!(d.is_ok());
                prop_assert_eq!(d.message, msg);
            }
        }
    }
}
