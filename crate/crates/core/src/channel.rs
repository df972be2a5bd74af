//! Binary symmetric channel and the FEC Monte Carlo sweep.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bch::BchCode;
use crate::error::BchError;
use crate::framing::{deframe_with, frame_any, Bitstream, SyncTolerance, HEADER_BITS};

/// The generator behind every seeded draw in this crate.
pub type SimRng = ChaCha8Rng;
/// Recorded with sweep results.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Nominal magnetoelectric link rate.
pub const LINK_RATE_BPS: f64 = 36_000.0;
/// Per-command transmission budget the link is meant to meet.
pub const COMMAND_LATENCY_BUDGET_S: f64 = 1e-3;

/// Time on air for `bits` at `rate_bps`.
pub fn airtime(bits: usize, rate_bps: f64) -> f64 {
    bits as f64 / rate_bps
}

/// SplitMix64 finalizer, used to derive independent sub-seeds.
pub fn mix_seed(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a seed from a master seed and a list of labels.
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(mix_seed(master), |acc, &l| mix_seed(acc ^ mix_seed(l)))
}

pub fn seeded_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Independent per-bit flips with probability `ber`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelModel {
    pub ber: f64,
    pub seed: u64,
}

impl ChannelModel {
    pub fn new(ber: f64, seed: u64) -> Self {
        assert!((0.0..=1.0).contains(&ber), "ber must lie in [0, 1], got {ber}");
        ChannelModel { ber, seed }
    }

    /// Deterministic in (stream, seed): every call starts from `seed`.
    pub fn apply_noise(&self, stream: &Bitstream) -> Bitstream {
        let mut rng = seeded_rng(self.seed);
        let mut bits = stream.0.clone();
        flip_bits(&mut rng, self.ber, &mut bits);
        Bitstream(bits)
    }

    /// A stateful channel whose noise continues across transmissions.
    pub fn into_noisy(self) -> NoisyChannel {
        NoisyChannel { ber: self.ber, rng: seeded_rng(self.seed) }
    }
}

/// Flip each bit with probability `ber`. Returns the number flipped.
pub fn flip_bits<R: Rng>(rng: &mut R, ber: f64, bits: &mut [bool]) -> usize {
    let mut flips = 0;
    for b in bits.iter_mut() {
        if rng.gen::<f64>() < ber {
            *b = !*b;
            flips += 1;
        }
    }
    flips
}

#[derive(Clone, Debug)]
pub struct NoisyChannel {
    ber: f64,
    rng: SimRng,
}

impl NoisyChannel {
    pub fn ber(&self) -> f64 {
        self.ber
    }

    pub fn set_ber(&mut self, ber: f64) {
        assert!((0.0..=1.0).contains(&ber), "ber must lie in [0, 1], got {ber}");
        self.ber = ber;
    }

    pub fn transmit(&mut self, stream: &Bitstream) -> Bitstream {
        let mut bits = stream.0.clone();
        flip_bits(&mut self.rng, self.ber, &mut bits);
        Bitstream(bits)
    }
}

/// Which bits the sweep exposes to noise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NoiseScope {
    /// Whole packet, framing included.
    #[default]
    Packet,
    /// Only the codeword bits; framing arrives clean.
    CodewordOnly,
}

pub const DEFAULT_SWEEP_TRIALS: usize = 10_000;
pub const DEFAULT_SWEEP_BERS: [f64; 8] = [0.001, 0.005, 0.01, 0.02, 0.03, 0.05, 0.07, 0.10];
pub const DEFAULT_SWEEP_TS: [usize; 4] = [1, 2, 3, 4];

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepConfig {
    pub t_values: Vec<usize>,
    pub ber_values: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub k: usize,
    pub m: u32,
    pub scope: NoiseScope,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            t_values: DEFAULT_SWEEP_TS.to_vec(),
            ber_values: DEFAULT_SWEEP_BERS.to_vec(),
            trials: DEFAULT_SWEEP_TRIALS,
            seed: 0,
            k: 56,
            m: 8,
            scope: NoiseScope::Packet,
        }
    }
}

impl SweepConfig {
    /// Seed of cell (T, ber); independent of evaluation order.
    pub fn cell_seed(&self, t: usize, ber: f64) -> u64 {
        derive_seed(self.seed, &[t as u64, ber.to_bits()])
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepCell {
    pub t: usize,
    pub n: usize,
    pub ber: f64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
}

impl SweepCell {
    /// Binomial standard error of the success rate.
    pub fn std_error(&self) -> f64 {
        let p = self.success_rate;
        libm::sqrt(p * (1.0 - p) / self.trials as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EfficiencyRow {
    pub t: usize,
    /// k / (k + 2mT).
    pub formula_efficiency: f64,
    /// k / n of the constructed code; `None` when the code is infeasible.
    pub realized_rate: Option<f64>,
    pub parity_bits: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepResult {
    pub rng: alloc::string::String,
    pub config: SweepConfig,
    pub cells: Vec<SweepCell>,
    pub efficiency: Vec<EfficiencyRow>,
}

impl SweepResult {
    pub fn cell(&self, t: usize, ber: f64) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.t == t && c.ber == ber)
    }
}

/// One end-to-end trial: random message, encode, frame, corrupt, deframe,
/// decode. Success when the first candidate that decodes carries the
/// original message.
pub fn run_trial<R: Rng>(code: &BchCode, ber: f64, scope: NoiseScope, rng: &mut R) -> bool {
    let message: Vec<bool> = (0..code.k()).map(|_| rng.gen()).collect();
    let cw = code.encode(&message).expect("message has k bits");
    let mut bits = frame_any(&cw).into_bits();
    match scope {
        NoiseScope::Packet => flip_bits(rng, ber, &mut bits),
        NoiseScope::CodewordOnly => flip_bits(rng, ber, &mut bits[HEADER_BITS..HEADER_BITS + code.n()]),
    };
    let candidates = deframe_with(&Bitstream(bits), code.n(), SyncTolerance::default());
    for (_, candidate) in candidates {
        let d = code.decode(&candidate).expect("candidate has n bits");
        if d.is_ok() {
            return d.message == message;
        }
    }
    false
}

pub fn run_cell(code: &BchCode, ber: f64, trials: usize, seed: u64, scope: NoiseScope) -> SweepCell {
    let mut rng = seeded_rng(seed);
    let successes = (0..trials).filter(|_| run_trial(code, ber, scope, &mut rng)).count();
    SweepCell {
        t: code.t(),
        n: code.n(),
        ber,
        trials,
        successes,
        success_rate: successes as f64 / trials as f64,
    }
}

/// Serial sweep over every (T, ber) cell, T-major.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult, BchError> {
    assert!(config.trials >= 1, "trials must be at least 1");
    let mut cells = Vec::with_capacity(config.t_values.len() * config.ber_values.len());
    for &t in &config.t_values {
        let code = BchCode::build(t, config.k, config.m)?;
        for &ber in &config.ber_values {
            cells.push(run_cell(&code, ber, config.trials, config.cell_seed(t, ber), config.scope));
        }
    }
    Ok(SweepResult {
        rng: RNG_ALGORITHM.into(),
        config: config.clone(),
        cells,
        efficiency: efficiency_curve(config.k, config.m, &config.t_values),
    })
}

/// Efficiency by the k/(k+2mT) formula next to the rate of the code that is
/// actually built, which has only mT parity bits per coset.
pub fn efficiency_curve(k: usize, m: u32, t_values: &[usize]) -> Vec<EfficiencyRow> {
    t_values
        .iter()
        .map(|&t| {
            let formula_efficiency = k as f64 / (k as f64 + 2.0 * m as f64 * t as f64);
            let (realized_rate, parity_bits) = if t == 0 {
                (Some(1.0), Some(0))
            } else {
                match BchCode::build(t, k, m) {
                    Ok(code) => (Some(code.rate()), Some(code.parity_bits())),
                    Err(_) => (None, None),
                }
            };
            EfficiencyRow { t, formula_efficiency, realized_rate, parity_bits }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// P(X ≤ t) for X ~ Binomial(n, p), by direct summation.
    fn binom_cdf(n: usize, p: f64, t: usize) -> f64 {
        let mut total = 0.0;
        let mut coef = 1.0f64;
        for i in 0..=t.min(n) {
            if i > 0 {
                coef *= (n - i + 1) as f64 / i as f64;
            }
            total += coef * libm::pow(p, i as f64) * libm::pow(1.0 - p, (n - i) as f64);
        }
        total
    }

    #[test]
    fn noise_extremes() {
        let s = Bitstream((0..500).map(|i| i % 3 == 0).collect());
        assert_eq!(ChannelModel::new(0.0, 1).apply_noise(&s), s);
        let flipped = ChannelModel::new(1.0, 1).apply_noise(&s);
        assert!(flipped.0.iter().zip(&s.0).all(|(a, b)| a != b));
    }

    #[test]
    fn flip_count_is_binomial() {
        let s = Bitstream(vec![false; 100_000]);
        let out = ChannelModel::new(0.05, 42).apply_noise(&s);
        let flips = out.0.iter().filter(|&&b| b).count() as f64;
        let sigma = libm::sqrt(100_000.0 * 0.05 * 0.95);
        assert!((flips - 5000.0).abs() < 4.0 * sigma, "{flips}");
    }

    #[test]
    fn noise_is_seeded() {
        let s = Bitstream(vec![false; 1000]);
        let a = ChannelModel::new(0.1, 9).apply_noise(&s);
        assert_eq!(a, ChannelModel::new(0.1, 9).apply_noise(&s));
        assert_ne!(a, ChannelModel::new(0.1, 10).apply_noise(&s));
        assert_eq!(a.len(), 1000);
    }

    #[test]
    fn efficiency_examples() {
        let rows = efficiency_curve(56, 8, &[0, 1, 2, 3]);
        assert_eq!(rows[0].formula_efficiency, 1.0);
        assert!((rows[2].formula_efficiency - 56.0 / 88.0).abs() < 1e-15);
        assert!((rows[2].realized_rate.unwrap() - 56.0 / 72.0).abs() < 1e-15);
        assert!((rows[1].formula_efficiency - 56.0 / 72.0).abs() < 1e-15);
        assert!((rows[3].formula_efficiency - 56.0 / 104.0).abs() < 1e-15);
        assert!(rows.windows(2).all(|w| w[1].formula_efficiency < w[0].formula_efficiency));
        assert_eq!(efficiency_curve(56, 4, &[2])[0].realized_rate, None);
    }

    #[test]
    fn zero_ber_always_succeeds() {
        for t in 1..=4 {
            let code = BchCode::build(t, 56, 8).unwrap();
            let cell = run_cell(&code, 0.0, 300, 5, NoiseScope::Packet);
            assert_eq!(cell.successes, 300);
            assert_eq!(cell.success_rate, 1.0);
        }
    }

    #[test]
    fn codeword_only_matches_binomial_oracle() {
        // With clean framing, success = at most T codeword errors.
        for (t, ber) in [(1usize, 0.02), (2, 0.03), (3, 0.05)] {
            let code = BchCode::build(t, 56, 8).unwrap();
            let trials = 4000;
            let cell = run_cell(&code, ber, trials, 77, NoiseScope::CodewordOnly);
            let p = binom_cdf(code.n(), ber, t);
            let sigma = libm::sqrt(p * (1.0 - p) / trials as f64);
            assert!((cell.success_rate - p).abs() < 4.0 * sigma, "T={t} ber={ber}: {} vs {p}", cell.success_rate);
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = SweepConfig { t_values: vec![1, 2], ber_values: vec![0.0, 0.02], trials: 200, seed: 3, ..Default::default() };
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cells.len(), 4);
        assert_eq!(a.cell(2, 0.0).unwrap().success_rate, 1.0);
        assert_eq!(a.rng, "chacha8");
    }

    #[test]
    fn airtime_of_a_packet() {
        let t = airtime(100, LINK_RATE_BPS);
        assert!((t - 100.0 / 36_000.0).abs() < 1e-15);
        assert!(t > COMMAND_LATENCY_BUDGET_S);
    }
}
