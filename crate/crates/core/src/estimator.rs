//! Shared-randomness estimation of `<psi_A|psi_B>` by random hyperplane
//! sign comparison, with an explicit additive error budget.
//!
//! The budget for a target error `eps` is split in thirds: each of the two
//! quantized norm factors may shift the product by at most `eps/3`, and the
//! angle-frequency estimate contributes at most `eps/3` through
//! `|cos(pi f') - cos(pi f)| <= pi |f' - f|`, scaled by the norm cap `C^2`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::reduction::{embed_real, PsiPair};

/// Everything a run needs to be reproducible and correctly budgeted.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationPlan {
    pub epsilon: f64,
    pub beta: f64,
    /// Cap on both vector norms; must hold or the run aborts.
    pub c: f64,
    /// Sign-comparison repetitions: `ceil(ln(2/beta) / (2 eta^2))` with
    /// `eta = epsilon / (3 pi C^2)`.
    pub reps: u64,
    /// Quantization step for transmitted norms: `epsilon / (6 C max(C, 1))`.
    pub norm_quantum: f64,
    pub seed: u64,
}

impl EstimationPlan {
    /// Bits needed for one quantized norm: `ceil(log2(C / step)) + 1`.
    pub fn norm_width(&self) -> u64 {
        (self.c / self.norm_quantum).log2().ceil() as u64 + 1
    }

    /// Nearest-step quantization of a norm.
    pub fn quantize(&self, x: f64) -> f64 {
        self.quantize_index(x) as f64 * self.norm_quantum
    }

    /// Integer index actually transmitted.
    pub fn quantize_index(&self, x: f64) -> u64 {
        (x / self.norm_quantum).round() as u64
    }

    /// Charged bits of one SMP run under this plan: each party sends one
    /// quantized norm plus one sign bit per repetition.
    pub fn charged_bits(&self) -> u64 {
        2 * (self.norm_width() + self.reps)
    }
}

/// Builds a plan for additive error `epsilon` with failure probability
/// `beta`, given the cap `C >= 1` on both vector norms.
pub fn plan(epsilon: f64, beta: f64, c: f64, seed: u64) -> Result<EstimationPlan> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in (0, 1), got {beta}"
        )));
    }
    if c < 1.0 || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("cap C must be >= 1, got {c}")));
    }
    let eta = epsilon / (3.0 * std::f64::consts::PI * c * c);
    let reps = ((2.0 / beta).ln() / (2.0 * eta * eta)).ceil() as u64;
    let norm_quantum = epsilon / (6.0 * c * c.max(1.0));
    Ok(EstimationPlan {
        epsilon,
        beta,
        c,
        reps,
        norm_quantum,
        seed,
    })
}

/// Counter-based shared randomness: the value stream is a pure function of
/// `(key, stream index)`, so simulated parties regenerate identical coins
/// without exchanging a single bit.
///
/// Hyperplane directions are drawn in groups of [`REPS_PER_STREAM`]
/// repetitions per stream (consumed in ascending repetition order), which
/// matches the generator's refill granularity instead of discarding most of
/// a fresh stream's first block on every repetition.
#[derive(Debug, Clone)]
pub struct SharedCoins {
    key: [u8; 32],
}

/// Repetitions served by one stream counter.
pub const REPS_PER_STREAM: u64 = 4;

impl SharedCoins {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed;
        for chunk in key.chunks_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        Self { key }
    }

    /// The generator for a given stream counter.
    pub fn stream(&self, counter: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(counter);
        rng
    }

    /// A statistically independent child (for per-outcome sub-protocols).
    pub fn derive(&self, label: u64) -> SharedCoins {
        let mut rng = self.stream(label);
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        Self { key }
    }
}

/// Deterministic seed derivation for sub-protocols keyed by an index.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    splitmix64(splitmix64(seed ^ label.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Outcome of a hyperplane round, with the informational count of shared
/// random bits consumed (never charged as communication).
#[derive(Debug, Clone, Copy)]
pub struct RoundOutcome {
    pub estimate: f64,
    pub disagreement_freq: f64,
    pub shared_bits_drawn: u64,
}

/// Sign of a dot product against a shared Gaussian direction; zero counts
/// as positive so both parties break the (measure-zero) tie identically.
#[inline]
pub fn sign_bit(dot: f64) -> bool {
    dot < 0.0
}

/// Walks the shared direction streams in repetition order, grouping
/// [`REPS_PER_STREAM`] repetitions per stream counter and counting the bytes
/// consumed. Every consumer must call `begin_rep` with ascending `rep`.
pub(crate) struct DirectionSource {
    coins: SharedCoins,
    group: Option<u64>,
    rng: ChaCha8Rng,
    bytes: u64,
}

impl DirectionSource {
    pub(crate) fn new(coins: SharedCoins) -> Self {
        let rng = coins.stream(0);
        Self {
            coins,
            group: None,
            rng,
            bytes: 0,
        }
    }

    pub(crate) fn begin_rep(&mut self, rep: u64) {
        let group = rep / REPS_PER_STREAM;
        if self.group != Some(group) {
            self.rng = self.coins.stream(group);
            self.group = Some(group);
        }
    }

    pub(crate) fn bits_drawn(&self) -> u64 {
        self.bytes * 8
    }
}

impl RngCore for DirectionSource {
    fn next_u32(&mut self) -> u32 {
        self.bytes += 4;
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.bytes += 8;
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.bytes += dest.len() as u64;
        self.rng.fill_bytes(dest);
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

/// One party's sign bit for repetition `rep`: replays the group prefix of
/// the shared stream (direction draws consume a data-dependent number of
/// words, so positions inside a group are only reachable sequentially) and
/// takes the sign of the dot product against the rep's direction.
pub fn party_sign(coins: &SharedCoins, rep: u64, v: &[f64]) -> bool {
    let mut src = DirectionSource::new(coins.clone());
    let group_start = (rep / REPS_PER_STREAM) * REPS_PER_STREAM;
    let mut dot = 0.0;
    for r in group_start..=rep {
        src.begin_rep(r);
        dot = 0.0;
        for &x in v {
            let g: f64 = src.sample(StandardNormal);
            dot += g * x;
        }
    }
    sign_bit(dot)
}

/// All of one party's sign bits, plus the count of shared random bits the
/// party consumed (identical for both parties since they replay the same
/// streams).
pub fn party_signs(coins: &SharedCoins, reps: u64, v: &[f64]) -> (Vec<bool>, u64) {
    let mut signs = Vec::with_capacity(reps as usize);
    let mut src = DirectionSource::new(coins.clone());
    for rep in 0..reps {
        src.begin_rep(rep);
        let mut dot = 0.0;
        for &x in v {
            let g: f64 = src.sample(StandardNormal);
            dot += g * x;
        }
        signs.push(sign_bit(dot));
    }
    (signs, src.bits_drawn())
}

/// Both parties' sign bits from one pass over the shared streams. The coins
/// are common, so evaluating the two dot products per draw yields exactly
/// the bits each party computes alone (see the equality test in the SMP
/// runner) at half the generation cost.
pub(crate) fn paired_signs(
    coins: &SharedCoins,
    reps: u64,
    va: &[f64],
    vb: &[f64],
) -> (Vec<bool>, Vec<bool>, u64) {
    let mut signs_a = Vec::with_capacity(reps as usize);
    let mut signs_b = Vec::with_capacity(reps as usize);
    let mut src = DirectionSource::new(coins.clone());
    for rep in 0..reps {
        src.begin_rep(rep);
        let mut dot_a = 0.0;
        let mut dot_b = 0.0;
        for (&xa, &xb) in va.iter().zip(vb) {
            let g: f64 = src.sample(StandardNormal);
            dot_a += g * xa;
            dot_b += g * xb;
        }
        signs_a.push(sign_bit(dot_a));
        signs_b.push(sign_bit(dot_b));
    }
    (signs_a, signs_b, src.bits_drawn())
}

/// Referee-side combination: quantized norms times the cosine of the
/// estimated angle. Kept as one function so the message-passing runner and
/// the monolithic estimator agree bit for bit.
pub fn combine_estimate(
    norm_index_a: u64,
    norm_index_b: u64,
    mismatches: u64,
    plan: &EstimationPlan,
) -> (f64, f64) {
    let freq = mismatches as f64 / plan.reps as f64;
    let qa = norm_index_a as f64 * plan.norm_quantum;
    let qb = norm_index_b as f64 * plan.norm_quantum;
    let estimate = qa * qb * (std::f64::consts::PI * freq).cos();
    (estimate, freq)
}

/// Zero-tolerant protocol core shared by [`hyperplane_round`],
/// [`estimate_probability`] and the message-passing runner: identical sign
/// streams, mismatch count and referee combination everywhere, so the
/// monolithic and party-split paths agree bit for bit.
pub(crate) fn protocol_core(va: &[f64], vb: &[f64], plan: &EstimationPlan) -> Result<RoundOutcome> {
    if va.len() != vb.len() || va.is_empty() {
        return Err(Error::ShapeMismatch(
            "hyperplane vectors must have equal nonzero length".into(),
        ));
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (na, nb) = (norm(va), norm(vb));
    let coins = SharedCoins::new(plan.seed);
    let (signs_a, signs_b, shared_bits_drawn) = paired_signs(&coins, plan.reps, va, vb);
    let mismatches = signs_a
        .iter()
        .zip(&signs_b)
        .filter(|(a, b)| a != b)
        .count() as u64;
    let (estimate, disagreement_freq) =
        combine_estimate(plan.quantize_index(na), plan.quantize_index(nb), mismatches, plan);
    Ok(RoundOutcome {
        estimate,
        disagreement_freq,
        shared_bits_drawn,
    })
}

/// Full shared-coin round over two real vectors: `reps` shared Gaussian
/// directions, local signs, and the combined estimate of `<v_A, v_B>`.
/// The angle is undefined for a zero vector, so those are rejected here;
/// the probability estimator tolerates them (a zero psi vector means the
/// exact probability is zero and the quantized norm transmits as 0).
pub fn hyperplane_round(va: &[f64], vb: &[f64], plan: &EstimationPlan) -> Result<RoundOutcome> {
    let zero = |v: &[f64]| v.iter().all(|&x| x == 0.0);
    if zero(va) || zero(vb) {
        return Err(Error::DegenerateVector);
    }
    protocol_core(va, vb, plan)
}

/// Estimate of a scenario's acceptance probability from its psi pair.
/// With probability at least `1 - beta` the result is within `epsilon` of
/// `<psi_A|psi_B>`; it is clamped to `[0, 1]` since the target is a
/// probability.
pub fn estimate_probability(pair: &PsiPair, plan: &EstimationPlan) -> Result<RoundOutcome> {
    let slack = 1.0 + 1e-9;
    if pair.norm_a > plan.c * slack || pair.norm_b > plan.c * slack {
        return Err(Error::CapExceeded {
            norm: pair.norm_a.max(pair.norm_b),
            cap: plan.c,
        });
    }
    let va = embed_real(&pair.psi_a);
    let vb = embed_real(&pair.psi_b);
    let mut out = protocol_core(&va, &vb, plan)?;
    out.estimate = out.estimate.clamp(0.0, 1.0);
    Ok(out)
}
