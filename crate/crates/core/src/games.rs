//! Measurement games: a shared entangled state with measurement families on
//! each side, simulated classically outcome by outcome. Each joint outcome
//! probability is estimated by the shared-coin protocol at accuracy
//! `eps / (2m)`, the estimate vector is cleaned into a distribution, and one
//! outcome is sampled from shared randomness.

use rand::Rng;

use crate::bipartite::{BipartiteOperator, OperatorDecomposition};
use crate::error::{Error, Result};
use crate::estimator::{derive_seed, plan, SharedCoins};
use crate::harness::BitLedger;
use crate::matcore::{ComplexMatrix, SchmidtState};
use crate::oracle::{exact_probability, Scenario};
use crate::reduction::build_psi;

/// Largest joint outcome count handled per game.
pub const OUTCOME_CAP: usize = 64;

/// One measurement in projective form: an isometric embedding followed by a
/// complete family of projectors, one per labeled outcome.
pub struct Povm {
    isometry: ComplexMatrix,
    outcomes: Vec<(String, ComplexMatrix)>,
}

impl Povm {
    pub fn new(isometry: ComplexMatrix, outcomes: Vec<(String, ComplexMatrix)>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidGame("measurement with no outcomes".into()));
        }
        let dim = isometry.rows();
        let mut completeness = ComplexMatrix::zeros(isometry.cols(), isometry.cols());
        for (label, p) in &outcomes {
            if !p.is_square() || p.rows() != dim {
                return Err(Error::InvalidGame(format!(
                    "projector for outcome {label} must be {dim}x{dim}"
                )));
            }
            if p.max_abs_diff(&p.adjoint()) > 1e-9
                || p.matmul(p)?.max_abs_diff(p) > 1e-9
            {
                return Err(Error::InvalidGame(format!(
                    "outcome {label} is not a projector"
                )));
            }
            completeness = completeness.add(&isometry.adjoint().matmul(p)?.matmul(&isometry)?)?;
        }
        if completeness.max_abs_diff(&ComplexMatrix::identity(isometry.cols())) > 1e-8 {
            return Err(Error::InvalidGame(
                "projectors do not resolve the identity through the isometry".into(),
            ));
        }
        Ok(Self { isometry, outcomes })
    }

    pub fn isometry(&self) -> &ComplexMatrix {
        &self.isometry
    }

    pub fn outcomes(&self) -> &[(String, ComplexMatrix)] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}

/// Shared state plus the two parties' measurement families.
pub struct MeasurementGame {
    state: SchmidtState,
    family_a: Vec<Povm>,
    family_b: Vec<Povm>,
}

impl MeasurementGame {
    pub fn new(state: SchmidtState, family_a: Vec<Povm>, family_b: Vec<Povm>) -> Result<Self> {
        if family_a.is_empty() || family_b.is_empty() {
            return Err(Error::InvalidGame("empty measurement family".into()));
        }
        for (side, family, dim) in [("A", &family_a, state.dim_a()), ("B", &family_b, state.dim_b())] {
            for povm in family {
                if povm.isometry.cols() != dim {
                    return Err(Error::InvalidGame(format!(
                        "side {side} isometry must accept the {dim}-dimensional state space"
                    )));
                }
            }
        }
        Ok(Self { state, family_a, family_b })
    }

    pub fn state(&self) -> &SchmidtState {
        &self.state
    }

    pub fn family_a(&self) -> &[Povm] {
        &self.family_a
    }

    pub fn family_b(&self) -> &[Povm] {
        &self.family_b
    }

    fn pick(&self, choice_a: usize, choice_b: usize) -> Result<(&Povm, &Povm)> {
        let a = self.family_a.get(choice_a).ok_or(Error::UnknownMeasurement {
            index: choice_a,
            len: self.family_a.len(),
        })?;
        let b = self.family_b.get(choice_b).ok_or(Error::UnknownMeasurement {
            index: choice_b,
            len: self.family_b.len(),
        })?;
        Ok((a, b))
    }
}

/// Joint outcome labels and probabilities, in row-major outcome order.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    pub labels: Vec<(String, String)>,
    pub probabilities: Vec<f64>,
}

impl JointDistribution {
    /// l1 distance to another distribution over the same outcomes.
    pub fn l1_distance(&self, other: &[f64]) -> f64 {
        self.probabilities
            .iter()
            .zip(other)
            .map(|(p, q)| (p - q).abs())
            .sum()
    }
}

fn outcome_scenario(
    state: &SchmidtState,
    pa: &Povm,
    pb: &Povm,
    proj_a: &ComplexMatrix,
    proj_b: &ComplexMatrix,
) -> Result<Scenario> {
    let q = BipartiteOperator::new(
        pa.isometry.rows(),
        pb.isometry.rows(),
        proj_a.kron(proj_b),
    )?;
    Scenario::new(q, state.clone(), pa.isometry.clone(), pb.isometry.clone())
}

/// Exact joint outcome distribution `omega(P_A, P_B)` by direct computation.
pub fn oracle_distribution(
    game: &MeasurementGame,
    choice_a: usize,
    choice_b: usize,
) -> Result<JointDistribution> {
    let (pa, pb) = game.pick(choice_a, choice_b)?;
    let mut labels = Vec::new();
    let mut probabilities = Vec::new();
    for (la, proj_a) in pa.outcomes() {
        for (lb, proj_b) in pb.outcomes() {
            let scenario = outcome_scenario(&game.state, pa, pb, proj_a, proj_b)?;
            labels.push((la.clone(), lb.clone()));
            probabilities.push(exact_probability(&scenario)?);
        }
    }
    Ok(JointDistribution { labels, probabilities })
}

/// Result of one simulated game run.
pub struct GameRun {
    pub labels: Vec<(String, String)>,
    /// Raw per-outcome estimates (clamped to [0, 1], before cleanup).
    pub raw_estimates: Vec<f64>,
    /// Cleaned distribution: negatives clipped, renormalized.
    pub cleaned: Vec<f64>,
    /// Index into `labels` of the sampled outcome.
    pub sampled: usize,
    pub ledger: BitLedger,
}

/// Inverse-CDF draw from a cleaned distribution using the run's dedicated
/// shared stream; both parties compute the same index with no messages.
pub fn sample_outcome(cleaned: &[f64], coins: &SharedCoins) -> usize {
    let mut sampler = coins.derive(u64::MAX).stream(0);
    let u: f64 = sampler.gen();
    let mut acc = 0.0;
    for (i, &p) in cleaned.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    cleaned.len() - 1
}

/// Clip-and-renormalize cleanup. Fails when the raw mass dropped below 1/2,
/// which signals that the per-outcome estimates cannot all be sound.
pub fn clean_distribution(raw: &[f64]) -> Result<Vec<f64>> {
    let clipped: Vec<f64> = raw.iter().map(|&p| p.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total < 0.5 {
        return Err(Error::EstimationFailure { total });
    }
    Ok(clipped.iter().map(|&p| p / total).collect())
}

/// Classical simulation of one game round.
///
/// Every outcome pair `(v, v')` yields the single-term decomposition
/// `{(P_A^v, P_B^{v'})}` whose diamond bound is at most 1, so each
/// sub-protocol runs with cap `C = 1` at accuracy `eps / (2m)` and failure
/// share `beta / m`. All sub-protocols derive their coins from one seed, and
/// the final sample is drawn from a dedicated shared stream.
pub fn simulate_game(
    game: &MeasurementGame,
    choice_a: usize,
    choice_b: usize,
    epsilon: f64,
    beta: f64,
    seed: u64,
) -> Result<GameRun> {
    let (pa, pb) = game.pick(choice_a, choice_b)?;
    let m = pa.len() * pb.len();
    if m > OUTCOME_CAP {
        return Err(Error::SizeLimit(format!(
            "game has {m} joint outcomes, cap is {OUTCOME_CAP}"
        )));
    }
    let per_outcome_eps = epsilon / (2.0 * m as f64);
    let per_outcome_beta = beta / m as f64;

    let mut labels = Vec::with_capacity(m);
    let mut raw = Vec::with_capacity(m);
    let mut ledger = BitLedger::default();
    let mut k = 0u64;
    for (la, proj_a) in pa.outcomes() {
        for (lb, proj_b) in pb.outcomes() {
            let q = BipartiteOperator::new(
                pa.isometry.rows(),
                pb.isometry.rows(),
                proj_a.kron(proj_b),
            )?;
            let dec = OperatorDecomposition::new(vec![(proj_a.clone(), proj_b.clone())], &q)?;
            let p = plan(per_outcome_eps, per_outcome_beta, 1.0, derive_seed(seed, k))?;
            let pair = build_psi(&dec, &game.state, pa.isometry(), pb.isometry(), 0.0)?;
            // Run through the message-passing harness so the ledger reflects
            // actually serialized bits.
            let (estimate, run_ledger) = crate::harness::run_smp(&pair, &p)?;
            labels.push((la.clone(), lb.clone()));
            raw.push(estimate);
            ledger.absorb(&run_ledger);
            k += 1;
        }
    }
    let cleaned = clean_distribution(&raw)?;

    // One shared draw selects the outcome; both parties see the same value.
    let coins = SharedCoins::new(seed);
    let sampled = sample_outcome(&cleaned, &coins);
    Ok(GameRun {
        labels,
        raw_estimates: raw,
        cleaned,
        sampled,
        ledger,
    })
}

/// Two-outcome projective measurement of a qubit along the basis rotated by
/// `theta` (state-space angle, half the Bloch angle): convenience for spin
/// games.
pub fn rotated_qubit_measurement(theta: f64, label0: &str, label1: &str) -> Result<Povm> {
    let (s, c) = theta.sin_cos();
    let basis0 = ComplexMatrix::from_real(2, 1, &[c, s])?;
    let basis1 = ComplexMatrix::from_real(2, 1, &[-s, c])?;
    Povm::new(
        ComplexMatrix::identity(2),
        vec![
            (label0.to_string(), basis0.matmul(&basis0.adjoint())?),
            (label1.to_string(), basis1.matmul(&basis1.adjoint())?),
        ],
    )
}

/// The singlet game: the maximally anticorrelated two-qubit state with one
/// rotated measurement per side.
pub fn singlet_game(theta_a: f64, theta_b: f64) -> Result<MeasurementGame> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let state = ComplexMatrix::from_real(4, 1, &[0.0, s, -s, 0.0])?;
    let schmidt = crate::matcore::schmidt_decompose(&state, 2, 2)?;
    MeasurementGame::new(
        schmidt,
        vec![rotated_qubit_measurement(theta_a, "0", "1")?],
        vec![rotated_qubit_measurement(theta_b, "0", "1")?],
    )
}

/// Correlation `E = P(same) - P(different)` of a two-outcome joint
/// distribution.
pub fn correlation(dist: &JointDistribution) -> f64 {
    dist.labels
        .iter()
        .zip(&dist.probabilities)
        .map(|((a, b), p)| if a == b { *p } else { -*p })
        .sum()
}
