//! Compilation of a two-way interactive quantum protocol into the branch
//! form `P = sum_h A_h (x) B_h` over channel transcripts `h`, and the SMP
//! simulation of the induced measurement scenario.
//!
//! Register layout: Alice and Bob each hold a private register; a single
//! channel qubit (initially |0>) is acted on by the sending party's round
//! unitary and then handed over. Acceptance is the final channel qubit
//! measured in |1>. `A_h` collects Alice's round blocks along the transcript
//! `c_0 = 0, c_1..c_{q-1} = h, c_q = 1`, and `B_h` Bob's; unitarity of the
//! rounds caps every block norm at 1.

use super::{BitLedger, Party};
use crate::bipartite::{BipartiteOperator, OperatorDecomposition};
use crate::error::{Error, Result};
use crate::estimator::plan;
use crate::matcore::{ComplexMatrix, SchmidtState};
use crate::norms::balance;
use crate::reduction::build_psi;

/// One protocol round: the sending party applies `unitary` to its private
/// register joined with the channel qubit (channel index fastest).
pub struct ProtocolRound {
    pub party: Party,
    pub unitary: ComplexMatrix,
}

/// A two-way quantum protocol communicating `qubits` qubits in alternating
/// rounds.
pub struct QuantumProtocolSpec {
    qubits: usize,
    dim_a: usize,
    dim_b: usize,
    rounds: Vec<ProtocolRound>,
}

impl QuantumProtocolSpec {
    pub fn new(dim_a: usize, dim_b: usize, rounds: Vec<ProtocolRound>) -> Result<Self> {
        let spec = Self {
            qubits: rounds.len(),
            dim_a,
            dim_b,
            rounds,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn rounds(&self) -> &[ProtocolRound] {
        &self.rounds
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits == 0 {
            return Err(Error::InvalidProtocol("protocol sends no qubits".into()));
        }
        if self.dim_a == 0 || self.dim_b == 0 {
            return Err(Error::InvalidProtocol("party registers must be nonempty".into()));
        }
        for (k, round) in self.rounds.iter().enumerate() {
            if k > 0 && round.party == self.rounds[k - 1].party {
                return Err(Error::InvalidProtocol(format!(
                    "rounds must alternate parties; round {k} repeats"
                )));
            }
            let dim = match round.party {
                Party::Alice => self.dim_a,
                Party::Bob => self.dim_b,
            } * 2;
            let u = &round.unitary;
            if !u.is_square() || u.rows() != dim {
                return Err(Error::InvalidProtocol(format!(
                    "round {k} unitary must be {dim}x{dim}"
                )));
            }
            let gram = u.adjoint().matmul(u)?;
            if gram.max_abs_diff(&ComplexMatrix::identity(dim)) > 1e-9 {
                return Err(Error::InvalidProtocol(format!("round {k} operator is not unitary")));
            }
        }
        Ok(())
    }
}

/// Initial data for a run: local input states and the shared entangled
/// state. The party registers factor as `input (x) entanglement`, so the
/// private operator of the induced measurement scenario is the isometry
/// `xi -> input (x) xi`.
pub struct ProtocolInputs {
    pub input_a: ComplexMatrix,
    pub input_b: ComplexMatrix,
    pub shared: SchmidtState,
}

impl ProtocolInputs {
    fn check(&self, spec: &QuantumProtocolSpec) -> Result<()> {
        for (input, reg, shared_dim) in [
            (&self.input_a, spec.dim_a(), self.shared.dim_a()),
            (&self.input_b, spec.dim_b(), self.shared.dim_b()),
        ] {
            if input.cols() != 1 || input.rows() * shared_dim != reg {
                return Err(Error::ShapeMismatch(format!(
                    "input ({} entries) times shared side ({shared_dim}) must fill the {reg}-dimensional register",
                    input.rows()
                )));
            }
            let norm = input.column_norm();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::NotNormalized { norm });
            }
        }
        Ok(())
    }

    /// `|Phi> = sum_s sqrt(p_s) (x (x) a_s) (x) (y (x) b_s)` on the joint
    /// register `H_A (x) H_B`.
    pub fn initial_state(&self, spec: &QuantumProtocolSpec) -> Result<ComplexMatrix> {
        self.check(spec)?;
        let embedded_a = self.input_a.kron(self.shared.basis_a());
        let embedded_b = self.input_b.kron(self.shared.basis_b());
        let (da, db) = (spec.dim_a(), spec.dim_b());
        let mut out = ComplexMatrix::zeros(da * db, 1);
        for (s, &p) in self.shared.coefficients().iter().enumerate() {
            let w = p.sqrt();
            for i in 0..da {
                let ai = embedded_a.get(i, s) * w;
                for k in 0..db {
                    let v = out.get(i * db + k, 0) + ai * embedded_b.get(k, s);
                    out.set(i * db + k, 0, v);
                }
            }
        }
        Ok(out)
    }

    /// Alice's private isometry `xi -> input_a (x) xi`.
    pub fn isometry_a(&self) -> ComplexMatrix {
        self.input_a.kron(&ComplexMatrix::identity(self.shared.dim_a()))
    }

    pub fn isometry_b(&self) -> ComplexMatrix {
        self.input_b.kron(&ComplexMatrix::identity(self.shared.dim_b()))
    }
}

/// Compiled form of a protocol.
pub struct YaoCompilation {
    /// `(A_h, B_h)` for each transcript `h` in counting order.
    pub terms: Vec<(ComplexMatrix, ComplexMatrix)>,
    /// `P = sum_h A_h (x) B_h` as a bipartite operator.
    pub acceptance: BipartiteOperator,
    /// The same terms as a product decomposition of `P`
    /// (stored as `(A_h, B_h†)` pairs so they sum to `P`).
    pub decomposition: OperatorDecomposition,
}

/// Channel-basis block `<c_out| U |c_in>` acting on the party register.
fn channel_block(u: &ComplexMatrix, dim: usize, c_out: usize, c_in: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |p, q| u.get(p * 2 + c_out, q * 2 + c_in))
}

/// Compiles the protocol into `2^{q-1}` branch terms, one per transcript of
/// the first `q - 1` channel qubits, with the final qubit projected onto
/// the accepting |1>.
pub fn yao_compile(spec: &QuantumProtocolSpec) -> Result<YaoCompilation> {
    spec.validate()?;
    let q = spec.qubits();
    if q > 5 {
        return Err(Error::SizeLimit(format!(
            "compilation enumerates 2^(q-1) transcripts; q = {q} exceeds 5"
        )));
    }
    let (da, db) = (spec.dim_a(), spec.dim_b());
    let mut terms = Vec::with_capacity(1 << (q - 1));
    for h in 0..(1u32 << (q - 1)) {
        // Transcript c_0..c_q: starts in |0>, intermediate bits from h,
        // accepting final bit 1.
        let c_at = |k: usize| -> usize {
            if k == 0 {
                0
            } else if k == q {
                1
            } else {
                ((h >> (k - 1)) & 1) as usize
            }
        };
        let mut a_h = ComplexMatrix::identity(da);
        let mut b_h = ComplexMatrix::identity(db);
        for (k, round) in spec.rounds().iter().enumerate() {
            let (c_in, c_out) = (c_at(k), c_at(k + 1));
            match round.party {
                Party::Alice => {
                    let block = channel_block(&round.unitary, da, c_out, c_in);
                    a_h = block.matmul(&a_h)?;
                }
                Party::Bob => {
                    let block = channel_block(&round.unitary, db, c_out, c_in);
                    b_h = block.matmul(&b_h)?;
                }
            }
        }
        terms.push((a_h, b_h));
    }
    let side = da * db;
    let mut p = ComplexMatrix::zeros(side, side);
    for (a_h, b_h) in &terms {
        p = p.add(&a_h.kron(b_h))?;
    }
    let acceptance = BipartiteOperator::new(da, db, p)?;
    let dec_terms: Vec<_> = terms.iter().map(|(a, b)| (a.clone(), b.adjoint())).collect();
    let decomposition = OperatorDecomposition::new(dec_terms, &acceptance)?;
    Ok(YaoCompilation {
        terms,
        acceptance,
        decomposition,
    })
}

impl YaoCompilation {
    /// `|P |Phi>|^2`: the protocol's acceptance probability on that initial
    /// state.
    pub fn acceptance_probability(&self, phi: &ComplexMatrix) -> Result<f64> {
        let image = self.acceptance.matrix().matmul(phi)?;
        Ok(image.column_norm().powi(2))
    }

    /// The measurement element `P†P` with its expanded product decomposition
    /// `sum_{h,h'} (A_{h'}† A_h) (x) (B_{h'}† B_h)`, of at most
    /// `2^{2(q-1)}` terms.
    pub fn measurement_element(&self) -> Result<(BipartiteOperator, OperatorDecomposition)> {
        let p = self.acceptance.matrix();
        let q_mat = p.adjoint().matmul(p)?;
        let q_op = BipartiteOperator::new(self.acceptance.dim_a(), self.acceptance.dim_b(), q_mat)?;
        let mut terms = Vec::with_capacity(self.terms.len() * self.terms.len());
        for (a_hp, b_hp) in &self.terms {
            for (a_h, b_h) in &self.terms {
                // Term X (x) Y† with X = A_{h'}† A_h and Y = B_h† B_{h'}.
                let x = a_hp.adjoint().matmul(a_h)?;
                let y = b_h.adjoint().matmul(b_hp)?;
                terms.push((x, y));
            }
        }
        let dec = OperatorDecomposition::new(terms, &q_op)?;
        Ok((q_op, dec))
    }
}

/// Simulates the full quantum protocol classically in the SMP model: Yao
/// compilation, the `P†P` measurement scenario with the inputs' isometries,
/// and the shared-coin estimation protocol. The norm cap is the a priori
/// `2^{q-1}` bound, so the ledger depends only on `(epsilon, beta, q)` and
/// never on the shared state's dimension or rank.
pub fn simulate_twoway_quantum(
    spec: &QuantumProtocolSpec,
    inputs: &ProtocolInputs,
    epsilon: f64,
    beta: f64,
    seed: u64,
) -> Result<(f64, BitLedger)> {
    let compiled = yao_compile(spec)?;
    let (_q_op, dec) = compiled.measurement_element()?;
    let balanced = balance(&dec)?;
    let cap = (1u64 << (spec.qubits() - 1)) as f64;
    let p = plan(epsilon, beta, cap.max(1.0), seed)?;
    let pair = build_psi(
        &balanced,
        &inputs.shared,
        &inputs.isometry_a(),
        &inputs.isometry_b(),
        0.0,
    )?;
    super::run_smp(&pair, &p)
}
