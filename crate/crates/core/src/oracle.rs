//! Exact quantum-mechanical evaluation of measurement scenarios and
//! interactive protocols: the ground truth every simulation is checked
//! against. Dense state vectors only, capped at total dimension 2^12.

use crate::bipartite::{validate_measurement_element, BipartiteOperator};
use crate::error::{Error, Result};
use crate::harness::{ProtocolInputs, QuantumProtocolSpec};
use crate::matcore::{c64, ComplexMatrix, SchmidtState, C64};

/// Hard cap on the joint dimension handled by dense evaluation.
pub const DIMENSION_CAP: usize = 1 << 12;

/// A measurement scenario: element `Q`, shared state `E` in Schmidt form,
/// and the parties' local isometric embeddings into the two sides of `Q`.
pub struct Scenario {
    q: BipartiteOperator,
    e: SchmidtState,
    u: ComplexMatrix,
    v: ComplexMatrix,
}

impl Scenario {
    pub fn new(
        q: BipartiteOperator,
        e: SchmidtState,
        u: ComplexMatrix,
        v: ComplexMatrix,
    ) -> Result<Self> {
        if q.side() > DIMENSION_CAP {
            return Err(Error::SizeLimit(format!(
                "scenario dimension {} exceeds {DIMENSION_CAP}",
                q.side()
            )));
        }
        if !validate_measurement_element(&q, 1e-8) {
            return Err(Error::InvalidScenario(
                "operator is not a measurement element (Hermitian with spectrum in [0, 1])".into(),
            ));
        }
        if u.rows() != q.dim_a() || u.cols() != e.dim_a() {
            return Err(Error::InvalidScenario(format!(
                "isometry U must map the {}-dimensional A side of the state into the {}-dimensional A side of Q",
                e.dim_a(),
                q.dim_a()
            )));
        }
        if v.rows() != q.dim_b() || v.cols() != e.dim_b() {
            return Err(Error::InvalidScenario(format!(
                "isometry V must map the {}-dimensional B side of the state into the {}-dimensional B side of Q",
                e.dim_b(),
                q.dim_b()
            )));
        }
        for w in [&u, &v] {
            let gram = w.adjoint().matmul(w)?;
            let dev = gram.max_abs_diff(&ComplexMatrix::identity(w.cols()));
            if dev > 1e-9 {
                return Err(Error::NotIsometry { deviation: dev });
            }
        }
        Ok(Self { q, e, u, v })
    }

    pub fn q(&self) -> &BipartiteOperator {
        &self.q
    }

    pub fn e(&self) -> &SchmidtState {
        &self.e
    }

    pub fn u(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    /// The embedded state `(U (x) V)|E>` on `Q`'s space.
    pub fn embedded_state(&self) -> Result<ComplexMatrix> {
        let (da, db) = (self.q.dim_a(), self.q.dim_b());
        let wa = self.u.matmul(self.e.basis_a())?;
        let wb = self.v.matmul(self.e.basis_b())?;
        let mut out = ComplexMatrix::zeros(da * db, 1);
        for (s, &p) in self.e.coefficients().iter().enumerate() {
            let w = p.sqrt();
            for i in 0..da {
                let ai = wa.get(i, s) * w;
                if ai == c64(0.0, 0.0) {
                    continue;
                }
                for k in 0..db {
                    let v = out.get(i * db + k, 0) + ai * wb.get(k, s);
                    out.set(i * db + k, 0, v);
                }
            }
        }
        Ok(out)
    }
}

/// `<E'| Q |E'>` with `|E'> = (U (x) V)|E>`: the exact probability that the
/// binary measurement `{Q, I - Q}` accepts. Real within 1e-9 and clamped to
/// `[0, 1]` after checking the excess.
pub fn exact_probability(scenario: &Scenario) -> Result<f64> {
    let state = scenario.embedded_state()?;
    let image = scenario.q.matrix().matmul(&state)?;
    let p = state.inner(&image)?;
    if p.im.abs() > 1e-9 {
        return Err(Error::InvalidScenario(format!(
            "probability has imaginary part {:.3e}",
            p.im
        )));
    }
    if p.re < -1e-9 || p.re > 1.0 + 1e-9 {
        return Err(Error::InvalidScenario(format!(
            "probability {} outside [0, 1] beyond tolerance",
            p.re
        )));
    }
    Ok(p.re.clamp(0.0, 1.0))
}

/// Direct state-vector simulation of a two-way interactive protocol:
/// applies every round unitary to the joint `(A, B, channel)` register and
/// measures the channel qubit, accepting on |1>.
pub fn exact_acceptance_twoway(spec: &QuantumProtocolSpec, inputs: &ProtocolInputs) -> Result<f64> {
    spec.validate()?;
    let (da, db) = (spec.dim_a(), spec.dim_b());
    let total = da * db * 2;
    if total > DIMENSION_CAP {
        return Err(Error::SizeLimit(format!(
            "protocol state dimension {total} exceeds {DIMENSION_CAP}"
        )));
    }
    let phi = inputs.initial_state(spec)?;
    // Joint state indexed (a, b, c) with the channel fastest, channel in |0>.
    let mut state = vec![c64(0.0, 0.0); total];
    for a in 0..da {
        for b in 0..db {
            state[(a * db + b) * 2] = phi.get(a * db + b, 0);
        }
    }
    for round in spec.rounds() {
        let u = &round.unitary;
        match round.party {
            crate::harness::Party::Alice => {
                // U acts on (a, c); b is a spectator.
                for b in 0..db {
                    let mut sub = vec![c64(0.0, 0.0); da * 2];
                    for a in 0..da {
                        for ch in 0..2 {
                            sub[a * 2 + ch] = state[(a * db + b) * 2 + ch];
                        }
                    }
                    let moved = apply_square(u, &sub);
                    for a in 0..da {
                        for ch in 0..2 {
                            state[(a * db + b) * 2 + ch] = moved[a * 2 + ch];
                        }
                    }
                }
            }
            crate::harness::Party::Bob => {
                for a in 0..da {
                    let mut sub = vec![c64(0.0, 0.0); db * 2];
                    for b in 0..db {
                        for ch in 0..2 {
                            sub[b * 2 + ch] = state[(a * db + b) * 2 + ch];
                        }
                    }
                    let moved = apply_square(u, &sub);
                    for b in 0..db {
                        for ch in 0..2 {
                            state[(a * db + b) * 2 + ch] = moved[b * 2 + ch];
                        }
                    }
                }
            }
        }
    }
    let accept: f64 = (0..da * db).map(|i| state[i * 2 + 1].norm_sqr()).sum();
    Ok(accept.clamp(0.0, 1.0))
}

fn apply_square(u: &ComplexMatrix, v: &[C64]) -> Vec<C64> {
    let n = u.rows();
    let mut out = vec![c64(0.0, 0.0); n];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut acc = c64(0.0, 0.0);
        for (j, x) in v.iter().enumerate() {
            acc += u.get(i, j) * x;
        }
        *slot = acc;
    }
    out
}
