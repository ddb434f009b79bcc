//! Seeded random generators for states, unitaries, isometries and
//! measurement elements. Test suites and the CLI share these so that every
//! randomized run is reproducible from a single seed.

use rand::Rng;

use crate::bipartite::BipartiteOperator;
use crate::matcore::{c64, schmidt_decompose, ComplexMatrix, SchmidtState};

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    use rand_distr::StandardNormal;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the usual
/// phase fix on the R diagonal.
pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    random_isometry(n, n, rng)
}

/// Isometry `rows x cols` (`cols <= rows`) with `U†U = I`.
pub fn random_isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    assert!(cols <= rows, "an isometry cannot widen the space");
    let g = ginibre(rows, cols, rng);
    // Gram-Schmidt is plenty stable at desk scale and keeps this module
    // independent of the SVD backend.
    let mut basis: Vec<Vec<crate::matcore::C64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v = g.column(j);
        for b in &basis {
            let proj: crate::matcore::C64 =
                b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= proj * bi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut v {
            *z /= norm;
        }
        // Phase fix: make the largest entry real non-negative.
        let pivot = v
            .iter()
            .cloned()
            .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
            .unwrap();
        if pivot.norm() > 0.0 {
            let phase = pivot / pivot.norm();
            for z in &mut v {
                *z /= phase;
            }
        }
        basis.push(v);
    }
    ComplexMatrix::from_fn(rows, cols, |i, j| basis[j][i])
}

/// Unit column of the given dimension.
pub fn random_state(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let v = ginibre(dim, 1, rng);
    let n = v.column_norm();
    v.scale(c64(1.0 / n, 0.0))
}

/// Random bipartite pure state, returned in Schmidt form.
pub fn random_entangled_state(dim_a: usize, dim_b: usize, rng: &mut impl Rng) -> SchmidtState {
    let state = random_state(dim_a * dim_b, rng);
    schmidt_decompose(&state, dim_a, dim_b).expect("random state is unit by construction")
}

/// Bipartite pure state with exactly the requested Schmidt rank.
pub fn random_state_of_rank(
    dim_a: usize,
    dim_b: usize,
    rank: usize,
    rng: &mut impl Rng,
) -> SchmidtState {
    assert!(rank >= 1 && rank <= dim_a.min(dim_b));
    let ua = random_isometry(dim_a, rank, rng);
    let ub = random_isometry(dim_b, rank, rng);
    let mut weights: Vec<f64> = (0..rank).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    weights.sort_by(|a, b| b.partial_cmp(a).unwrap());
    SchmidtState::new(weights, ua, ub).expect("constructed orthonormal bases")
}

/// Random PSD operator with eigenvalues drawn uniformly from [0, 1]:
/// a valid measurement element of a binary POVM.
pub fn random_measurement_element(
    dim_a: usize,
    dim_b: usize,
    rng: &mut impl Rng,
) -> BipartiteOperator {
    let side = dim_a * dim_b;
    let v = haar_unitary(side, rng);
    let diag: Vec<crate::matcore::C64> =
        (0..side).map(|_| c64(rng.gen_range(0.0..1.0), 0.0)).collect();
    let m = v
        .matmul(&ComplexMatrix::diagonal(&diag))
        .unwrap()
        .matmul(&v.adjoint())
        .unwrap();
    // Symmetrize away the last few ulps so Hermiticity checks are exact-ish.
    let m = m.add(&m.adjoint()).unwrap().scale(c64(0.5, 0.0));
    BipartiteOperator::new(dim_a, dim_b, m).unwrap()
}

/// Random projector of the given rank.
pub fn random_projector(dim: usize, rank: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let u = random_isometry(dim, rank, rng);
    u.matmul(&u.adjoint()).unwrap()
}
