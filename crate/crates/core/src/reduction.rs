//! Builds the locally-computable vector pair whose inner product equals the
//! acceptance probability of a measurement scenario, plus the complex-to-real
//! embedding consumed by the hyperplane estimator.
//!
//! Index flattening is fixed as `(i, j, t) -> (i * r + j) * T + t` over the
//! Schmidt indices `i, j` and decomposition terms `t`, so both parties build
//! identically indexed vectors without communicating.

use crate::bipartite::OperatorDecomposition;
use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, SchmidtState, C64};

/// The two locally prepared vectors with their norms.
#[derive(Debug, Clone)]
pub struct PsiPair {
    pub psi_a: Vec<C64>,
    pub psi_b: Vec<C64>,
    pub norm_a: f64,
    pub norm_b: f64,
}

impl PsiPair {
    fn from_vectors(psi_a: Vec<C64>, psi_b: Vec<C64>) -> Self {
        let norm = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let norm_a = norm(&psi_a);
        let norm_b = norm(&psi_b);
        Self { psi_a, psi_b, norm_a, norm_b }
    }

    /// `<psi_A | psi_B>`, conjugate-linear on the A side.
    pub fn inner(&self) -> C64 {
        self.psi_a
            .iter()
            .zip(&self.psi_b)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn len(&self) -> usize {
        self.psi_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi_a.is_empty()
    }
}

fn check_isometry(u: &ComplexMatrix) -> Result<()> {
    let gram = u.adjoint().matmul(u)?;
    let dev = gram.max_abs_diff(&ComplexMatrix::identity(u.cols()));
    if dev > 1e-9 {
        return Err(Error::NotIsometry { deviation: dev });
    }
    Ok(())
}

/// Builds the pair for an entangled scenario.
///
/// With `|i_A> = U a_i` and `|i_B> = V b_i` over the Schmidt vectors of the
/// shared state:
///
/// ```text
/// psi_A[(i,j,t)] = sqrt(p_i^alpha p_j^(1-alpha)) <j_A| A_t† |i_A>
/// psi_B[(i,j,t)] = sqrt(p_i^(1-alpha) p_j^alpha) <i_B| B_t† |j_B>
/// ```
///
/// For every alpha the inner product equals `<E'| Q |E'>` with
/// `|E'> = (U (x) V)|E>`; alpha = 0 is the variant whose norms are capped by
/// the balanced decomposition value.
pub fn build_psi(
    decomp: &OperatorDecomposition,
    schmidt: &SchmidtState,
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    alpha: f64,
) -> Result<PsiPair> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    if u.rows() != decomp.dim_a() || u.cols() != schmidt.dim_a() {
        return Err(Error::ShapeMismatch(format!(
            "isometry U must be {}x{}, got {}x{}",
            decomp.dim_a(),
            schmidt.dim_a(),
            u.rows(),
            u.cols()
        )));
    }
    if v.rows() != decomp.dim_b() || v.cols() != schmidt.dim_b() {
        return Err(Error::ShapeMismatch(format!(
            "isometry V must be {}x{}, got {}x{}",
            decomp.dim_b(),
            schmidt.dim_b(),
            v.rows(),
            v.cols()
        )));
    }
    check_isometry(u)?;
    check_isometry(v)?;

    let p = schmidt.coefficients();
    let r = schmidt.rank();
    let t_count = decomp.len();
    // Embedded Schmidt vectors: columns of W_A = U * basis_A, W_B = V * basis_B.
    let w_a = u.matmul(schmidt.basis_a())?;
    let w_b = v.matmul(schmidt.basis_b())?;

    let mut psi_a = vec![C64::default(); r * r * t_count];
    let mut psi_b = vec![C64::default(); r * r * t_count];
    for (t, (a_t, b_t)) in decomp.terms().iter().enumerate() {
        // K[j, i] = <j_A| A_t† |i_A>, L[i, j] = <i_B| B_t† |j_B>.
        let k = w_a.adjoint().matmul(&a_t.adjoint())?.matmul(&w_a)?;
        let l = w_b.adjoint().matmul(&b_t.adjoint())?.matmul(&w_b)?;
        for i in 0..r {
            for j in 0..r {
                let idx = (i * r + j) * t_count + t;
                let wa = p[i].powf(alpha) * p[j].powf(1.0 - alpha);
                let wb = p[i].powf(1.0 - alpha) * p[j].powf(alpha);
                psi_a[idx] = k.get(j, i) * wa.sqrt();
                psi_b[idx] = l.get(i, j) * wb.sqrt();
            }
        }
    }
    Ok(PsiPair::from_vectors(psi_a, psi_b))
}

/// Product-state variant: `psi_A[t] = <phi_A| A_t† |phi_A>` and likewise on
/// the B side, so `<psi_A|psi_B> = <phi_A (x) phi_B| Q |phi_A (x) phi_B>`.
pub fn build_psi_product(
    decomp: &OperatorDecomposition,
    phi_a: &ComplexMatrix,
    phi_b: &ComplexMatrix,
) -> Result<PsiPair> {
    for (phi, dim) in [(phi_a, decomp.dim_a()), (phi_b, decomp.dim_b())] {
        if phi.cols() != 1 || phi.rows() != dim {
            return Err(Error::ShapeMismatch(format!(
                "local state must be a {dim}x1 column"
            )));
        }
        let norm = phi.column_norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { norm });
        }
    }
    let mut psi_a = Vec::with_capacity(decomp.len());
    let mut psi_b = Vec::with_capacity(decomp.len());
    for (a_t, b_t) in decomp.terms() {
        psi_a.push(phi_a.inner(&a_t.adjoint().matmul(phi_a)?)?);
        psi_b.push(phi_b.inner(&b_t.adjoint().matmul(phi_b)?)?);
    }
    Ok(PsiPair::from_vectors(psi_a, psi_b))
}

/// Real embedding `[Re(psi); Im(psi)]`: doubles the length, preserves norms,
/// and turns `Re<x|y>` into the real dot product of the embeddings.
pub fn embed_real(psi: &[C64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * psi.len());
    out.extend(psi.iter().map(|z| z.re));
    out.extend(psi.iter().map(|z| z.im));
    out
}
