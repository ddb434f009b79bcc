//! Bipartite operators on a tensor-product space, their realignment into
//! superoperator form, product decompositions, measurement-element checks,
//! and the inner-product operator family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{c64, hermitian_eigenvalues, svd, ComplexMatrix, SVD_RELATIVE_TOL};

/// Residual allowed when checking that a decomposition rebuilds its source.
pub const DECOMPOSITION_TOL: f64 = 1e-8;

/// Operator on `N_A (x) N_B` with the subsystem split recorded.
///
/// Indexing follows the Kronecker convention of [`ComplexMatrix::kron`]:
/// row `(i, k) = i * dim_b + k` with `i` on the A side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteOperator {
    #[serde(rename = "dimA")]
    dim_a: usize,
    #[serde(rename = "dimB")]
    dim_b: usize,
    matrix: ComplexMatrix,
}

impl BipartiteOperator {
    pub fn new(dim_a: usize, dim_b: usize, matrix: ComplexMatrix) -> Result<Self> {
        let side = dim_a * dim_b;
        if !matrix.is_square() || matrix.rows() != side {
            return Err(Error::ShapeMismatch(format!(
                "operator for dims {dim_a}x{dim_b} must be square of side {side}, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { dim_a, dim_b, matrix })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// Side of the full matrix, `dim_a * dim_b`.
    pub fn side(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Entry at bipartite indices `((i, k), (j, l))`.
    #[inline]
    pub fn get(&self, i: usize, k: usize, j: usize, l: usize) -> crate::matcore::C64 {
        self.matrix.get(i * self.dim_b + k, j * self.dim_b + l)
    }
}

/// `true` iff `Q` is Hermitian within `tol` and all eigenvalues lie in
/// `[-tol, 1 + tol]`, i.e. `Q` is an element of a binary POVM `{Q, I - Q}`.
pub fn validate_measurement_element(q: &BipartiteOperator, tol: f64) -> bool {
    let m = q.matrix();
    if m.max_abs_diff(&m.adjoint()) > tol {
        return false;
    }
    match hermitian_eigenvalues(m) {
        Ok(eigs) => eigs.iter().all(|&e| e >= -tol && e <= 1.0 + tol),
        Err(_) => false,
    }
}

/// Realignment of a bipartite operator: entry `Q[(i,k),(j,l)]` moves to
/// `R[(i,j),(k,l)]`, so `R` has shape `dim_a^2 x dim_b^2` with rows indexed
/// by A-side pairs and columns by B-side pairs.
pub fn realign(q: &BipartiteOperator) -> ComplexMatrix {
    let (da, db) = (q.dim_a(), q.dim_b());
    ComplexMatrix::from_fn(da * da, db * db, |r, c| {
        let (i, j) = (r / da, r % da);
        let (k, l) = (c / db, c % db);
        q.get(i, k, j, l)
    })
}

/// Inverse of [`realign`].
pub fn unrealign(r: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<BipartiteOperator> {
    if r.rows() != dim_a * dim_a || r.cols() != dim_b * dim_b {
        return Err(Error::ShapeMismatch(format!(
            "realigned matrix must be {}x{}, got {}x{}",
            dim_a * dim_a,
            dim_b * dim_b,
            r.rows(),
            r.cols()
        )));
    }
    let side = dim_a * dim_b;
    let m = ComplexMatrix::from_fn(side, side, |row, col| {
        let (i, k) = (row / dim_b, row % dim_b);
        let (j, l) = (col / dim_b, col % dim_b);
        r.get(i * dim_a + j, k * dim_b + l)
    });
    BipartiteOperator::new(dim_a, dim_b, m)
}

/// Product decomposition `Q = sum_t A_t (x) B_t†` with `A_t` on the A side
/// and `B_t` on the B side. The `terms` store `(A_t, B_t)`, not `B_t†`.
#[derive(Debug, Clone)]
pub struct OperatorDecomposition {
    dim_a: usize,
    dim_b: usize,
    terms: Vec<(ComplexMatrix, ComplexMatrix)>,
}

impl OperatorDecomposition {
    /// Validates that the terms rebuild `source` within [`DECOMPOSITION_TOL`].
    pub fn new(terms: Vec<(ComplexMatrix, ComplexMatrix)>, source: &BipartiteOperator) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidDecomposition("no terms".into()));
        }
        let (da, db) = (source.dim_a(), source.dim_b());
        for (a, b) in &terms {
            if !a.is_square() || a.rows() != da || !b.is_square() || b.rows() != db {
                return Err(Error::ShapeMismatch(format!(
                    "terms must be {da}x{da} and {db}x{db}"
                )));
            }
        }
        let dec = Self { dim_a: da, dim_b: db, terms };
        let residual = dec.reconstruct().matrix().max_abs_diff(source.matrix());
        if residual > DECOMPOSITION_TOL {
            return Err(Error::InvalidDecomposition(format!(
                "reconstruction residual {residual:.3e} exceeds {DECOMPOSITION_TOL:.0e}"
            )));
        }
        Ok(dec)
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn terms(&self) -> &[(ComplexMatrix, ComplexMatrix)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `sum_t A_t (x) B_t†` as a bipartite operator.
    pub fn reconstruct(&self) -> BipartiteOperator {
        let side = self.dim_a * self.dim_b;
        let mut acc = ComplexMatrix::zeros(side, side);
        for (a, b) in &self.terms {
            acc = acc.add(&a.kron(&b.adjoint())).expect("shapes fixed by constructor");
        }
        BipartiteOperator::new(self.dim_a, self.dim_b, acc).expect("square by construction")
    }

    /// `sum_t A_t† A_t`.
    pub fn gram_a(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim_a, self.dim_a);
        for (a, _) in &self.terms {
            acc = acc.add(&a.adjoint().matmul(a).unwrap()).unwrap();
        }
        acc
    }

    /// `sum_t B_t† B_t`.
    pub fn gram_b(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim_b, self.dim_b);
        for (_, b) in &self.terms {
            acc = acc.add(&b.adjoint().matmul(b).unwrap()).unwrap();
        }
        acc
    }

    /// Rescales every term by the same scalar: `A_t -> c A_t`,
    /// `B_t -> B_t / conj(c)`, which leaves the represented operator fixed.
    pub fn rescale(&self, c: crate::matcore::C64) -> Result<Self> {
        if c.norm() == 0.0 {
            return Err(Error::InvalidParameter("rescale by zero".into()));
        }
        let inv = c64(1.0, 0.0) / c.conj();
        Ok(Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            terms: self
                .terms
                .iter()
                .map(|(a, b)| (a.scale(c), b.scale(inv)))
                .collect(),
        })
    }

    pub(crate) fn from_terms_unchecked(
        dim_a: usize,
        dim_b: usize,
        terms: Vec<(ComplexMatrix, ComplexMatrix)>,
    ) -> Self {
        Self { dim_a, dim_b, terms }
    }
}

/// Canonical decomposition from the SVD of the realigned matrix.
///
/// With `R = sum_s sigma_s u_s v_s†`, the terms are
/// `A_s = sqrt(sigma_s) unvec(u_s)` and `B_s† = sqrt(sigma_s) unvec(conj(v_s))`,
/// giving at most `min(dim_a^2, dim_b^2)` terms; singular values below
/// [`SVD_RELATIVE_TOL`] of the largest are dropped.
pub fn operator_schmidt(q: &BipartiteOperator) -> Result<OperatorDecomposition> {
    let (da, db) = (q.dim_a(), q.dim_b());
    let r = realign(q);
    let dec = svd(&r)?;
    let top = dec.singular_values.first().copied().unwrap_or(0.0);
    let mut terms = Vec::new();
    for (s, &sigma) in dec.singular_values.iter().enumerate() {
        if sigma <= top * SVD_RELATIVE_TOL {
            continue;
        }
        let w = sigma.sqrt();
        let a = ComplexMatrix::from_fn(da, da, |i, j| dec.u.get(i * da + j, s) * w);
        // v_adjoint row s holds v_s†, so its entries are conj(v_s).
        let b_dag = ComplexMatrix::from_fn(db, db, |k, l| dec.v_adjoint.get(s, k * db + l) * w);
        terms.push((a, b_dag.adjoint()));
    }
    if terms.is_empty() {
        // Zero operator: represent it with a single zero term.
        terms.push((ComplexMatrix::zeros(da, da), ComplexMatrix::zeros(db, db)));
    }
    OperatorDecomposition::new(terms, q)
}

/// The diagonal 0/1 operator selecting basis pairs `(x, y)` with odd inner
/// product `x . y = 1 (mod 2)` over n-bit strings; side `4^n`.
pub fn ip_operator(n: usize) -> Result<BipartiteOperator> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if n > 6 {
        return Err(Error::SizeLimit(format!(
            "ip_operator side 4^{n} exceeds the 4^6 guard"
        )));
    }
    let d = 1usize << n;
    let side = d * d;
    let mut m = ComplexMatrix::zeros(side, side);
    for x in 0..d {
        for y in 0..d {
            if (x & y).count_ones() % 2 == 1 {
                let idx = x * d + y;
                m.set(idx, idx, c64(1.0, 0.0));
            }
        }
    }
    BipartiteOperator::new(d, d, m)
}

/// Permutation matrix that regroups `(N_A (x) N_B) (x) (F_A (x) F_B)` into
/// `(N_A (x) F_A) (x) (N_B (x) F_B)`.
pub fn regroup_permutation(dim_a: usize, dim_b: usize, dim_f: usize) -> ComplexMatrix {
    let side = dim_a * dim_b * dim_f * dim_f;
    let mut p = ComplexMatrix::zeros(side, side);
    for i in 0..dim_a {
        for k in 0..dim_b {
            for a in 0..dim_f {
                for b in 0..dim_f {
                    let src = ((i * dim_b + k) * dim_f + a) * dim_f + b;
                    let dst = ((i * dim_f + a) * dim_b + k) * dim_f + b;
                    p.set(dst, src, c64(1.0, 0.0));
                }
            }
        }
    }
    p
}

/// `Q (x) I_{F_A (x) F_B}` with subsystems regrouped as
/// `(N_A (x) F_A, N_B (x) F_B)`, via the stored permutation of
/// [`regroup_permutation`].
pub fn lift_with_identity(q: &BipartiteOperator, dim_f: usize) -> Result<BipartiteOperator> {
    if dim_f == 0 {
        return Err(Error::InvalidParameter("dim_f must be positive".into()));
    }
    if dim_f == 1 {
        return Ok(q.clone());
    }
    let id_ff = ComplexMatrix::identity(dim_f * dim_f);
    let extended = q.matrix().kron(&id_ff);
    let p = regroup_permutation(q.dim_a(), q.dim_b(), dim_f);
    let regrouped = p.matmul(&extended)?.matmul(&p.adjoint())?;
    BipartiteOperator::new(q.dim_a() * dim_f, q.dim_b() * dim_f, regrouped)
}

/// Lifts each term of a decomposition as `(A_t (x) I_F, B_t (x) I_F)`;
/// represents the same operator as [`lift_with_identity`] of the source.
pub fn lift_decomposition(dec: &OperatorDecomposition, dim_f: usize) -> OperatorDecomposition {
    let id = ComplexMatrix::identity(dim_f);
    OperatorDecomposition::from_terms_unchecked(
        dec.dim_a() * dim_f,
        dec.dim_b() * dim_f,
        dec.terms()
            .iter()
            .map(|(a, b)| (a.kron(&id), b.kron(&id)))
            .collect(),
    )
}
