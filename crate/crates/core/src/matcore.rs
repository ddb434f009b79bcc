//! Dense complex linear algebra: matrices, Kronecker products, partial
//! traces, singular-value based norms and Schmidt decompositions.
//!
//! Everything downstream (bipartite operators, norms, the estimator) is
//! built on [`ComplexMatrix`], a row-major dense matrix of `Complex<f64>`.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Complex number with f64 components, the only scalar used in this crate.
pub type C64 = Complex<f64>;

/// Shorthand constructor.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Relative cutoff under which singular values are treated as zero.
pub const SVD_RELATIVE_TOL: f64 = 1e-12;

/// Absolute cutoff under which Schmidt coefficients are pruned.
pub const SCHMIDT_PRUNE_TOL: f64 = 1e-12;

/// Dense row-major complex matrix.
///
/// Column vectors are represented as `n x 1` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major data, validating shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ShapeMismatch(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        let m = Self { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_parts(rows, cols, vec![c64(0.0, 0.0); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, c64(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_parts(rows, cols, data)
    }

    pub fn from_real(rows: usize, cols: usize, reals: &[f64]) -> Result<Self> {
        Self::new(rows, cols, reals.iter().map(|&r| c64(r, 0.0)).collect())
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Computational basis column |i> of the given dimension.
    pub fn basis_column(dim: usize, index: usize) -> Self {
        let mut m = Self::zeros(dim, 1);
        m.set(index, 0, c64(1.0, 0.0));
        m
    }

    pub fn column_from(entries: &[C64]) -> Self {
        Self::from_parts(entries.len(), 1, entries.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidMatrix("non-finite entry".into()))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self::from_parts(
            self.rows,
            self.cols,
            self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self::from_parts(
            self.rows,
            self.cols,
            self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_parts(
            self.rows,
            self.cols,
            self.data.iter().map(|z| z * factor).collect(),
        )
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == c64(0.0, 0.0) {
                    continue;
                }
                let row_base = i * other.cols;
                for j in 0..other.cols {
                    out.data[row_base + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        Self::from_parts(
            self.rows,
            self.cols,
            self.data.iter().map(|z| z.conj()).collect(),
        )
    }

    pub fn trace(&self) -> Result<C64> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "trace requires a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok((0..self.rows).map(|i| self.get(i, i)).sum())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry-wise modulus of the difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Kronecker product, with the left factor indexing the slow (major) axis:
    /// `(A (x) B)[(i*rB + k), (j*cB + l)] = A[i,j] B[k,l]`.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == c64(0.0, 0.0) {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Euclidean norm of a column vector.
    pub fn column_norm(&self) -> f64 {
        self.frobenius_norm()
    }

    /// Extracts column `j` as a plain vector.
    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Inner product `<self|other>` of two column vectors (conjugate-linear
    /// in the first argument).
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.cols != 1 || other.cols != 1 || self.rows != other.rows {
            return Err(Error::ShapeMismatch("inner product needs equal-length columns".into()));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    fn to_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    fn from_dmatrix(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

/// JSON encoding shared by all file formats:
/// `{"rows": r, "cols": c, "data": [[re, im], ...]}` row-major.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            rows: usize,
            cols: usize,
            data: Vec<[f64; 2]>,
            #[serde(skip)]
            _p: std::marker::PhantomData<&'a ()>,
        }
        let repr = Repr {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| [z.re, z.im]).collect(),
            _p: std::marker::PhantomData,
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            rows: usize,
            cols: usize,
            data: Vec<[f64; 2]>,
        }
        let repr = Repr::deserialize(deserializer)?;
        ComplexMatrix::new(
            repr.rows,
            repr.cols,
            repr.data.iter().map(|&[re, im]| c64(re, im)).collect(),
        )
        .map_err(D::Error::custom)
    }
}

/// Result of a singular value decomposition `M = U diag(s) V†`.
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v_adjoint: ComplexMatrix,
}

/// Full SVD with singular values in descending order.
pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    m.check_finite()?;
    let d = m.to_dmatrix();
    let svd = d.svd(true, true);
    let u = svd
        .u
        .as_ref()
        .ok_or_else(|| Error::InvalidMatrix("SVD failed to produce U".into()))?;
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::InvalidMatrix("SVD failed to produce V\u{2020}".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let k = order.len();
    let u_sorted = ComplexMatrix::from_fn(u.nrows(), k, |i, j| u[(i, order[j])]);
    let vt_sorted = ComplexMatrix::from_fn(k, v_t.ncols(), |i, j| v_t[(order[i], j)]);
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    Ok(Svd {
        u: u_sorted,
        singular_values: values,
        v_adjoint: vt_sorted,
    })
}

/// Singular values only, descending.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    m.check_finite()?;
    let mut sv: Vec<f64> = m.to_dmatrix().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(sv)
}

/// Largest singular value.
pub fn spectral_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Sum of singular values. Requires a square matrix.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "trace norm requires a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(singular_values(m)?.iter().sum())
}

/// Eigenvalues of a Hermitian matrix, descending. The caller is responsible
/// for Hermiticity; the Hermitian part `(M + M†)/2` is what gets decomposed.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch("eigenvalues require a square matrix".into()));
    }
    m.check_finite()?;
    let h = m.add(&m.adjoint())?.scale(c64(0.5, 0.0));
    let eig = nalgebra::SymmetricEigen::new(h.to_dmatrix());
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(vals)
}

/// Matrix inverse, or `None` when singular.
pub fn try_inverse(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    if !m.is_square() {
        return None;
    }
    m.to_dmatrix().try_inverse().map(|inv| ComplexMatrix::from_dmatrix(&inv))
}

/// Kronecker product of a list of factors, left to right.
pub fn tensor(factors: &[&ComplexMatrix]) -> Result<ComplexMatrix> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("tensor of an empty list".into()))?;
    let mut acc = (*first).clone();
    for f in rest {
        acc = acc.kron(f);
    }
    Ok(acc)
}

/// Partial trace of an operator on a multipartite space.
///
/// `dims` are the subsystem dimensions (slow to fast index), `keep` the
/// ascending list of subsystem indices retained; all others are traced out
/// by summing their diagonal blocks.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch("partial trace requires a square matrix".into()));
    }
    let total: usize = dims.iter().product();
    if total != m.rows() {
        return Err(Error::ShapeMismatch(format!(
            "subsystem dimensions multiply to {total}, matrix side is {}",
            m.rows()
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidParameter(
            "keep must be strictly ascending subsystem indices".into(),
        ));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kept_dim: usize = keep.iter().map(|&i| dims[i]).product();
    let traced_dim: usize = traced.iter().map(|&i| dims[i]).product();

    // Flat index from a per-subsystem multi-index, slow-to-fast.
    let flat = |kept_idx: usize, traced_idx: usize| -> usize {
        let mut digits = vec![0usize; dims.len()];
        let mut rem = kept_idx;
        for &s in keep.iter().rev() {
            digits[s] = rem % dims[s];
            rem /= dims[s];
        }
        let mut rem = traced_idx;
        for &s in traced.iter().rev() {
            digits[s] = rem % dims[s];
            rem /= dims[s];
        }
        digits.iter().zip(dims).fold(0, |acc, (&d, &dim)| acc * dim + d)
    };

    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for r in 0..kept_dim {
        for c in 0..kept_dim {
            let mut sum = c64(0.0, 0.0);
            for t in 0..traced_dim {
                sum += m.get(flat(r, t), flat(c, t));
            }
            out.set(r, c, sum);
        }
    }
    Ok(out)
}

/// Schmidt decomposition of a bipartite pure state:
/// coefficients `p_i` (descending, pruned, summing to 1) with paired
/// orthonormal bases so that `state = sum_i sqrt(p_i) a_i (x) b_i`.
#[derive(Debug, Clone)]
pub struct SchmidtState {
    coefficients: Vec<f64>,
    basis_a: ComplexMatrix,
    basis_b: ComplexMatrix,
}

impl SchmidtState {
    /// Validates the invariants: weights sum to 1 within 1e-9, descending
    /// and positive, and both bases orthonormal within 1e-9.
    pub fn new(coefficients: Vec<f64>, basis_a: ComplexMatrix, basis_b: ComplexMatrix) -> Result<Self> {
        if coefficients.is_empty()
            || basis_a.cols() != coefficients.len()
            || basis_b.cols() != coefficients.len()
        {
            return Err(Error::ShapeMismatch(
                "basis column counts must match the number of Schmidt coefficients".into(),
            ));
        }
        let sum: f64 = coefficients.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "Schmidt coefficients sum to {sum}, expected 1"
            )));
        }
        if coefficients.windows(2).any(|w| w[0] < w[1]) || coefficients.iter().any(|&p| p <= 0.0) {
            return Err(Error::InvalidParameter(
                "Schmidt coefficients must be positive and sorted descending".into(),
            ));
        }
        for basis in [&basis_a, &basis_b] {
            let gram = basis.adjoint().matmul(basis)?;
            let dev = gram.max_abs_diff(&ComplexMatrix::identity(gram.rows()));
            if dev > 1e-9 {
                return Err(Error::NotIsometry { deviation: dev });
            }
        }
        Ok(Self {
            coefficients,
            basis_a,
            basis_b,
        })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn basis_a(&self) -> &ComplexMatrix {
        &self.basis_a
    }

    pub fn basis_b(&self) -> &ComplexMatrix {
        &self.basis_b
    }

    /// Number of retained Schmidt terms.
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// Dimension of the A-side space the state lives on.
    pub fn dim_a(&self) -> usize {
        self.basis_a.rows()
    }

    pub fn dim_b(&self) -> usize {
        self.basis_b.rows()
    }

    /// Rebuilds the state column `sum_i sqrt(p_i) a_i (x) b_i`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let da = self.dim_a();
        let db = self.dim_b();
        let mut out = ComplexMatrix::zeros(da * db, 1);
        for (s, &p) in self.coefficients.iter().enumerate() {
            let w = p.sqrt();
            for i in 0..da {
                let ai = self.basis_a.get(i, s);
                for k in 0..db {
                    let v = out.get(i * db + k, 0) + ai * self.basis_b.get(k, s) * w;
                    out.set(i * db + k, 0, v);
                }
            }
        }
        out
    }
}

/// Schmidt-decomposes a unit column on a `dim_a x dim_b` bipartite space.
///
/// Coefficients below [`SCHMIDT_PRUNE_TOL`] are pruned. The global phase of
/// each pair is fixed by making the first nonzero entry of the A-side vector
/// real non-negative (the B-side vector absorbs the opposite phase, keeping
/// every product `a_i (x) b_i` unchanged), so fixtures are reproducible.
pub fn schmidt_decompose(state: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<SchmidtState> {
    if state.cols() != 1 || state.rows() != dim_a * dim_b {
        return Err(Error::ShapeMismatch(format!(
            "state must be a {}x1 column for dims {dim_a}x{dim_b}",
            dim_a * dim_b
        )));
    }
    let norm = state.column_norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm });
    }
    // Coefficient matrix C[i, k] = state[(i, k)].
    let coeff = ComplexMatrix::from_fn(dim_a, dim_b, |i, k| state.get(i * dim_b + k, 0));
    let dec = svd(&coeff)?;

    let mut coefficients = Vec::new();
    let mut cols_a: Vec<Vec<C64>> = Vec::new();
    let mut cols_b: Vec<Vec<C64>> = Vec::new();
    for (s, &sigma) in dec.singular_values.iter().enumerate() {
        let p = sigma * sigma;
        if p < SCHMIDT_PRUNE_TOL {
            continue;
        }
        let mut a: Vec<C64> = (0..dim_a).map(|i| dec.u.get(i, s)).collect();
        // state = sum_s sigma_s u_s (x) conj(v_s); v_adjoint rows are v_s†.
        let mut b: Vec<C64> = (0..dim_b).map(|k| dec.v_adjoint.get(s, k)).collect();
        let scale = a
            .iter()
            .find(|z| z.norm() > 1e-12)
            .map(|z| z / z.norm())
            .unwrap_or_else(|| c64(1.0, 0.0));
        for z in &mut a {
            *z /= scale;
        }
        for z in &mut b {
            *z *= scale;
        }
        coefficients.push(p);
        cols_a.push(a);
        cols_b.push(b);
    }
    let r = coefficients.len();
    let basis_a = ComplexMatrix::from_fn(dim_a, r, |i, s| cols_a[s][i]);
    let basis_b = ComplexMatrix::from_fn(dim_b, r, |i, s| cols_b[s][i]);
    SchmidtState::new(coefficients, basis_a, basis_b)
}

#[cfg(test)]
pub(crate) mod svd_oracle {
    //! Test-only one-sided Jacobi SVD, independent of the nalgebra path the
    //! implementation uses.

    use super::{c64, ComplexMatrix, C64};

    /// Singular values by one-sided Jacobi column orthogonalization,
    /// descending.
    pub fn jacobi_singular_values(m: &ComplexMatrix) -> Vec<f64> {
        let rows = m.rows();
        let cols = m.cols();
        let mut c: Vec<Vec<C64>> = (0..cols).map(|j| m.column(j)).collect();
        for _sweep in 0..60 {
            let mut off = 0.0f64;
            for p in 0..cols {
                for q in (p + 1)..cols {
                    let a: f64 = c[p].iter().map(|z| z.norm_sqr()).sum();
                    let b: f64 = c[q].iter().map(|z| z.norm_sqr()).sum();
                    let g: C64 = c[p].iter().zip(&c[q]).map(|(x, y)| x.conj() * y).sum();
                    let gn = g.norm();
                    if gn <= 1e-15 * (a * b).sqrt().max(1e-300) {
                        continue;
                    }
                    off = off.max(gn);
                    let phi = g / gn;
                    // Rotation angle for the real 2x2 Gram [[a, |g|], [|g|, b]].
                    let theta = 0.5 * (2.0 * gn).atan2(a - b);
                    let (s, co) = theta.sin_cos();
                    for i in 0..rows {
                        let xp = c[p][i];
                        let xq = c[q][i];
                        c[p][i] = xp * co + xq * phi.conj() * s;
                        c[q][i] = -xp * phi * s + xq * co;
                    }
                }
            }
            if off < 1e-14 {
                break;
            }
        }
        let mut sv: Vec<f64> = c
            .iter()
            .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sv
    }

    /// Convenience: random complex matrix for property loops.
    pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl rand::Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }
}
