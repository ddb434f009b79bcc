//! The diamond norm on bipartite operators: upper bounds from product
//! decompositions (with a mixing-matrix search), lower bounds from the dual
//! trace-norm ratio, the product-state norm, and the matrix Cauchy-Schwarz
//! check.
//!
//! Upper bounds are reported strictly as bounds: the decomposition search is
//! a heuristic and nothing here certifies global optimality.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bipartite::{operator_schmidt, BipartiteOperator, OperatorDecomposition};
use crate::error::{Error, Result};
use crate::matcore::{c64, spectral_norm, trace_norm, try_inverse, ComplexMatrix};
use crate::reduction::build_psi_product;
use crate::sampling;

/// Tolerance for norm identities (weak duality, tensor law) accumulated
/// over SVDs of side <= 64 matrices.
pub const NORM_TOL: f64 = 1e-6;

/// Upper and lower diamond-norm bounds with their certificates.
pub struct NormBound {
    pub upper: f64,
    pub lower: f64,
    /// Decomposition realizing `upper`.
    pub witness_decomposition: OperatorDecomposition,
    /// Dual witness realizing `lower`, when a lower bound was computed.
    pub witness_rho: Option<ComplexMatrix>,
}

impl NormBound {
    pub fn new(
        upper: f64,
        lower: f64,
        witness_decomposition: OperatorDecomposition,
        witness_rho: Option<ComplexMatrix>,
    ) -> Result<Self> {
        if lower > upper + NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "lower bound {lower} exceeds upper bound {upper}"
            )));
        }
        Ok(Self {
            upper,
            lower,
            witness_decomposition,
            witness_rho,
        })
    }
}

/// `sqrt(|sum A_t†A_t|) * sqrt(|sum B_t†B_t|)` for a decomposition,
/// evaluated after balancing (which never changes the value or the
/// represented operator).
pub fn diamond_upper_from(decomp: &OperatorDecomposition) -> Result<f64> {
    if decomp.is_empty() {
        return Err(Error::InvalidDecomposition("no terms".into()));
    }
    let ga = spectral_norm(&decomp.gram_a())?;
    let gb = spectral_norm(&decomp.gram_b())?;
    Ok(ga.sqrt() * gb.sqrt())
}

/// Rescales all terms by the single scalar `c = (|G_B| / |G_A|)^(1/4)` so
/// the two Gram factors equalize; the represented operator is unchanged and
/// so is the bound, but the balanced form caps both psi-vector norms by the
/// same constant.
pub fn balance(decomp: &OperatorDecomposition) -> Result<OperatorDecomposition> {
    let ga = spectral_norm(&decomp.gram_a())?;
    let gb = spectral_norm(&decomp.gram_b())?;
    if ga == 0.0 || gb == 0.0 {
        return Ok(decomp.clone());
    }
    let c = (gb / ga).powf(0.25);
    decomp.rescale(c64(c, 0.0))
}

/// Best (smallest) [`diamond_upper_from`] found by mixing the canonical
/// operator-Schmidt terms with an invertible matrix `M`
/// (`A'_s = sum_t M_st A_t`, `B'_s = sum_t (M^-†)_st B_t`, which preserves
/// the represented operator), searched by coordinate descent with `budget`
/// random restarts. Deterministic given `seed`.
pub fn diamond_upper_optimize(
    q: &BipartiteOperator,
    budget: usize,
    seed: u64,
) -> Result<(f64, OperatorDecomposition)> {
    let base = operator_schmidt(q)?;
    let mut best_value = diamond_upper_from(&base)?;
    let mut best_mix: Option<Vec<(ComplexMatrix, ComplexMatrix)>> = None;
    let t = base.len();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for restart in 0..=budget {
        let mut mix = if restart == 0 {
            ComplexMatrix::identity(t)
        } else {
            let noise = sampling::ginibre(t, t, &mut rng).scale(c64(0.15, 0.0));
            match ComplexMatrix::identity(t).add(&noise) {
                Ok(m) => m,
                Err(_) => continue,
            }
        };
        let Some(mut current) = mixed_value(&base, &mix)? else {
            continue;
        };
        let mut step = 0.25;
        for _sweep in 0..4 {
            let mut improved = false;
            for s in 0..t {
                for u in 0..t {
                    for delta in [c64(step, 0.0), c64(-step, 0.0), c64(0.0, step), c64(0.0, -step)] {
                        let mut trial = mix.clone();
                        trial.set(s, u, trial.get(s, u) + delta);
                        if let Some(v) = mixed_value(&base, &trial)? {
                            if v < current - 1e-12 {
                                current = v;
                                mix = trial;
                                improved = true;
                            }
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if current < best_value {
            best_value = current;
            best_mix = Some(mixed_terms(&base, &mix).expect("value computed above"));
        }
    }

    let decomp = match best_mix {
        Some(terms) => OperatorDecomposition::new(terms, q)?,
        None => base,
    };
    let balanced = balance(&decomp)?;
    // Report the evaluated bound of what we return; best_value was computed
    // from the same terms, so this is a consistency recomputation.
    let value = diamond_upper_from(&balanced)?;
    Ok((value.min(best_value), balanced))
}

fn mixed_terms(
    base: &OperatorDecomposition,
    mix: &ComplexMatrix,
) -> Option<Vec<(ComplexMatrix, ComplexMatrix)>> {
    let inv_adj = try_inverse(mix)?.adjoint();
    let t = base.len();
    let (da, db) = (base.dim_a(), base.dim_b());
    let mut terms = Vec::with_capacity(t);
    for s in 0..t {
        let mut a = ComplexMatrix::zeros(da, da);
        let mut b = ComplexMatrix::zeros(db, db);
        for (u, (au, bu)) in base.terms().iter().enumerate() {
            a = a.add(&au.scale(mix.get(s, u))).ok()?;
            // (M^-†)_su = conj(inv(M)[u, s]).
            b = b.add(&bu.scale(inv_adj.get(s, u))).ok()?;
        }
        terms.push((a, b));
    }
    Some(terms)
}

fn mixed_value(base: &OperatorDecomposition, mix: &ComplexMatrix) -> Result<Option<f64>> {
    let Some(terms) = mixed_terms(base, mix) else {
        return Ok(None);
    };
    let dec = OperatorDecomposition::from_terms_unchecked(base.dim_a(), base.dim_b(), terms);
    Ok(Some(diamond_upper_from(&dec)?))
}

/// Applies `(T(Q) (x) I_G)` to `rho`, where `T(Q)(X) = sum_t A_t X B_t†` and
/// `rho` lives on `N (x) G` with `N` indexed slow.
fn apply_superop_extended(
    decomp: &OperatorDecomposition,
    rho: &ComplexMatrix,
    dim_n: usize,
    dim_g: usize,
) -> Result<ComplexMatrix> {
    let side = dim_n * dim_g;
    if rho.rows() != side || rho.cols() != side {
        return Err(Error::ShapeMismatch(format!(
            "witness must be {side}x{side}"
        )));
    }
    let mut out = ComplexMatrix::zeros(side, side);
    for (a, b) in decomp.terms() {
        let b_dag = b.adjoint();
        for g in 0..dim_g {
            for h in 0..dim_g {
                // Block X[i, j] = rho[(i, g), (j, h)].
                let block =
                    ComplexMatrix::from_fn(dim_n, dim_n, |i, j| rho.get(i * dim_g + g, j * dim_g + h));
                let y = a.matmul(&block)?.matmul(&b_dag)?;
                for i in 0..dim_n {
                    for j in 0..dim_n {
                        let r = i * dim_g + g;
                        let c = j * dim_g + h;
                        out.set(r, c, out.get(r, c) + y.get(i, j));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Dual lower bound: the best trace-norm ratio
/// `|（T(Q) (x) I)(rho)|_tr / |rho|_tr` over the supplied witnesses.
/// Returns the bound and the index of the witness achieving it.
/// Requires `dim_a == dim_b` (the superoperator picture identifies the two
/// sides) and each witness on `N (x) G` with `dim G = dim N`.
pub fn diamond_lower(
    q: &BipartiteOperator,
    witnesses: &[ComplexMatrix],
) -> Result<(f64, usize)> {
    if q.dim_a() != q.dim_b() {
        return Err(Error::ShapeMismatch(
            "the dual bound needs equal subsystem dimensions".into(),
        ));
    }
    if witnesses.is_empty() {
        return Err(Error::InvalidWitness("no witnesses supplied".into()));
    }
    let d = q.dim_a();
    let decomp = operator_schmidt(q)?;
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0;
    for (idx, rho) in witnesses.iter().enumerate() {
        let denom = trace_norm(rho)?;
        if denom <= 0.0 {
            return Err(Error::InvalidWitness(format!("witness {idx} is zero")));
        }
        let image = apply_superop_extended(&decomp, rho, d, d)?;
        let ratio = trace_norm(&image)? / denom;
        if ratio > best {
            best = ratio;
            best_idx = idx;
        }
    }
    Ok((best, best_idx))
}

/// The flat witness `sum_{x,y} |x><y| (x) I_G` on `N (x) G`, `dim G = dim N`.
pub fn flat_witness(dim: usize) -> ComplexMatrix {
    let ones = ComplexMatrix::from_fn(dim, dim, |_, _| c64(1.0, 0.0));
    ones.kron(&ComplexMatrix::identity(dim))
}

/// Maximally entangled pure witness `|omega><omega|` with
/// `|omega> = sum_i |ii> / sqrt(d)`.
pub fn entangled_witness(dim: usize) -> ComplexMatrix {
    let mut omega = ComplexMatrix::zeros(dim * dim, 1);
    let w = 1.0 / (dim as f64).sqrt();
    for i in 0..dim {
        omega.set(i * dim + i, 0, c64(w, 0.0));
    }
    omega.matmul(&omega.adjoint()).expect("column times row")
}

/// The standard witness family: the flat witness, the maximally entangled
/// witness, and `budget` random pure states each pushed through one step of
/// eigenvector ascent on the trace-norm ratio.
pub fn standard_witnesses(
    q: &BipartiteOperator,
    budget: usize,
    seed: u64,
) -> Result<Vec<ComplexMatrix>> {
    if q.dim_a() != q.dim_b() {
        return Err(Error::ShapeMismatch(
            "the dual bound needs equal subsystem dimensions".into(),
        ));
    }
    let d = q.dim_a();
    let decomp = operator_schmidt(q)?;
    let mut out = vec![flat_witness(d), entangled_witness(d)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..budget {
        let phi = sampling::random_state(d * d, &mut rng);
        out.push(ascend_once(&decomp, &phi, d)?);
    }
    Ok(out)
}

/// One ascent step: from `rho = |phi><phi|`, take the trace-norm subgradient
/// `G = U V†` of the image, pull it back through the superoperator, and move
/// `phi` toward the top eigenvector of the pulled-back Hermitian form.
fn ascend_once(
    decomp: &OperatorDecomposition,
    phi: &ComplexMatrix,
    d: usize,
) -> Result<ComplexMatrix> {
    let rho = phi.matmul(&phi.adjoint())?;
    let image = apply_superop_extended(decomp, &rho, d, d)?;
    let dec = crate::matcore::svd(&image)?;
    let sign = dec.u.matmul(&dec.v_adjoint)?;
    // K = sum_t (A_t (x) I)† G (B_t (x) I); ascent direction (K + K†) phi.
    let id = ComplexMatrix::identity(d);
    let mut k = ComplexMatrix::zeros(d * d, d * d);
    for (a, b) in decomp.terms() {
        let a_ext = a.kron(&id);
        let b_ext = b.kron(&id);
        k = k.add(&a_ext.adjoint().matmul(&sign)?.matmul(&b_ext)?)?;
    }
    let herm = k.add(&k.adjoint())?;
    let moved = herm.matmul(phi)?;
    let norm = moved.column_norm();
    let candidate = if norm > 1e-12 {
        moved.scale(c64(1.0 / norm, 0.0))
    } else {
        phi.clone()
    };
    // Keep whichever of the two pure witnesses scores better.
    let score = |v: &ComplexMatrix| -> Result<f64> {
        let r = v.matmul(&v.adjoint())?;
        trace_norm(&apply_superop_extended(decomp, &r, d, d)?)
    };
    let out = if score(&candidate)? >= score(phi)? {
        candidate
    } else {
        phi.clone()
    };
    out.matmul(&out.adjoint())
}

/// Product-state upper bound `|psi_A| * |psi_B|` for the vectors built from
/// this decomposition and the given local states.
pub fn otimes_norm_upper(
    decomp: &OperatorDecomposition,
    phi_a: &ComplexMatrix,
    phi_b: &ComplexMatrix,
) -> Result<f64> {
    let pair = build_psi_product(decomp, phi_a, phi_b)?;
    Ok(pair.norm_a * pair.norm_b)
}

/// Matrix Cauchy-Schwarz: `|sum A_t (x) B_t†| <= sqrt(|sum A_t†A_t|) *
/// sqrt(|sum B_t†B_t|)`, within 1e-8.
pub fn jocic_check(decomp: &OperatorDecomposition) -> Result<bool> {
    let lhs = spectral_norm(decomp.reconstruct().matrix())?;
    let rhs = diamond_upper_from(decomp)?;
    Ok(lhs <= rhs + 1e-8)
}

/// Runs both bounds with the standard witness family.
pub fn bound(q: &BipartiteOperator, budget: usize, seed: u64) -> Result<NormBound> {
    let (upper, decomp) = diamond_upper_optimize(q, budget, seed)?;
    if q.dim_a() == q.dim_b() {
        let witnesses = standard_witnesses(q, budget, seed)?;
        let (lower, idx) = diamond_lower(q, &witnesses)?;
        NormBound::new(upper, lower, decomp, Some(witnesses[idx].clone()))
    } else {
        NormBound::new(upper, 0.0, decomp, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartite::{ip_operator, lift_decomposition, validate_measurement_element};
    use crate::matcore::svd_oracle::{jacobi_singular_values, random_matrix};
    use crate::matcore::{schmidt_decompose, singular_values};
    use rand::Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_bipartite(da: usize, db: usize, rng: &mut impl Rng) -> BipartiteOperator {
        BipartiteOperator::new(da, db, random_matrix(da * db, da * db, rng)).unwrap()
    }

    #[test]
    fn single_product_term_value() {
        // |A| = 2 and |B| = 3 by explicit diagonals.
        let a = ComplexMatrix::diagonal(&[c64(2.0, 0.0), c64(1.0, 0.0)]);
        let b = ComplexMatrix::diagonal(&[c64(3.0, 0.0), c64(0.5, 0.0)]);
        let q = BipartiteOperator::new(2, 2, a.kron(&b.adjoint())).unwrap();
        let dec = OperatorDecomposition::new(vec![(a, b)], &q).unwrap();
        assert!((diamond_upper_from(&dec).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn identity_pair_gives_one() {
        let d = 3;
        let q = BipartiteOperator::new(d, d, ComplexMatrix::identity(d * d)).unwrap();
        let dec = OperatorDecomposition::new(
            vec![(ComplexMatrix::identity(d), ComplexMatrix::identity(d))],
            &q,
        )
        .unwrap();
        assert!((diamond_upper_from(&dec).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ip2_bounds_are_ordered_and_exact() {
        // Both routes on IP_2; the canonical decomposition evaluates to 4/3
        // (enumerable by hand from the realignment singular vectors) and the
        // flat dual witness to |mask|_tr / 4 = 1.
        let q = ip_operator(2).unwrap();
        let dec = operator_schmidt(&q).unwrap();
        let upper = diamond_upper_from(&dec).unwrap();
        assert!((upper - 4.0 / 3.0).abs() < 1e-9, "upper = {upper}");
        let (lower, _) = diamond_lower(&q, &[flat_witness(4)]).unwrap();
        assert!((lower - 1.0).abs() < 1e-9, "lower = {lower}");
        assert!(lower <= upper + NORM_TOL);
    }

    #[test]
    fn flat_witness_value_matches_mask_trace_norm() {
        // For the odd-inner-product operator the dual ratio with the flat
        // witness collapses to |M|_tr / 2^n with M the 0/1 mask; check the
        // implementation against that reduction with oracle singular values.
        for n in 1..=3usize {
            let d = 1 << n;
            let q = ip_operator(n).unwrap();
            let (lower, _) = diamond_lower(&q, &[flat_witness(d)]).unwrap();
            let mask = ComplexMatrix::from_fn(d, d, |x, y| {
                if (x & y).count_ones() % 2 == 1 {
                    c64(1.0, 0.0)
                } else {
                    c64(0.0, 0.0)
                }
            });
            let expect: f64 = jacobi_singular_values(&mask).iter().sum::<f64>() / d as f64;
            assert!(
                (lower - expect).abs() < 1e-9,
                "n={n}: {lower} vs {expect}"
            );
        }
    }

    #[test]
    fn optimize_recovers_tensor_norm_on_products() {
        let mut rng = rng(101);
        for _ in 0..20 {
            let a = random_matrix(2, 2, &mut rng);
            let b = random_matrix(2, 2, &mut rng);
            let q = BipartiteOperator::new(2, 2, a.kron(&b)).unwrap();
            let (upper, _) = diamond_upper_optimize(&q, 2, 7).unwrap();
            let expect = singular_values(&a).unwrap()[0] * singular_values(&b).unwrap()[0];
            assert!((upper - expect).abs() < 1e-8, "{upper} vs {expect}");
        }
    }

    #[test]
    fn measurement_element_upper_below_squared_dimension() {
        let mut rng = rng(103);
        for _ in 0..10 {
            let q = sampling::random_measurement_element(2, 2, &mut rng);
            assert!(validate_measurement_element(&q, 1e-8));
            let (upper, _) = diamond_upper_optimize(&q, 1, 5).unwrap();
            let k = q.side() as f64;
            assert!(upper <= k * k + NORM_TOL);
        }
    }

    #[test]
    fn optimize_never_beats_schmidt_start_upward() {
        let mut rng = rng(107);
        for _ in 0..50 {
            let q = random_bipartite(2, 2, &mut rng);
            let start = diamond_upper_from(&operator_schmidt(&q).unwrap()).unwrap();
            let (opt, dec) = diamond_upper_optimize(&q, 2, 11).unwrap();
            assert!(opt <= start + 1e-10);
            assert!(dec.reconstruct().matrix().max_abs_diff(q.matrix()) < 1e-8);
        }
    }

    #[test]
    fn identity_superoperator_has_unit_ratio() {
        let d = 2;
        let q = BipartiteOperator::new(d, d, ComplexMatrix::identity(d * d)).unwrap();
        // Density-matrix witness.
        let mut rng = rng(109);
        let phi = sampling::random_state(d * d, &mut rng);
        let rho = phi.matmul(&phi.adjoint()).unwrap();
        let (lower, _) = diamond_lower(&q, &[rho]).unwrap();
        assert!((lower - 1.0).abs() < 1e-9);
    }

    #[test]
    fn weak_duality_on_random_operators() {
        let mut rng = rng(113);
        for trial in 0..50 {
            let d = rng.gen_range(2..4);
            let q = random_bipartite(d, d, &mut rng);
            let (upper, _) = diamond_upper_optimize(&q, 1, trial).unwrap();
            let witnesses = standard_witnesses(&q, 2, trial).unwrap();
            let (lower, _) = diamond_lower(&q, &witnesses).unwrap();
            assert!(
                lower <= upper + NORM_TOL,
                "trial {trial}: lower {lower} > upper {upper}"
            );
        }
    }

    #[test]
    fn zero_witness_is_rejected() {
        let q = ip_operator(1).unwrap();
        let zero = ComplexMatrix::zeros(4, 4);
        assert!(matches!(
            diamond_lower(&q, &[zero]),
            Err(Error::InvalidWitness(_))
        ));
    }

    #[test]
    fn balancing_is_invariant_and_preserves_operator() {
        let mut rng = rng(127);
        for _ in 0..20 {
            let q = random_bipartite(2, 3, &mut rng);
            let dec = operator_schmidt(&q).unwrap();
            let v0 = diamond_upper_from(&dec).unwrap();
            // Any single-scalar rescale leaves the value fixed.
            let c = c64(rng.gen_range(0.2..2.0), rng.gen_range(-1.0..1.0));
            let rescaled = dec.rescale(c).unwrap();
            let v1 = diamond_upper_from(&rescaled).unwrap();
            assert!((v0 - v1).abs() < 1e-10);
            assert!(rescaled.reconstruct().matrix().max_abs_diff(q.matrix()) < 1e-8);

            let balanced = balance(&dec).unwrap();
            let ga = spectral_norm(&balanced.gram_a()).unwrap();
            let gb = spectral_norm(&balanced.gram_b()).unwrap();
            assert!((ga - gb).abs() < 1e-8 * ga.max(1.0));
            assert!((diamond_upper_from(&balanced).unwrap() - v0).abs() < 1e-10);
        }
    }

    #[test]
    fn lifted_decomposition_value_is_stable() {
        let mut rng = rng(131);
        let q = random_bipartite(2, 2, &mut rng);
        let dec = operator_schmidt(&q).unwrap();
        let v0 = diamond_upper_from(&dec).unwrap();
        for dim_f in [1, 2, 3] {
            let lifted = lift_decomposition(&dec, dim_f);
            let v = diamond_upper_from(&lifted).unwrap();
            assert!((v - v0).abs() < 1e-10, "dim_f={dim_f}: {v} vs {v0}");
        }
    }

    #[test]
    fn otimes_single_identity_term_is_one() {
        let d = 2;
        let q = BipartiteOperator::new(d, d, ComplexMatrix::identity(d * d)).unwrap();
        let dec = OperatorDecomposition::new(
            vec![(ComplexMatrix::identity(d), ComplexMatrix::identity(d))],
            &q,
        )
        .unwrap();
        let mut rng = rng(137);
        let pa = sampling::random_state(d, &mut rng);
        let pb = sampling::random_state(d, &mut rng);
        assert!((otimes_norm_upper(&dec, &pa, &pb).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn otimes_is_below_diamond_upper() {
        let mut rng = rng(139);
        for _ in 0..50 {
            let q = random_bipartite(2, 2, &mut rng);
            let dec = operator_schmidt(&q).unwrap();
            let pa = sampling::random_state(2, &mut rng);
            let pb = sampling::random_state(2, &mut rng);
            let votimes = otimes_norm_upper(&dec, &pa, &pb).unwrap();
            let vdiamond = diamond_upper_from(&dec).unwrap();
            assert!(votimes <= vdiamond + 1e-9);
        }
    }

    #[test]
    fn swap_test_acceptance_stays_constant_in_length() {
        // Acceptance element (I + SWAP) / 2 on d (x) d with equal local
        // fingerprints; the product-state bound must not grow with d.
        let mut rng = rng(149);
        let mut values = Vec::new();
        for d in [2usize, 4, 8] {
            let mut terms = vec![(
                ComplexMatrix::identity(d).scale(c64(0.5, 0.0)),
                ComplexMatrix::identity(d),
            )];
            for i in 0..d {
                for j in 0..d {
                    // SWAP = sum_ij |i><j| (x) |j><i|; as A (x) B† pairs take
                    // A = |i><j| and B = |i><j| so B† = |j><i|.
                    let mut e = ComplexMatrix::zeros(d, d);
                    e.set(i, j, c64(0.5, 0.0));
                    let mut b = ComplexMatrix::zeros(d, d);
                    b.set(i, j, c64(1.0, 0.0));
                    terms.push((e, b));
                }
            }
            let mut swap = ComplexMatrix::zeros(d * d, d * d);
            for i in 0..d {
                for j in 0..d {
                    swap.set(i * d + j, j * d + i, c64(1.0, 0.0));
                }
            }
            let acc = ComplexMatrix::identity(d * d)
                .add(&swap)
                .unwrap()
                .scale(c64(0.5, 0.0));
            let q = BipartiteOperator::new(d, d, acc).unwrap();
            let dec = OperatorDecomposition::new(terms, &q).unwrap();
            let phi = sampling::random_state(d, &mut rng);
            values.push(otimes_norm_upper(&dec, &phi, &phi).unwrap());
        }
        for v in &values {
            assert!((*v - values[0]).abs() < 1e-9, "{values:?}");
        }
        assert!(values[0] <= 1.0 + 1e-9);
    }

    #[test]
    fn jocic_holds_with_equality_on_single_terms() {
        let mut rng = rng(151);
        let a = random_matrix(3, 3, &mut rng);
        let b = random_matrix(2, 2, &mut rng);
        let q = BipartiteOperator::new(3, 2, a.kron(&b.adjoint())).unwrap();
        let dec = OperatorDecomposition::new(vec![(a.clone(), b.clone())], &q).unwrap();
        assert!(jocic_check(&dec).unwrap());
        let lhs = spectral_norm(q.matrix()).unwrap();
        let rhs = diamond_upper_from(&dec).unwrap();
        assert!((lhs - rhs).abs() < 1e-8);
    }

    #[test]
    fn jocic_holds_on_random_decompositions_and_ip3() {
        let mut rng = rng(157);
        for _ in 0..100 {
            let da = rng.gen_range(2..4);
            let db = rng.gen_range(2..4);
            let t = rng.gen_range(1..4);
            let terms: Vec<_> = (0..t)
                .map(|_| (random_matrix(da, da, &mut rng), random_matrix(db, db, &mut rng)))
                .collect();
            let dec = OperatorDecomposition::from_terms_unchecked(da, db, terms);
            assert!(jocic_check(&dec).unwrap());
        }
        let dec = operator_schmidt(&ip_operator(3).unwrap()).unwrap();
        assert!(jocic_check(&dec).unwrap());
    }

    #[test]
    fn psi_norm_cap_after_balancing() {
        // max(|psi_A|^2, |psi_B|^2) <= diamond_upper_from(balanced) + 1e-8.
        let mut rng = rng(163);
        for _ in 0..30 {
            let q = sampling::random_measurement_element(2, 2, &mut rng);
            let dec = balance(&operator_schmidt(&q).unwrap()).unwrap();
            let bound = diamond_upper_from(&dec).unwrap();
            let e = sampling::random_entangled_state(2, 2, &mut rng);
            let pair = crate::reduction::build_psi(
                &dec,
                &e,
                &ComplexMatrix::identity(2),
                &ComplexMatrix::identity(2),
                0.0,
            )
            .unwrap();
            assert!(pair.norm_a * pair.norm_a <= bound + 1e-8);
            assert!(pair.norm_b * pair.norm_b <= bound + 1e-8);
        }
    }

    #[test]
    fn combined_bound_carries_witnesses() {
        let q = ip_operator(2).unwrap();
        let b = bound(&q, 1, 3).unwrap();
        assert!(b.lower <= b.upper + NORM_TOL);
        assert!((b.upper - 4.0 / 3.0).abs() < 1e-8);
        assert!(b.witness_rho.is_some());
        assert!(
            b.witness_decomposition
                .reconstruct()
                .matrix()
                .max_abs_diff(q.matrix())
                < 1e-8
        );
        // The invariant is enforced at construction.
        assert!(NormBound::new(1.0, 2.0, b.witness_decomposition, None).is_err());
    }

    #[test]
    fn schmidt_state_is_usable_from_sampling() {
        // Sanity wiring check between sampling and schmidt_decompose.
        let mut rng = rng(167);
        let s = sampling::random_entangled_state(3, 2, &mut rng);
        let back = schmidt_decompose(&s.reconstruct(), 3, 2).unwrap();
        assert_eq!(back.rank(), s.rank());
    }
}
