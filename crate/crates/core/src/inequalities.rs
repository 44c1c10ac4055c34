//! Signed-margin evaluators for the determinant, elementary-symmetric,
//! immanant and tensor-power inequalities over positive semidefinite
//! matrices, plus the binomial-weighted subset-sum scheme.
//!
//! Every evaluator returns `Margin { value, scale }` with `value` the
//! left-minus-right side of the inequality (smallest eigenvalue of the
//! difference for Loewner comparisons) and `scale` the largest absolute
//! summand (scalar sums) or operand spectral radius (Loewner), so tolerance
//! decisions track the cancellation actually incurred.

use crate::comb::{binomial, k_subsets, subsets_by_size};
use crate::cone::ConePoint;
use crate::error::Error;
use crate::matrix::{loewner_margin, mixed_tensor, tensor_power, CharacterSpec, SymMatrix};
use crate::scalar::{eval_function, FunctionSpec};
use crate::tol::{Margin, SignedSum, TolerancePolicy};
use crate::Result;

/// Eigenvalue ratio below which a subset sum counts as singular for
/// negative determinant powers.
pub const SINGULARITY_RATIO: f64 = 1e-12;

/// Cap on the number of summands in the subset-sum inequalities.
pub const SUBSET_COUNT_CAP: usize = 6;

fn check_common_dim(mats: &[&SymMatrix]) -> Result<usize> {
    let dim = mats
        .first()
        .ok_or_else(|| Error::Index("no matrices supplied".into()))?
        .dim();
    for m in mats {
        if m.dim() != dim {
            return Err(Error::DimensionMismatch(format!("{} vs {dim}", m.dim())));
        }
    }
    Ok(dim)
}

/// `det^(1/2)` of a PSD matrix from its eigenvalues. Slightly negative
/// eigenvalues within tolerance are clamped to zero; anything clearly
/// negative is a hard error.
pub fn det_sqrt(a: &SymMatrix) -> Result<f64> {
    det_fractional_root(a, 2)
}

fn det_fractional_root(a: &SymMatrix, k: usize) -> Result<f64> {
    let lam = a.eigenvalues()?;
    let scale = lam.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut prod = 1.0;
    for &l in &lam {
        if l < -1e-9 * scale {
            return Err(Error::NegativeDeterminant(format!(
                "eigenvalue {l} makes det^(1/{k}) complex"
            )));
        }
        // fractional roots amplify eigenvalue rounding noise by eps^(1/k),
        // so eigenvalues at noise level count as exact rank deficiency
        if l <= SINGULARITY_RATIO * scale {
            return Ok(0.0);
        }
        prod *= l.powf(1.0 / k as f64);
    }
    Ok(prod)
}

/// `det^(1/N)` of a PSD matrix from its eigenvalues.
pub fn det_root(a: &SymMatrix) -> Result<f64> {
    det_fractional_root(a, a.dim())
}

/// `det^(-rho)` of a strictly positive definite matrix from its
/// eigenvalues; rejects numerically singular inputs before the negative
/// power blows up.
pub fn det_neg_power(a: &SymMatrix, rho: f64) -> Result<f64> {
    let lam = a.eigenvalues()?;
    let largest = lam[lam.len() - 1];
    let smallest = lam[0];
    if smallest <= 0.0 || smallest < SINGULARITY_RATIO * largest {
        return Err(Error::SingularMatrix(format!(
            "eigenvalue range [{smallest:e}, {largest:e}] too ill-conditioned for det^(-{rho})"
        )));
    }
    let log_det: f64 = lam.iter().map(|l| l.ln()).sum();
    Ok((-rho * log_det).exp())
}

/// Iterated difference of `det` at base `X` with matrix steps `A_1..A_n`:
/// the alternating subset sum
/// `sum_k (-1)^(n-k) sum_{|S|=k} det(sum_{i in S} A_i + X)`.
/// Claimed nonnegative for PSD inputs at every order.
pub fn det_alternating_difference(steps: &[SymMatrix], x: &SymMatrix) -> Result<Margin> {
    if steps.is_empty() {
        return Err(Error::Index("need at least one difference step".into()));
    }
    let mut refs: Vec<&SymMatrix> = steps.iter().collect();
    refs.push(x);
    check_common_dim(&refs)?;
    let n = steps.len();
    let mut sum = SignedSum::new();
    for subset in subsets_by_size(n) {
        let m = SymMatrix::subset_sum(x, steps, &subset)?;
        let sign = if (n - subset.len()).is_multiple_of(2) { 1.0 } else { -1.0 };
        // near-singular sums cancel inside the elimination, so the term's
        // computational magnitude is its Hadamard bound, not |det|
        sum.add_with_magnitude(sign * m.det(), m.hadamard_bound());
    }
    Ok(sum.into_margin())
}

/// The three-matrix determinant inequality with base term:
/// `det(A+X) + det(B+X) + det(C+X) + det(A+B+C+X)`
/// `>= det(A+B+X) + det(B+C+X) + det(C+A+X) + det(X)`.
/// Dedicated order-3 evaluator; agrees with
/// [`det_alternating_difference`] at n = 3.
pub fn det_hlawka_with_base_margin(
    a: &SymMatrix,
    b: &SymMatrix,
    c: &SymMatrix,
    x: &SymMatrix,
) -> Result<Margin> {
    check_common_dim(&[a, b, c, x])?;
    let mut sum = SignedSum::new();
    let mut det_term = |m: SymMatrix, sign: f64| {
        sum.add_with_magnitude(sign * m.det(), m.hadamard_bound());
    };
    det_term(a.add(x)?, 1.0);
    det_term(b.add(x)?, 1.0);
    det_term(c.add(x)?, 1.0);
    det_term(a.add(b)?.add(c)?.add(x)?, 1.0);
    det_term(a.add(b)?.add(x)?, -1.0);
    det_term(b.add(c)?.add(x)?, -1.0);
    det_term(c.add(a)?.add(x)?, -1.0);
    det_term(x.clone(), -1.0);
    Ok(sum.into_margin())
}

/// Elementary-symmetric three-matrix inequality:
/// `e_k(A) + e_k(B) + e_k(C) + e_k(A+B+C) >= e_k(A+B) + e_k(B+C) + e_k(C+A)`.
pub fn esym_hlawka_margin(
    a: &SymMatrix,
    b: &SymMatrix,
    c: &SymMatrix,
    k: usize,
) -> Result<Margin> {
    let dim = check_common_dim(&[a, b, c])?;
    if k > dim {
        return Err(Error::Index(format!("k = {k} exceeds dimension {dim}")));
    }
    let mut sum = SignedSum::new();
    let mut e_term = |m: &SymMatrix, sign: f64| -> crate::Result<()> {
        let (value, bound) = crate::matrix::esym_with_bound(m, k)?;
        sum.add_with_magnitude(sign * value, bound);
        Ok(())
    };
    e_term(a, 1.0)?;
    e_term(b, 1.0)?;
    e_term(c, 1.0)?;
    e_term(&a.add(b)?.add(c)?, 1.0)?;
    e_term(&a.add(b)?, -1.0)?;
    e_term(&b.add(c)?, -1.0)?;
    e_term(&c.add(a)?, -1.0)?;
    Ok(sum.into_margin())
}

/// Immanant version of the base-term inequality for an arbitrary
/// permutation character; the sign character reproduces the determinant
/// margin and the trivial character the permanent margin.
pub fn immanant_hh_margin(
    a: &SymMatrix,
    b: &SymMatrix,
    c: &SymMatrix,
    x: &SymMatrix,
    chi: &CharacterSpec,
) -> Result<Margin> {
    check_common_dim(&[a, b, c, x])?;
    let mut sum = SignedSum::new();
    let mut d_term = |m: &SymMatrix, sign: f64| -> crate::Result<()> {
        let value = crate::matrix::immanant(m, chi)?;
        sum.add_with_magnitude(sign * value, m.row_l1_product());
        Ok(())
    };
    d_term(&a.add(x)?, 1.0)?;
    d_term(&b.add(x)?, 1.0)?;
    d_term(&c.add(x)?, 1.0)?;
    d_term(&a.add(b)?.add(c)?.add(x)?, 1.0)?;
    d_term(&a.add(b)?.add(x)?, -1.0)?;
    d_term(&b.add(c)?.add(x)?, -1.0)?;
    d_term(&c.add(a)?.add(x)?, -1.0)?;
    d_term(x, -1.0)?;
    Ok(sum.into_margin())
}

/// Operator inequality for tensor powers, in the Loewner order:
/// `T(A+X) + T(B+X) + T(C+X) + T(A+B+C+X)`
/// `>= T(A+B+X) + T(B+C+X) + T(C+A+X) + T(X)` with `T` the p-fold tensor
/// power. Exactly an identity at p = 1.
pub fn operator_hh_margin(
    a: &SymMatrix,
    b: &SymMatrix,
    c: &SymMatrix,
    x: &SymMatrix,
    p: usize,
) -> Result<Margin> {
    check_common_dim(&[a, b, c, x])?;
    let t = |m: &SymMatrix| tensor_power(m, p);
    let lhs = t(&a.add(x)?)?
        .add(&t(&b.add(x)?)?)?
        .add(&t(&c.add(x)?)?)?
        .add(&t(&a.add(b)?.add(c)?.add(x)?)?)?;
    let rhs = t(&a.add(b)?.add(x)?)?
        .add(&t(&b.add(c)?.add(x)?)?)?
        .add(&t(&c.add(a)?.add(x)?)?)?
        .add(&t(x)?)?;
    loewner_margin(&lhs, &rhs)
}

/// Sandwich inequality for mixed tensor blocks, in the Loewner order:
/// `X^k (x) V (x) X^l + (X+Y+Z)^k (x) V (x) (X+Y+Z)^l`
/// `>= (X+Y)^k (x) V (x) (X+Y)^l + (X+Z)^k (x) V (x) (X+Z)^l`.
pub fn lemma_main_margin(
    x: &SymMatrix,
    y: &SymMatrix,
    z: &SymMatrix,
    v: &SymMatrix,
    k: usize,
    l: usize,
) -> Result<Margin> {
    check_common_dim(&[x, y, z, v])?;
    let block = |m: &SymMatrix| mixed_tensor(m, k, v, l);
    let lhs = block(x)?.add(&block(&x.add(y)?.add(z)?)?)?;
    let rhs = block(&x.add(y)?)?.add(&block(&x.add(z)?)?)?;
    loewner_margin(&lhs, &rhs)
}

/// Max-entry discrepancy between the finite difference
/// `(T(Z + hV) - T(Z)) / h` of the p-fold tensor power and its directional
/// derivative `sum_j Z^j (x) V (x) Z^(p-1-j)`. First order in `h`.
pub fn derivative_formula_check(z: &SymMatrix, v: &SymMatrix, p: usize, h: f64) -> Result<f64> {
    check_common_dim(&[z, v])?;
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::Config(format!("step h = {h} must be positive")));
    }
    let lam_min = z.smallest_eigenvalue()?;
    if lam_min <= 0.0 {
        return Err(Error::SingularMatrix(format!(
            "base point must be strictly positive definite (smallest eigenvalue {lam_min})"
        )));
    }
    let finite = tensor_power(&z.add(&v.scale(h))?, p)?
        .sub(&tensor_power(z, p)?)?
        .scale(1.0 / h);
    let mut formula = mixed_tensor(z, 0, v, p - 1)?;
    for j in 1..p {
        formula = formula.add(&mixed_tensor(z, j, v, p - 1 - j)?)?;
    }
    Ok(finite.sub(&formula)?.max_abs_entry())
}

/// Generalized subset-sum operator inequality: with
/// `S_k = sum_{|S|=k} T(sum_{i in S} A_i + X)`, the even-gap side
/// `S_n + S_(n-2) + ..` dominates the odd-gap side
/// `S_(n-1) + S_(n-3) + ..` in the Loewner order. Reduces to
/// [`operator_hh_margin`] at n = 3 and to an exact identity at p = 1.
pub fn generalized_sk_margin(terms: &[SymMatrix], x: &SymMatrix, p: usize) -> Result<Margin> {
    let n = terms.len();
    if n == 0 {
        return Err(Error::Index("need at least one summand".into()));
    }
    if n > SUBSET_COUNT_CAP {
        return Err(Error::SizeLimit(format!(
            "subset order {n} exceeds {SUBSET_COUNT_CAP}"
        )));
    }
    let mut refs: Vec<&SymMatrix> = terms.iter().collect();
    refs.push(x);
    let dim = check_common_dim(&refs)?;
    let tdim = dim.pow(p as u32);
    let mut even = SymMatrix::zeros(tdim);
    let mut odd = SymMatrix::zeros(tdim);
    for subset in subsets_by_size(n) {
        let m = tensor_power(&SymMatrix::subset_sum(x, terms, &subset)?, p)?;
        if (n - subset.len()).is_multiple_of(2) {
            even = even.add(&m)?;
        } else {
            odd = odd.add(&m)?;
        }
    }
    loewner_margin(&even, &odd)
}

/// Reversed inequality for `det^(1/2)` on 2x2 PSD matrices:
/// `det^(1/2)(A+B) + det^(1/2)(B+C) + det^(1/2)(C+A)`
/// `>= det^(1/2)A + det^(1/2)B + det^(1/2)C + det^(1/2)(A+B+C)`.
pub fn serre_reverse_margin(a: &SymMatrix, b: &SymMatrix, c: &SymMatrix) -> Result<Margin> {
    let dim = check_common_dim(&[a, b, c])?;
    if dim != 2 {
        return Err(Error::DimensionMismatch(format!(
            "the reversed inequality is stated for 2x2 matrices, got {dim}"
        )));
    }
    let mut sum = SignedSum::new();
    let mut root_term = |m: &SymMatrix, sign: f64| -> crate::Result<()> {
        sum.add_with_magnitude(sign * det_sqrt(m)?, m.hadamard_bound().sqrt());
        Ok(())
    };
    root_term(&a.add(b)?, 1.0)?;
    root_term(&b.add(c)?, 1.0)?;
    root_term(&c.add(a)?, 1.0)?;
    root_term(a, -1.0)?;
    root_term(b, -1.0)?;
    root_term(c, -1.0)?;
    root_term(&a.add(b)?.add(c)?, -1.0)?;
    Ok(sum.into_margin())
}

/// Minkowski-like product inequality for `det^(1/N)`:
/// `det^(1/N)(A+B) det^(1/N)(A+C)`
/// `>= det^(1/N)B det^(1/N)C + det^(1/N)A det^(1/N)(A+B+C)`.
pub fn minkowski_like_margin(a: &SymMatrix, b: &SymMatrix, c: &SymMatrix) -> Result<Margin> {
    let dim = check_common_dim(&[a, b, c])?;
    let bound = |m: &SymMatrix| m.hadamard_bound().powf(1.0 / dim as f64);
    let ab = a.add(b)?;
    let ac = a.add(c)?;
    let abc = a.add(b)?.add(c)?;
    let mut sum = SignedSum::new();
    sum.add_with_magnitude(det_root(&ab)? * det_root(&ac)?, bound(&ab) * bound(&ac));
    sum.add_with_magnitude(-(det_root(b)? * det_root(c)?), bound(b) * bound(c));
    sum.add_with_magnitude(-(det_root(a)? * det_root(&abc)?), bound(a) * bound(&abc));
    Ok(sum.into_margin())
}

/// Alternating subset sum of `det^(-rho)` over nonempty subset sums of
/// strictly positive definite matrices; claimed nonnegative for
/// `rho in {0, 1/2, 1, ..} union [(N-1)/2, inf)`.
pub fn detrho_alternating_sum(terms: &[SymMatrix], rho: f64) -> Result<Margin> {
    let n = terms.len();
    if n == 0 {
        return Err(Error::Index("need at least one matrix".into()));
    }
    if rho < 0.0 {
        return Err(Error::Config(format!("rho = {rho} must be nonnegative")));
    }
    let refs: Vec<&SymMatrix> = terms.iter().collect();
    let dim = check_common_dim(&refs)?;
    let zero = SymMatrix::zeros(dim);
    let mut sum = SignedSum::new();
    for subset in subsets_by_size(n) {
        if subset.is_empty() {
            continue;
        }
        let m = SymMatrix::subset_sum(&zero, terms, &subset)?;
        let sign = if subset.len().is_multiple_of(2) { -1.0 } else { 1.0 };
        sum.add(sign * det_neg_power(&m, rho)?);
    }
    Ok(sum.into_margin())
}

/// Inputs for the binomial-weighted subset-sum scheme: cone vectors or PSD
/// matrices.
#[derive(Debug, Clone)]
pub enum VaInputs {
    Points(Vec<ConePoint>),
    Matrices(Vec<SymMatrix>),
}

impl VaInputs {
    pub fn len(&self) -> usize {
        match self {
            VaInputs::Points(v) => v.len(),
            VaInputs::Matrices(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn subset_sum(&self, subset: &[usize]) -> Result<VaElement> {
        match self {
            VaInputs::Points(v) => {
                let base = ConePoint::zero(v[0].dim());
                Ok(VaElement::Point(ConePoint::subset_sum(&base, v, subset)?))
            }
            VaInputs::Matrices(v) => {
                let base = SymMatrix::zeros(v[0].dim());
                Ok(VaElement::Matrix(SymMatrix::subset_sum(&base, v, subset)?))
            }
        }
    }
}

enum VaElement {
    Point(ConePoint),
    Matrix(SymMatrix),
}

/// Functionals accepted by [`va_margin`]. Each is expected to satisfy the
/// three-variable hypothesis
/// `phi(x+y) + phi(y+z) + phi(z+x) <= phi(x) + phi(y) + phi(z) + phi(x+y+z)`.
#[derive(Debug, Clone)]
pub enum VaFunctional {
    /// Euclidean norm of a cone vector.
    EuclideanNorm,
    /// `det(M + shift) - det(shift)`; satisfies the hypothesis for PSD
    /// matrices since det has positive third differences.
    ShiftedDet { shift: SymMatrix },
    /// `f(sum(x) + shift) - f(shift)` for a 3-convex scalar function.
    ShiftedScalar { f: FunctionSpec, shift: f64 },
}

impl VaFunctional {
    fn apply(&self, e: &VaElement) -> Result<f64> {
        match (self, e) {
            (VaFunctional::EuclideanNorm, VaElement::Point(p)) => {
                Ok(p.coords().iter().map(|c| c * c).sum::<f64>().sqrt())
            }
            (VaFunctional::ShiftedDet { shift }, VaElement::Matrix(m)) => {
                Ok(m.add(shift)?.det() - shift.det())
            }
            (VaFunctional::ShiftedScalar { f, shift }, VaElement::Point(p)) => {
                let s: f64 = p.coords().iter().sum();
                Ok(eval_function(f, s + shift)? - eval_function(f, *shift)?)
            }
            _ => Err(Error::Config("functional does not accept this input kind".into())),
        }
    }
}

/// Binomial-weighted k-subset inequality derived from the three-variable
/// hypothesis: for `2 <= k < n`,
/// `C(n-2, k-1) sum phi(x_i) + C(n-2, k-2) phi(sum x_i)`
/// `>= sum_{|S|=k} phi(sum_{i in S} x_i)`.
/// With `strict` the hypothesis is re-checked on every input triple first.
pub fn va_margin(inputs: &VaInputs, k: usize, phi: &VaFunctional, strict: bool) -> Result<Margin> {
    let n = inputs.len();
    if !(2..n).contains(&k) {
        return Err(Error::Index(format!("need 2 <= k < n, got k = {k}, n = {n}")));
    }
    if strict {
        let tol = TolerancePolicy::default();
        let mut triples = Vec::new();
        k_subsets(n, 3, &mut triples);
        for t in &triples {
            let mut sum = SignedSum::new();
            for &i in t {
                sum.add(phi.apply(&inputs.subset_sum(&[i])?)?);
            }
            sum.add(phi.apply(&inputs.subset_sum(t)?)?);
            sum.add(-phi.apply(&inputs.subset_sum(&[t[0], t[1]])?)?);
            sum.add(-phi.apply(&inputs.subset_sum(&[t[1], t[2]])?)?);
            sum.add(-phi.apply(&inputs.subset_sum(&[t[0], t[2]])?)?);
            let m = sum.into_margin();
            if !m.passes(tol) {
                return Err(Error::HypothesisViolated(format!(
                    "triple {t:?} fails the three-variable hypothesis by {}",
                    m.value
                )));
            }
        }
    }
    let w_single = binomial(n - 2, k - 1);
    let w_total = binomial(n - 2, k - 2);
    let mut sum = SignedSum::new();
    for i in 0..n {
        sum.add(w_single * phi.apply(&inputs.subset_sum(&[i])?)?);
    }
    let all: Vec<usize> = (0..n).collect();
    sum.add(w_total * phi.apply(&inputs.subset_sum(&all)?)?);
    let mut subsets = Vec::new();
    k_subsets(n, k, &mut subsets);
    for s in &subsets {
        sum.add(-phi.apply(&inputs.subset_sum(s)?)?);
    }
    Ok(sum.into_margin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol::TolerancePolicy;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn i2() -> SymMatrix {
        SymMatrix::identity(2)
    }

    fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
        let g: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        SymMatrix::gram(&g, n, n)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn det_alternating_examples() {
        let z = SymMatrix::zeros(2);
        let m = det_alternating_difference(&[i2(), i2()], &z).unwrap();
        assert!(close(m.value, 2.0, 1e-12));
        let m = det_alternating_difference(&[i2(), i2(), i2()], &z).unwrap();
        assert!(m.value.abs() < 1e-12);
        let m = det_alternating_difference(&[i2()], &i2()).unwrap();
        assert!(close(m.value, 3.0, 1e-12));
        assert!(det_alternating_difference(&[], &z).is_err());
    }

    #[test]
    fn det_alternating_nonneg_on_psd_samples() {
        let tol = TolerancePolicy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=5 {
            for dim in 2..=4 {
                for _ in 0..20 {
                    let steps: Vec<SymMatrix> =
                        (0..n).map(|_| random_psd(&mut rng, dim)).collect();
                    let x = random_psd(&mut rng, dim);
                    let m = det_alternating_difference(&steps, &x).unwrap();
                    assert!(m.passes(tol), "n={n} dim={dim}: {m:?}");
                }
            }
        }
    }

    #[test]
    fn det_hlawka_examples() {
        let z = SymMatrix::zeros(2);
        let m = det_hlawka_with_base_margin(&i2(), &i2(), &i2(), &z).unwrap();
        assert!(m.value.abs() < 1e-12);
        let a = SymMatrix::diagonal(&[1.0, 0.0]);
        let b = SymMatrix::diagonal(&[0.0, 1.0]);
        let m = det_hlawka_with_base_margin(&a, &b, &z, &z).unwrap();
        assert!(m.value.abs() < 1e-12);
        // 3 det(2I) + det(4I) - 3 det(3I) - det(I) = 12 + 16 - 27 - 1 = 0
        let m = det_hlawka_with_base_margin(&i2(), &i2(), &i2(), &i2()).unwrap();
        assert!(m.value.abs() < 1e-12);
        assert_eq!(m.scale, 16.0);
    }

    #[test]
    fn det_hlawka_matches_general_evaluator() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for dim in 2..=4 {
            for _ in 0..25 {
                let a = random_psd(&mut rng, dim);
                let b = random_psd(&mut rng, dim);
                let c = random_psd(&mut rng, dim);
                let x = random_psd(&mut rng, dim);
                let dedicated = det_hlawka_with_base_margin(&a, &b, &c, &x).unwrap();
                let general =
                    det_alternating_difference(&[a.clone(), b.clone(), c.clone()], &x).unwrap();
                assert!(
                    (dedicated.value - general.value).abs() <= 1e-9 * dedicated.scale.max(1.0),
                    "{} vs {}",
                    dedicated.value,
                    general.value
                );
            }
        }
    }

    #[test]
    fn esym_hlawka_examples() {
        let m = esym_hlawka_margin(&i2(), &i2(), &i2(), 1).unwrap();
        assert!(m.value.abs() < 1e-10);
        let m = esym_hlawka_margin(&i2(), &i2(), &i2(), 2).unwrap();
        assert!(m.value.abs() < 1e-10);
        let m = esym_hlawka_margin(&i2(), &i2(), &i2(), 0).unwrap();
        assert!(close(m.value, 1.0, 1e-12));
        assert!(esym_hlawka_margin(&i2(), &i2(), &i2(), 3).is_err());
    }

    #[test]
    fn esym_sum_reproduces_det_base_form() {
        // summing the e_k margins over k = 1..N equals the det(. + I) margin
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = random_psd(&mut rng, 3);
        let b = random_psd(&mut rng, 3);
        let c = random_psd(&mut rng, 3);
        let mut total = 0.0;
        for k in 1..=3 {
            total += esym_hlawka_margin(&a, &b, &c, k).unwrap().value;
        }
        let det_form =
            det_hlawka_with_base_margin(&a, &b, &c, &SymMatrix::identity(3)).unwrap();
        assert!(close(total, det_form.value, 1e-8), "{total} vs {}", det_form.value);
    }

    #[test]
    fn immanant_hh_examples() {
        let z = SymMatrix::zeros(2);
        let m = immanant_hh_margin(&i2(), &i2(), &i2(), &z, &CharacterSpec::Trivial).unwrap();
        assert!(m.value.abs() < 1e-12);
        // rank-one equality case
        let j = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let m = immanant_hh_margin(&j, &j, &j, &z, &CharacterSpec::Trivial).unwrap();
        assert!(m.value.abs() < 1e-12);
        // sign character equals the determinant margin
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_psd(&mut rng, 3);
            let b = random_psd(&mut rng, 3);
            let c = random_psd(&mut rng, 3);
            let x = random_psd(&mut rng, 3);
            let imm = immanant_hh_margin(&a, &b, &c, &x, &CharacterSpec::Sign).unwrap();
            let det = det_hlawka_with_base_margin(&a, &b, &c, &x).unwrap();
            assert!(
                (imm.value - det.value).abs() <= 1e-10 * imm.scale.max(1.0),
                "{} vs {}",
                imm.value,
                det.value
            );
        }
    }

    #[test]
    fn operator_hh_examples() {
        let z = SymMatrix::zeros(2);
        let m = operator_hh_margin(&i2(), &i2(), &i2(), &z, 2).unwrap();
        assert!(m.value.abs() < 1e-12);
        // p = 1 telescopes to the zero matrix
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let a = random_psd(&mut rng, 3);
        let b = random_psd(&mut rng, 3);
        let c = random_psd(&mut rng, 3);
        let x = random_psd(&mut rng, 3);
        let m = operator_hh_margin(&a, &b, &c, &x, 1).unwrap();
        assert!(m.value.abs() < 1e-10, "p=1 margin {}", m.value);
        // p = 3 stays nonnegative on PSD samples
        let tol = TolerancePolicy::default();
        for _ in 0..10 {
            let a = random_psd(&mut rng, 2);
            let b = random_psd(&mut rng, 2);
            let c = random_psd(&mut rng, 2);
            let x = random_psd(&mut rng, 2);
            let m = operator_hh_margin(&a, &b, &c, &x, 3).unwrap();
            assert!(m.passes(tol), "{m:?}");
        }
    }

    #[test]
    fn lemma_main_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let v = random_psd(&mut rng, 2);
        let m = lemma_main_margin(&i2(), &i2(), &i2(), &v, 0, 0).unwrap();
        assert_eq!(m.value, 0.0);
        let m = lemma_main_margin(&i2(), &i2(), &i2(), &i2(), 1, 0).unwrap();
        assert!(m.value.abs() < 1e-12);
        // all block exponents with k + l + 1 <= 5 at N = 2
        let tol = TolerancePolicy::default();
        for k in 0..=4usize {
            for l in 0..=4 - k {
                for _ in 0..10 {
                    let x = random_psd(&mut rng, 2);
                    let y = random_psd(&mut rng, 2);
                    let z = random_psd(&mut rng, 2);
                    let v = random_psd(&mut rng, 2);
                    let m = lemma_main_margin(&x, &y, &z, &v, k, l).unwrap();
                    assert!(m.passes(tol), "k={k} l={l}: {m:?}");
                }
            }
        }
    }

    #[test]
    fn derivative_check_examples() {
        // dyadic step keeps the p = 1 identity case exact
        let h = (2.0f64).powi(-13);
        let d = derivative_formula_check(&i2(), &i2(), 1, h).unwrap();
        assert_eq!(d, 0.0);
        // p = 2 at the identity: FD - formula = h * V (x) V
        let d = derivative_formula_check(&i2(), &i2(), 2, 1e-4).unwrap();
        assert!(close(d, 1e-4, 1e-6), "discrepancy {d}");
        // rejects indefinite base points
        let neg = SymMatrix::diagonal(&[1.0, -1.0]);
        assert!(derivative_formula_check(&neg, &i2(), 2, 1e-4).is_err());
    }

    #[test]
    fn derivative_check_first_order_in_h() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let z = random_psd(&mut rng, 2).add(&i2().scale(0.5)).unwrap();
        let v = random_psd(&mut rng, 2);
        let d3 = derivative_formula_check(&z, &v, 3, 1e-3).unwrap();
        let d4 = derivative_formula_check(&z, &v, 3, 1e-4).unwrap();
        let ratio = d3 / d4;
        assert!((8.0..12.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn sk_general_examples() {
        let z = SymMatrix::zeros(2);
        // n = 4 identity summands at p = 2: both sides 40 I
        let terms = vec![i2(), i2(), i2(), i2()];
        let m = generalized_sk_margin(&terms, &z, 2).unwrap();
        assert!(m.value.abs() < 1e-10, "{m:?}");
        // p = 1 is an exact identity for any inputs
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for n in 3..=5 {
            let terms: Vec<SymMatrix> = (0..n).map(|_| random_psd(&mut rng, 2)).collect();
            let x = random_psd(&mut rng, 2);
            let m = generalized_sk_margin(&terms, &x, 1).unwrap();
            assert!(m.value.abs() < 1e-10, "n={n}: {}", m.value);
        }
        // n = 3 agrees with the dedicated operator evaluator
        let a = random_psd(&mut rng, 2);
        let b = random_psd(&mut rng, 2);
        let c = random_psd(&mut rng, 2);
        let x = random_psd(&mut rng, 2);
        let sk = generalized_sk_margin(&[a.clone(), b.clone(), c.clone()], &x, 2).unwrap();
        let op = operator_hh_margin(&a, &b, &c, &x, 2).unwrap();
        assert!((sk.value - op.value).abs() <= 1e-9 * sk.scale.max(1.0));
        assert!(generalized_sk_margin(&vec![i2(); 7], &z, 1).is_err());
    }

    #[test]
    fn sk_coefficient_counting_oracle() {
        // symbolic check that the p = 1 case balances: each summand and the
        // base carry total weight zero across the signed subset sum
        for n in 2..=6usize {
            let mut coeff_term = 0i64;
            let mut coeff_base = 0i64;
            for k in 0..=n {
                let sign = if (n - k).is_multiple_of(2) { 1i64 } else { -1i64 };
                if k >= 1 {
                    coeff_term += sign * binomial(n - 1, k - 1) as i64;
                }
                coeff_base += sign * binomial(n, k) as i64;
            }
            assert_eq!(coeff_term, 0, "summand coefficient at n = {n}");
            assert_eq!(coeff_base, 0, "base coefficient at n = {n}");
        }
    }

    #[test]
    fn serre_examples() {
        let m = serre_reverse_margin(&i2(), &i2(), &i2()).unwrap();
        assert!(m.value.abs() < 1e-12);
        let z = SymMatrix::zeros(2);
        let m = serre_reverse_margin(&z, &z, &z).unwrap();
        assert_eq!(m.value, 0.0);
        let tol = TolerancePolicy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..50 {
            let a = random_psd(&mut rng, 2);
            let b = random_psd(&mut rng, 2);
            let c = random_psd(&mut rng, 2);
            let m = serre_reverse_margin(&a, &b, &c).unwrap();
            assert!(m.passes(tol), "{m:?}");
        }
        let i3 = SymMatrix::identity(3);
        assert!(serre_reverse_margin(&i3, &i3, &i3).is_err());
    }

    #[test]
    fn minkowski_examples() {
        for n in 2..=4 {
            let i = SymMatrix::identity(n);
            let m = minkowski_like_margin(&i, &i, &i).unwrap();
            assert!(m.value.abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let b = random_psd(&mut rng, 3);
        let c = random_psd(&mut rng, 3);
        let m = minkowski_like_margin(&SymMatrix::zeros(3), &b, &c).unwrap();
        assert!(m.value.abs() < 1e-12);
        let tol = TolerancePolicy::default();
        for _ in 0..30 {
            let a = random_psd(&mut rng, 3);
            let b = random_psd(&mut rng, 3);
            let c = random_psd(&mut rng, 3);
            let m = minkowski_like_margin(&a, &b, &c).unwrap();
            assert!(m.passes(tol), "{m:?}");
        }
    }

    #[test]
    fn detrho_examples() {
        let m = detrho_alternating_sum(&[i2(), i2(), i2()], 0.0).unwrap();
        assert!(close(m.value, 1.0, 1e-12));
        let m = detrho_alternating_sum(&[i2(), i2()], 0.5).unwrap();
        assert!(close(m.value, 1.5, 1e-12));
        let m = detrho_alternating_sum(&[i2(), i2(), i2()], 1.0).unwrap();
        assert!(close(m.value, 3.0 - 0.75 + 1.0 / 9.0, 1e-10));
        // singular input is rejected rather than blowing up
        let singular = SymMatrix::diagonal(&[1.0, 0.0]);
        assert!(matches!(
            detrho_alternating_sum(&[singular], 0.5),
            Err(Error::SingularMatrix(_))
        ));
    }

    #[test]
    fn va_examples() {
        // all inputs (1, 0): collinear equality case of the norm inequality
        let p = ConePoint::new(vec![1.0, 0.0]).unwrap();
        let inputs = VaInputs::Points(vec![p.clone(), p.clone(), p.clone(), p]);
        let m = va_margin(&inputs, 2, &VaFunctional::EuclideanNorm, false).unwrap();
        assert!(m.value.abs() < 1e-12);

        // n = 3, k = 2 recovers the plain three-variable margin
        let pts: Vec<ConePoint> = [[0.3, 1.1], [0.9, 0.2], [0.5, 0.7]]
            .iter()
            .map(|c| ConePoint::new(c.to_vec()).unwrap())
            .collect();
        let tri = VaInputs::Points(pts.clone());
        let m = va_margin(&tri, 2, &VaFunctional::EuclideanNorm, true).unwrap();
        let norm = |c: &[f64]| (c[0] * c[0] + c[1] * c[1]).sqrt();
        let s: Vec<&[f64]> = pts.iter().map(|p| p.coords()).collect();
        let total = [s[0][0] + s[1][0] + s[2][0], s[0][1] + s[1][1] + s[2][1]];
        let direct = norm(s[0]) + norm(s[1]) + norm(s[2]) + norm(&total)
            - norm(&[s[0][0] + s[1][0], s[0][1] + s[1][1]])
            - norm(&[s[1][0] + s[2][0], s[1][1] + s[2][1]])
            - norm(&[s[0][0] + s[2][0], s[0][1] + s[2][1]]);
        assert!(close(m.value, direct, 1e-12));

        // shifted determinant functional on PSD matrices
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let tol = TolerancePolicy::default();
        let phi = VaFunctional::ShiftedDet { shift: SymMatrix::identity(2) };
        for n in 4..=5 {
            for k in 2..n {
                let mats: Vec<SymMatrix> = (0..n).map(|_| random_psd(&mut rng, 2)).collect();
                let m = va_margin(&VaInputs::Matrices(mats), k, &phi, false).unwrap();
                assert!(m.passes(tol), "n={n} k={k}: {m:?}");
            }
        }
        assert!(va_margin(&tri, 1, &VaFunctional::EuclideanNorm, false).is_err());
        assert!(va_margin(&tri, 3, &VaFunctional::EuclideanNorm, false).is_err());
    }

    #[test]
    fn va_strict_mode_rejects_bad_functional() {
        // a negative cubic fails the three-variable hypothesis
        let f = crate::scalar::FunctionSpec::poly(&[0.0, 0.0, 0.0, -1.0]);
        let phi = VaFunctional::ShiftedScalar { f, shift: 0.0 };
        let pts: Vec<ConePoint> =
            (1..=4).map(|i| ConePoint::new(vec![i as f64]).unwrap()).collect();
        let r = va_margin(&VaInputs::Points(pts), 2, &phi, true);
        assert!(matches!(r, Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn det_power_helpers() {
        assert!(close(det_sqrt(&i2().scale(2.0)).unwrap(), 2.0, 1e-12));
        assert!(close(det_root(&SymMatrix::identity(3).scale(3.0)).unwrap(), 3.0, 1e-12));
        assert!(close(det_neg_power(&i2().scale(2.0), 0.5).unwrap(), 0.5, 1e-12));
        let indefinite = SymMatrix::diagonal(&[2.0, -1.0]);
        assert!(det_sqrt(&indefinite).is_err());
    }
}
