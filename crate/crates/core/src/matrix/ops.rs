//! Matrix functionals: Loewner margins, elementary symmetric functions,
//! compound matrices, permanents, immanants and tensor powers.

use std::collections::HashMap;

use super::{det_flat, SymMatrix};
use crate::comb::{binomial, for_each_permutation, k_subsets};
use crate::error::Error;
use crate::tol::Margin;
use crate::Result;

/// Hard cap on the dimension of any tensor-power result.
pub const TENSOR_DIM_CAP: usize = 4096;
/// Immanants enumerate all permutations; 8! = 40320 is the desk-scale cap.
pub const IMMANANT_DIM_CAP: usize = 8;
/// Ryser's method is O(2^N * N); 14 keeps it well under a second.
pub const PERMANENT_DIM_CAP: usize = 14;

/// Loewner comparison of `a` against `b`: the smallest eigenvalue of
/// `a - b`, with the larger operand spectral radius as scale. `a >= b` in
/// the Loewner order iff the margin passes.
pub fn loewner_margin(a: &SymMatrix, b: &SymMatrix) -> Result<Margin> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", a.dim(), b.dim())));
    }
    let value = a.sub(b)?.smallest_eigenvalue()?;
    let scale = a.spectral_radius()?.max(b.spectral_radius()?);
    Ok(Margin::new(value, scale))
}

/// All elementary symmetric functions `e_0, .., e_N` of the eigenvalues,
/// recovered from power sums via Newton's identities.
pub fn esym_all(a: &SymMatrix) -> Result<Vec<f64>> {
    let n = a.dim();
    let lam = a.eigenvalues()?;
    // power sums p[i] = sum lambda^i for i = 1..N
    let mut p = vec![0.0; n + 1];
    let mut pow = vec![1.0; n];
    for pi in p.iter_mut().skip(1) {
        for (v, l) in pow.iter_mut().zip(&lam) {
            *v *= l;
        }
        *pi = pow.iter().sum();
    }
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for k in 1..=n {
        let mut acc = 0.0;
        let mut sign = 1.0;
        for i in 1..=k {
            acc += sign * e[k - i] * p[i];
            sign = -sign;
        }
        e[k] = acc / k as f64;
    }
    Ok(e)
}

/// The `k`-th elementary symmetric function of the eigenvalues;
/// `e_0 = 1`, `e_1 = trace`, `e_N = det`.
pub fn esym(a: &SymMatrix, k: usize) -> Result<f64> {
    if k > a.dim() {
        return Err(Error::Index(format!("k = {k} exceeds dimension {}", a.dim())));
    }
    Ok(esym_all(a)?[k])
}

/// `e_k` together with the spectral bound `C(N,k) * rho^k` that dominates
/// it and tracks the magnitude of its computation.
pub fn esym_with_bound(a: &SymMatrix, k: usize) -> Result<(f64, f64)> {
    if k > a.dim() {
        return Err(Error::Index(format!("k = {k} exceeds dimension {}", a.dim())));
    }
    let value = esym_all(a)?[k];
    let rho = a.spectral_radius()?;
    Ok((value, binomial(a.dim(), k) * rho.powi(k as i32)))
}

/// Direct principal-minor evaluation of `e_k`; exponential in `N` and kept
/// as the small-N oracle for `esym`.
pub fn esym_principal_minors(a: &SymMatrix, k: usize) -> Result<f64> {
    let n = a.dim();
    if k > n {
        return Err(Error::Index(format!("k = {k} exceeds dimension {n}")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let mut subsets = Vec::new();
    k_subsets(n, k, &mut subsets);
    let mut total = 0.0;
    let mut buf = vec![0.0; k * k];
    for s in &subsets {
        for (r, &i) in s.iter().enumerate() {
            for (c, &j) in s.iter().enumerate() {
                buf[r * k + c] = a.get(i, j);
            }
        }
        total += det_flat(&buf, k);
    }
    Ok(total)
}

/// `k`-th compound matrix: rows and columns indexed by the k-subsets in
/// lexicographic order, entries the corresponding k x k minors. Its trace
/// equals `esym(a, k)` and it is PSD whenever `a` is.
pub fn compound_matrix(a: &SymMatrix, k: usize) -> Result<SymMatrix> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(Error::Index(format!("compound order {k} out of 1..={n}")));
    }
    let m = binomial(n, k) as usize;
    if m > TENSOR_DIM_CAP {
        return Err(Error::SizeLimit(format!(
            "compound dimension C({n},{k}) = {m} exceeds {TENSOR_DIM_CAP}"
        )));
    }
    let mut subsets = Vec::new();
    k_subsets(n, k, &mut subsets);
    let mut data = vec![0.0; m * m];
    let mut buf = vec![0.0; k * k];
    for (r, srow) in subsets.iter().enumerate() {
        for (c, scol) in subsets.iter().enumerate().skip(r) {
            for (ri, &i) in srow.iter().enumerate() {
                for (ci, &j) in scol.iter().enumerate() {
                    buf[ri * k + ci] = a.get(i, j);
                }
            }
            let minor = det_flat(&buf, k);
            data[r * m + c] = minor;
            data[c * m + r] = minor;
        }
    }
    SymMatrix::from_flat(m, &data)
}

/// Permanent via Ryser's inclusion-exclusion formula with Gray-code column
/// updates; the subset walk order is fixed, so results are deterministic.
pub fn permanent(a: &SymMatrix) -> Result<f64> {
    let n = a.dim();
    if n > PERMANENT_DIM_CAP {
        return Err(Error::SizeLimit(format!(
            "permanent dimension {n} exceeds {PERMANENT_DIM_CAP}"
        )));
    }
    let mut row_sums = vec![0.0; n];
    let mut total = 0.0;
    for counter in 1u64..(1u64 << n) {
        let flipped = counter.trailing_zeros() as usize;
        let gray = counter ^ (counter >> 1);
        if gray & (1 << flipped) != 0 {
            for (i, rs) in row_sums.iter_mut().enumerate() {
                *rs += a.get(i, flipped);
            }
        } else {
            for (i, rs) in row_sums.iter_mut().enumerate() {
                *rs -= a.get(i, flipped);
            }
        }
        let prod: f64 = row_sums.iter().product();
        if gray.count_ones().is_multiple_of(2) {
            total -= prod;
        } else {
            total += prod;
        }
    }
    if n.is_multiple_of(2) {
        total = -total;
    }
    Ok(total)
}

/// Permutation weight for an immanant: the sign character reproduces the
/// determinant, the trivial character the permanent, and a custom map
/// assigns an arbitrary weight to every permutation.
#[derive(Debug, Clone)]
pub enum CharacterSpec {
    Sign,
    Trivial,
    Custom(HashMap<Vec<usize>, f64>),
}

impl CharacterSpec {
    fn weight(&self, perm: &[usize], sign: f64) -> Result<f64> {
        match self {
            CharacterSpec::Sign => Ok(sign),
            CharacterSpec::Trivial => Ok(1.0),
            CharacterSpec::Custom(map) => map.get(perm).copied().ok_or_else(|| {
                Error::InvalidCharacter(format!("no weight for permutation {perm:?}"))
            }),
        }
    }
}

/// Immanant: the character-weighted permutation sum
/// `sum_sigma chi(sigma) prod_i a[i, sigma(i)]` over the full symmetric
/// group.
pub fn immanant(a: &SymMatrix, chi: &CharacterSpec) -> Result<f64> {
    let n = a.dim();
    if n > IMMANANT_DIM_CAP {
        return Err(Error::SizeLimit(format!(
            "immanant dimension {n} exceeds {IMMANANT_DIM_CAP}"
        )));
    }
    let mut total = 0.0;
    let mut failure: Option<Error> = None;
    for_each_permutation(n, |perm, sign| {
        if failure.is_some() {
            return;
        }
        match chi.weight(perm, sign) {
            Ok(w) => {
                if w != 0.0 {
                    let mut prod = w;
                    for (i, &j) in perm.iter().enumerate() {
                        prod *= a.get(i, j);
                    }
                    total += prod;
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// `p`-fold Kronecker power; eigenvalues are all p-fold products of the
/// eigenvalues of `a`, so PSD inputs stay PSD.
pub fn tensor_power(a: &SymMatrix, p: usize) -> Result<SymMatrix> {
    if p == 0 {
        return Err(Error::Index("tensor power requires p >= 1".into()));
    }
    check_tensor_dim(a.dim(), p)?;
    let mut acc = a.clone();
    for _ in 1..p {
        acc = acc.kron(a);
    }
    Ok(acc)
}

/// `X^(k) tensor V tensor X^(l)` with the convention that a zeroth power is
/// the scalar 1, i.e. the factor is omitted rather than materialized.
pub fn mixed_tensor(x: &SymMatrix, k: usize, v: &SymMatrix, l: usize) -> Result<SymMatrix> {
    if x.dim() != v.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", x.dim(), v.dim())));
    }
    check_tensor_dim(x.dim(), k + l + 1)?;
    let mut acc = if k > 0 { tensor_power(x, k)?.kron(v) } else { v.clone() };
    for _ in 0..l {
        acc = acc.kron(x);
    }
    Ok(acc)
}

fn check_tensor_dim(n: usize, p: usize) -> Result<()> {
    let mut dim = 1usize;
    for _ in 0..p {
        dim = dim.saturating_mul(n);
        if dim > TENSOR_DIM_CAP {
            return Err(Error::SizeLimit(format!(
                "tensor dimension {n}^{p} exceeds {TENSOR_DIM_CAP}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::subsets_by_size;
    use crate::tol::TolerancePolicy;
    use proptest::prelude::*;

    fn random_sym(seed: u64, n: usize) -> SymMatrix {
        // small deterministic LCG so unit tests need no rand dependency here
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| next()).collect()).collect();
        SymMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn loewner_examples() {
        let tol = TolerancePolicy::default();
        let m = loewner_margin(&SymMatrix::identity(2), &SymMatrix::zeros(2)).unwrap();
        assert!((m.value - 1.0).abs() < 1e-12);
        let m = loewner_margin(
            &SymMatrix::diagonal(&[1.0, 2.0]),
            &SymMatrix::diagonal(&[2.0, 1.0]),
        )
        .unwrap();
        assert!((m.value + 1.0).abs() < 1e-12);
        assert_eq!(m.scale, 2.0);
        // comparing a matrix against itself sits at zero
        let a = random_sym(7, 4);
        let m = loewner_margin(&a, &a).unwrap();
        assert!(m.value.abs() <= tol.at_scale(m.scale));
    }

    #[test]
    fn loewner_dim_mismatch() {
        assert!(loewner_margin(&SymMatrix::identity(2), &SymMatrix::identity(3)).is_err());
    }

    #[test]
    fn esym_examples() {
        let d = SymMatrix::diagonal(&[1.0, 2.0, 3.0]);
        assert!((esym(&d, 2).unwrap() - 11.0).abs() < 1e-12);
        assert!((esym(&d, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((esym(&d, 1).unwrap() - d.trace()).abs() < 1e-12);
        assert!((esym(&d, 3).unwrap() - 6.0).abs() < 1e-12);
        let i5 = SymMatrix::identity(5);
        for k in 0..=5 {
            assert!((esym(&i5, k).unwrap() - binomial(5, k)).abs() < 1e-9);
        }
        assert!(esym(&d, 4).is_err());
    }

    #[test]
    fn esym_matches_principal_minors() {
        for n in 2..=6 {
            let a = random_sym(n as u64 * 31 + 1, n);
            for k in 0..=n {
                let via_eigs = esym(&a, k).unwrap();
                let via_minors = esym_principal_minors(&a, k).unwrap();
                let scale = via_minors.abs().max(1.0);
                assert!(
                    (via_eigs - via_minors).abs() < 1e-8 * scale,
                    "n={n} k={k}: {via_eigs} vs {via_minors}"
                );
            }
        }
    }

    #[test]
    fn det_plus_identity_expansion() {
        let a = random_sym(55, 5);
        let e = esym_all(&a).unwrap();
        let lhs = a.add(&SymMatrix::identity(5)).unwrap().det();
        let rhs: f64 = e.iter().sum();
        assert!((lhs - rhs).abs() < 1e-8 * lhs.abs().max(1.0));
    }

    #[test]
    fn compound_examples() {
        let c = compound_matrix(&SymMatrix::diagonal(&[1.0, 2.0, 3.0]), 2).unwrap();
        assert_eq!(c.dim(), 3);
        // subsets in lex order: {0,1}, {0,2}, {1,2}
        assert!((c.get(0, 0) - 2.0).abs() < 1e-12);
        assert!((c.get(1, 1) - 3.0).abs() < 1e-12);
        assert!((c.get(2, 2) - 6.0).abs() < 1e-12);

        let a = random_sym(3, 3);
        let full = compound_matrix(&a, 3).unwrap();
        assert_eq!(full.dim(), 1);
        assert!((full.get(0, 0) - a.det()).abs() < 1e-10);
    }

    #[test]
    fn compound_trace_is_esym() {
        for n in 2..=5 {
            let a = random_sym(n as u64 + 100, n);
            for k in 1..=n {
                let c = compound_matrix(&a, k).unwrap();
                let e = esym(&a, k).unwrap();
                assert!((c.trace() - e).abs() < 1e-8 * e.abs().max(1.0), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn compound_of_psd_is_psd() {
        let g: Vec<f64> = (0..16).map(|i| ((i * 7 + 3) % 11) as f64 / 3.0 - 1.5).collect();
        let a = SymMatrix::gram(&g, 4, 4);
        for k in 1..=4 {
            let c = compound_matrix(&a, k).unwrap();
            assert!(c.smallest_eigenvalue().unwrap() > -1e-8 * c.max_abs_entry().max(1.0));
        }
    }

    #[test]
    fn permanent_examples() {
        let ones = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!((permanent(&ones).unwrap() - 2.0).abs() < 1e-12);
        let m = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!((permanent(&m).unwrap() - 8.0).abs() < 1e-12);
        let d = SymMatrix::diagonal(&[2.0, 3.0, 5.0, 7.0]);
        assert!((permanent(&d).unwrap() - 210.0).abs() < 1e-12);
        assert!(permanent(&SymMatrix::identity(15)).is_err());
    }

    /// Naive factorial-sum permanent, the oracle for Ryser's method.
    fn permanent_naive(a: &SymMatrix) -> f64 {
        let mut total = 0.0;
        for_each_permutation(a.dim(), |perm, _| {
            let mut prod = 1.0;
            for (i, &j) in perm.iter().enumerate() {
                prod *= a.get(i, j);
            }
            total += prod;
        });
        total
    }

    #[test]
    fn ryser_matches_naive_permanent() {
        for n in 1..=7 {
            let a = random_sym(n as u64 * 13 + 5, n);
            let fast = permanent(&a).unwrap();
            let slow = permanent_naive(&a);
            assert!(
                (fast - slow).abs() < 1e-10 * slow.abs().max(1.0),
                "n={n}: {fast} vs {slow}"
            );
        }
    }

    #[test]
    fn immanant_characters() {
        let a = SymMatrix::from_rows(&[vec![3.0, 1.5], vec![1.5, 2.0]]).unwrap();
        // sign character: determinant ac - b^2
        let d = immanant(&a, &CharacterSpec::Sign).unwrap();
        assert!((d - (3.0 * 2.0 - 1.5 * 1.5)).abs() < 1e-12);
        // trivial character: permanent
        let ones = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!((immanant(&ones, &CharacterSpec::Trivial).unwrap() - 2.0).abs() < 1e-12);
        // identity matrix: only the identity permutation contributes
        let mut map = HashMap::new();
        map.insert(vec![0usize, 1, 2], 2.5);
        map.insert(vec![0usize, 2, 1], -1.0);
        map.insert(vec![1usize, 0, 2], 0.0);
        map.insert(vec![1usize, 2, 0], 0.25);
        map.insert(vec![2usize, 0, 1], 4.0);
        map.insert(vec![2usize, 1, 0], 1.0);
        let chi = CharacterSpec::Custom(map);
        let v = immanant(&SymMatrix::identity(3), &chi).unwrap();
        assert!((v - 2.5).abs() < 1e-15);
    }

    #[test]
    fn immanant_custom_missing_entry() {
        let chi = CharacterSpec::Custom(HashMap::new());
        assert!(matches!(
            immanant(&SymMatrix::identity(2), &chi),
            Err(Error::InvalidCharacter(_))
        ));
    }

    #[test]
    fn immanant_agrees_with_det_and_permanent() {
        for n in 2..=6 {
            let a = random_sym(n as u64 * 17 + 2, n);
            let det = immanant(&a, &CharacterSpec::Sign).unwrap();
            let en = esym(&a, n).unwrap();
            assert!((det - en).abs() < 1e-10 * en.abs().max(1.0), "sign n={n}");
            let per = immanant(&a, &CharacterSpec::Trivial).unwrap();
            let ryser = permanent(&a).unwrap();
            assert!((per - ryser).abs() < 1e-10 * ryser.abs().max(1.0), "trivial n={n}");
        }
    }

    #[test]
    fn tensor_power_examples() {
        let i2 = SymMatrix::identity(2);
        assert_eq!(tensor_power(&i2, 2).unwrap(), SymMatrix::identity(4));
        let d = tensor_power(&SymMatrix::diagonal(&[1.0, 2.0]), 2).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| d.get(i, i)).collect();
        assert_eq!(diag, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(tensor_power(&SymMatrix::identity(8), 5).is_err());
        assert!(tensor_power(&i2, 0).is_err());
    }

    #[test]
    fn tensor_power_eigenvalues_are_products() {
        let a = random_sym(99, 3);
        let lam = a.eigenvalues().unwrap();
        let mut expected: Vec<f64> = Vec::new();
        for &x in &lam {
            for &y in &lam {
                expected.push(x * y);
            }
        }
        expected.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let got = tensor_power(&a, 2).unwrap().eigenvalues().unwrap();
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-7, "{g} vs {e}");
        }
    }

    #[test]
    fn tensor_power_preserves_psd() {
        let g: Vec<f64> = (0..4).map(|i| (i as f64) * 0.5 - 0.75).collect();
        let a = SymMatrix::gram(&g, 2, 2);
        let t = tensor_power(&a, 3).unwrap();
        assert!(t.smallest_eigenvalue().unwrap() > -1e-9 * t.max_abs_entry().max(1.0));
    }

    #[test]
    fn mixed_tensor_examples() {
        let v = random_sym(4, 2);
        // k = l = 0 keeps V untouched
        assert_eq!(mixed_tensor(&SymMatrix::identity(2), 0, &v, 0).unwrap(), v);
        let i2 = SymMatrix::identity(2);
        assert_eq!(mixed_tensor(&i2, 1, &i2, 0).unwrap(), SymMatrix::identity(4));
        // 1x1 blocks multiply through
        let x = SymMatrix::diagonal(&[2.0]);
        let w = SymMatrix::diagonal(&[3.0]);
        let m = mixed_tensor(&x, 1, &w, 1).unwrap();
        assert_eq!(m.dim(), 1);
        assert_eq!(m.get(0, 0), 12.0);
    }

    #[test]
    fn subset_sum_deterministic() {
        let mats = vec![random_sym(1, 2), random_sym(2, 2), random_sym(3, 2)];
        let base = random_sym(9, 2);
        for s in subsets_by_size(3) {
            let m = SymMatrix::subset_sum(&base, &mats, &s).unwrap();
            assert_eq!(m.dim(), 2);
        }
    }

    proptest! {
        #[test]
        fn prop_gram_matrices_are_psd(seed in 0u64..500) {
            let n = 2 + (seed % 3) as usize;
            let g: Vec<f64> = (0..n * n)
                .map(|i| (((seed * 37 + i as u64 * 101) % 1000) as f64) / 250.0 - 2.0)
                .collect();
            let a = SymMatrix::gram(&g, n, n);
            let min = a.smallest_eigenvalue().unwrap();
            prop_assert!(min > -1e-9 * a.max_abs_entry().max(1.0));
        }

        #[test]
        fn prop_eigen_trace_identity(seed in 0u64..500) {
            let n = 2 + (seed % 4) as usize;
            let a = random_sym(seed, n);
            let lam = a.eigenvalues().unwrap();
            let sum: f64 = lam.iter().sum();
            let scale = a.max_abs_entry().max(1.0) * n as f64;
            prop_assert!((sum - a.trace()).abs() < 1e-12 * scale);
        }
    }
}
