//! Small combinatorial helpers: binomial coefficients, subset enumeration
//! in a fixed deterministic order, and permutation enumeration.

/// Binomial coefficient as f64 (exact for every value that fits a f64
/// mantissa, which covers all desk-scale uses here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// All subsets of {0, .., n-1} ordered by increasing size and
/// lexicographically within each size, the empty set first.
///
/// The fixed order makes every alternating subset sum in the crate
/// deterministic.
pub fn subsets_by_size(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(1 << n);
    for size in 0..=n {
        k_subsets(n, size, &mut out);
    }
    out
}

/// All k-element subsets of {0, .., n-1} in lexicographic order, appended
/// to `out`.
pub fn k_subsets(n: usize, k: usize, out: &mut Vec<Vec<usize>>) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        if k == 0 {
            return;
        }
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Lexicographic enumeration of all permutations of {0, .., n-1} together
/// with their signs. Calls `f(perm, sign)` for each.
pub fn for_each_permutation<F: FnMut(&[usize], f64)>(n: usize, mut f: F) {
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        f(&perm, permutation_sign(&perm));
        if !next_permutation(&mut perm) {
            break;
        }
    }
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Sign of a permutation via inversion counting.
pub fn permutation_sign(perm: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(0, 0), 1.0);
        assert_eq!(binomial(4, 5), 0.0);
        assert_eq!(binomial(200, 100), 9.054851465610328e58);
    }

    #[test]
    fn subset_order_is_size_then_lex() {
        let s = subsets_by_size(3);
        let expect: Vec<Vec<usize>> = vec![
            vec![],
            vec![0],
            vec![1],
            vec![2],
            vec![0, 1],
            vec![0, 2],
            vec![1, 2],
            vec![0, 1, 2],
        ];
        assert_eq!(s, expect);
    }

    #[test]
    fn subset_count() {
        assert_eq!(subsets_by_size(6).len(), 64);
    }

    #[test]
    fn permutation_enumeration() {
        let mut count = 0usize;
        let mut sign_sum = 0.0;
        for_each_permutation(4, |_, s| {
            count += 1;
            sign_sum += s;
        });
        assert_eq!(count, 24);
        assert_eq!(sign_sum, 0.0);
    }

    #[test]
    fn identity_sign_positive() {
        assert_eq!(permutation_sign(&[0, 1, 2, 3]), 1.0);
        assert_eq!(permutation_sign(&[1, 0, 2, 3]), -1.0);
    }
}
