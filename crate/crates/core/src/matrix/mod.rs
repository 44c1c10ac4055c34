//! Real symmetric matrices and the matrix functionals the inequality
//! evaluators are stated in: Loewner comparisons, elementary symmetric
//! functions, determinant, permanent, immanants, compound matrices and
//! Kronecker (tensor) powers.

mod eig;
mod ops;

pub use eig::sym_eigenvalues_flat;
pub use ops::{
    compound_matrix, esym, esym_all, esym_principal_minors, esym_with_bound, immanant,
    loewner_margin, mixed_tensor, permanent, tensor_power, CharacterSpec, IMMANANT_DIM_CAP,
    PERMANENT_DIM_CAP, TENSOR_DIM_CAP,
};

use crate::error::Error;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Asymmetry above this threshold triggers a warning when parsing matrix
/// text input.
pub const PARSE_ASYMMETRY_WARN: f64 = 1e-12;

/// A real symmetric matrix. Entries are symmetrized on construction, so
/// `get(i, j) == get(j, i)` holds exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Build from row-major entries, averaging the two triangles.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch("empty matrix".into()));
        }
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "expected {dim} columns, found {}",
                    r.len()
                )));
            }
        }
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = 0.5 * (rows[i][j] + rows[j][i]);
            }
        }
        Ok(Self { dim, data })
    }

    pub fn from_flat(dim: usize, entries: &[f64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for dim {dim}, found {}",
                dim * dim,
                entries.len()
            )));
        }
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = 0.5 * (entries[i * dim + j] + entries[j * dim + i]);
            }
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let dim = entries.len();
        let mut m = Self::zeros(dim);
        for (i, &v) in entries.iter().enumerate() {
            m.data[i * dim + i] = v;
        }
        m
    }

    /// Gram matrix `G * G^T` of a `rows x cols` factor; positive
    /// semidefinite by construction, rank at most `cols`.
    pub fn gram(factor: &[f64], rows: usize, cols: usize) -> Self {
        assert_eq!(factor.len(), rows * cols);
        let mut m = Self::zeros(rows);
        for i in 0..rows {
            for j in 0..=i {
                let mut s = 0.0;
                for k in 0..cols {
                    s += factor[i * cols + k] * factor[j * cols + k];
                }
                m.data[i * rows + j] = s;
                m.data[j * rows + i] = s;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].to_vec())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Hadamard bound: the product of row Euclidean norms, an upper bound
    /// for `|det|` and the magnitude the elimination actually computes at.
    pub fn hadamard_bound(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.get(i, j) * self.get(i, j))
                    .sum::<f64>()
                    .sqrt()
            })
            .product()
    }

    /// Product of row 1-norms; bounds any unit-character immanant of the
    /// matrix (each permutation product is dominated term by term).
    pub fn row_l1_product(&self) -> f64 {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).abs()).sum::<f64>())
            .product()
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { dim: self.dim, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { dim: self.dim, data })
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|a| a * c).collect() }
    }

    /// Sum of `base` and the matrices selected by `subset`, added in index
    /// order.
    pub fn subset_sum(base: &Self, mats: &[Self], subset: &[usize]) -> Result<Self> {
        let mut acc = base.clone();
        for &i in subset {
            acc = acc.add(&mats[i])?;
        }
        Ok(acc)
    }

    /// Eigenvalues sorted ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eig::sym_eigenvalues_flat(&self.data, self.dim)
    }

    pub fn smallest_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// Spectral radius (= operator 2-norm for symmetric matrices).
    pub fn spectral_radius(&self) -> Result<f64> {
        let ev = self.eigenvalues()?;
        Ok(ev[0].abs().max(ev[ev.len() - 1].abs()))
    }

    /// Determinant via LU factorization with partial pivoting.
    pub fn det(&self) -> f64 {
        det_flat(&self.data, self.dim)
    }

    /// Kronecker product; symmetric whenever both factors are.
    pub fn kron(&self, other: &Self) -> Self {
        let n = self.dim;
        let m = other.dim;
        let dim = n * m;
        let mut data = vec![0.0; dim * dim];
        for i in 0..n {
            for j in 0..n {
                let a = self.data[i * n + j];
                if a == 0.0 {
                    continue;
                }
                for k in 0..m {
                    let row = (i * m + k) * dim + j * m;
                    for l in 0..m {
                        data[row + l] = a * other.data[k * m + l];
                    }
                }
            }
        }
        Self { dim, data }
    }

    /// Plain-text form: first line the dimension, then one line per row.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.dim);
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| format!("{:?}", self.get(i, j)))
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Determinant of a row-major square matrix via LU with partial pivoting.
pub(crate) fn det_flat(data: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut a = data.to_vec();
    let mut det = 1.0f64;
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].abs();
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                pivot = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for c in 0..n {
                a.swap(pivot * n + c, col * n + c);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
        }
    }
    det
}

/// Result of parsing matrix text input.
pub struct ParsedMatrix {
    pub matrix: SymMatrix,
    /// Largest `|a_ij - a_ji|` seen before symmetrization.
    pub asymmetry: f64,
}

/// Parse one or more matrices from the plain-text format: for each block,
/// the first token is the dimension `N`, followed by `N * N` whitespace
/// separated decimals.
pub fn parse_matrices(text: &str) -> Result<Vec<ParsedMatrix>> {
    let mut tokens = text.split_whitespace().peekable();
    let mut out = Vec::new();
    while tokens.peek().is_some() {
        let dim_tok = tokens.next().unwrap();
        let dim: usize = dim_tok
            .parse()
            .map_err(|_| Error::Config(format!("expected matrix dimension, found '{dim_tok}'")))?;
        if dim == 0 {
            return Err(Error::Config("matrix dimension must be positive".into()));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for _ in 0..dim * dim {
            let tok = tokens
                .next()
                .ok_or_else(|| Error::Config("unexpected end of matrix input".into()))?;
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Config(format!("bad matrix entry '{tok}'")))?;
            entries.push(v);
        }
        let mut asymmetry = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                asymmetry = asymmetry.max((entries[i * dim + j] - entries[j * dim + i]).abs());
            }
        }
        let matrix = SymMatrix::from_flat(dim, &entries)?;
        out.push(ParsedMatrix { matrix, asymmetry });
    }
    if out.is_empty() {
        return Err(Error::Config("no matrices found in input".into()));
    }
    Ok(out)
}
