//! Small dense/sparse complex matrix helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Entrywise Hermiticity defect `max|A - A†| / max|A|` (0 for the zero matrix).
pub fn hermiticity_defect_max(m: &CMat) -> f64 {
    let scale = max_abs(m);
    if scale == 0.0 {
        return 0.0;
    }
    max_abs(&(m - m.adjoint())) / scale
}

/// Frobenius Hermiticity defect `‖A - A†‖_F / ‖A‖_F`.
pub fn hermiticity_defect_frobenius(m: &CMat) -> f64 {
    let scale = frobenius(m);
    if scale == 0.0 {
        return 0.0;
    }
    frobenius(&(m - m.adjoint())) / scale
}

/// Symmetrize a numerically Hermitian matrix.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5)
}

pub fn unit_vector(dim: usize, k: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    v[k] = ONE;
    v
}

/// Matrix exponential of a Hermitian matrix through its eigendecomposition,
/// `exp(t·A) = V exp(tΛ) V†`.
pub fn hermitian_function(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let eig = nalgebra::SymmetricEigen::new(hermitian_part(m));
    let v = &eig.eigenvectors;
    let d = CMat::from_diagonal(&eig.eigenvalues.map(|x| c(f(x))));
    v * d * v.adjoint()
}

/// Sparse matrix stored as `(row, col, value)` triplets; used for the
/// configuration creation operators, which have at most one nonzero per column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    pub dim: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    pub fn new(dim: usize, mut entries: Vec<(usize, usize, C64)>) -> Self {
        entries.retain(|e| e.2 != ZERO);
        entries.sort_by_key(|e| (e.1, e.0));
        Self { dim, entries }
    }

    pub fn from_dense(m: &CMat) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != ZERO {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::new(m.nrows(), entries)
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::new(
            self.dim,
            self.entries.iter().map(|&(i, j, v)| (j, i, v.conj())).collect(),
        )
    }

    pub fn apply(&self, x: &CVec) -> CVec {
        let mut y = CVec::zeros(self.dim);
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
        y
    }

    /// Accumulate `alpha · self` into a dense matrix.
    pub fn add_scaled_to(&self, alpha: C64, out: &mut CMat) {
        for &(i, j, v) in &self.entries {
            out[(i, j)] += alpha * v;
        }
    }

    pub fn matmul(&self, other: &SparseOp) -> SparseOp {
        use std::collections::HashMap;
        // index `other` by row
        let mut by_row: HashMap<usize, Vec<(usize, C64)>> = HashMap::new();
        for &(k, j, v) in &other.entries {
            by_row.entry(k).or_default().push((j, v));
        }
        let mut acc: HashMap<(usize, usize), C64> = HashMap::new();
        for &(i, k, a) in &self.entries {
            if let Some(row) = by_row.get(&k) {
                for &(j, b) in row {
                    *acc.entry((i, j)).or_insert(ZERO) += a * b;
                }
            }
        }
        SparseOp::new(self.dim, acc.into_iter().map(|((i, j), v)| (i, j, v)).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.2.norm()).fold(0.0, f64::max)
    }

    /// Max-abs entry of `self - other`.
    pub fn max_abs_diff(&self, other: &SparseOp) -> f64 {
        use std::collections::HashMap;
        let mut acc: HashMap<(usize, usize), C64> = HashMap::new();
        for &(i, j, v) in &self.entries {
            *acc.entry((i, j)).or_insert(ZERO) += v;
        }
        for &(i, j, v) in &other.entries {
            *acc.entry((i, j)).or_insert(ZERO) -= v;
        }
        acc.values().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &SparseOp) -> SparseOp {
        let db = other.dim;
        let mut entries = Vec::with_capacity(self.entries.len() * other.entries.len());
        for &(i, j, a) in &self.entries {
            for &(k, l, b) in &other.entries {
                entries.push((i * db + k, j * db + l, a * b));
            }
        }
        SparseOp::new(self.dim * db, entries)
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(dim, (0..dim).map(|i| (i, i, ONE)).collect())
    }
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Reciprocal condition estimate `σ_min / σ_max` from a singular value decomposition.
pub fn rcond(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_product_matches_dense() {
        let a = SparseOp::new(3, vec![(1, 0, c(2.0)), (2, 1, C64::new(0.0, 1.0))]);
        let b = SparseOp::new(3, vec![(1, 0, c(1.0)), (2, 2, c(3.0))]);
        let dense = a.to_dense() * b.to_dense();
        assert_eq!(a.matmul(&b).to_dense(), dense);
        assert_eq!(a.adjoint().to_dense(), a.to_dense().adjoint());
    }

    #[test]
    fn kron_matches_dense() {
        let a = SparseOp::new(2, vec![(1, 0, c(1.0))]);
        let b = SparseOp::new(3, vec![(2, 1, c(5.0)), (0, 0, c(-1.0))]);
        assert_eq!(a.kron(&b).to_dense(), kron(&a.to_dense(), &b.to_dense()));
    }

    #[test]
    fn hermitian_function_exponentiates_diagonal() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![c(2f64.ln()), c(0.0)]));
        let e = hermitian_function(&m, |x| (2.0 * x).exp());
        assert!((e[(0, 0)].re - 4.0).abs() < 1e-14);
        assert!((e[(1, 1)].re - 1.0).abs() < 1e-14);
    }
}
