//! Right/left eigen-doublet of a (generally non-Hermitian) operator and
//! metric reconstruction from it.

use nalgebra::{Schur, SymmetricEigen};
use num_complex::ComplexFloat;

use super::metric::{quasi_hermiticity_defect, MetricOperator};
use crate::config_space::LinearOperator;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64};

/// Biorthonormality target.
pub const BIORTHONORMALITY_TOLERANCE: f64 = 1e-10;
/// Relative eigen-residual target.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Eigenvector-matrix condition number above which the operator counts as defective.
pub const CONDITION_LIMIT: f64 = 1e10;
/// Imaginary parts below this (relative) count as real.
pub const REAL_SPECTRUM_TOLERANCE: f64 = 1e-8;

/// Eigenvalues of a general complex matrix from its Schur form.
pub fn general_eigenvalues(m: &CMat) -> Vec<C64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let (_, t) = Schur::new(m.clone()).unpack();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let sub = if i + 1 < n { t[(i + 1, i)].abs() } else { 0.0 };
        let scale = t[(i, i)].abs() + if i + 1 < n { t[(i + 1, i + 1)].abs() } else { 0.0 };
        if i + 1 < n && sub > f64::EPSILON * scale.max(f64::MIN_POSITIVE) {
            let (a, b, cc, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let half_tr = (a + d) / c(2.0);
            let disc = (((a - d) / c(2.0)).powi(2) + b * cc).sqrt();
            out.push(half_tr + disc);
            out.push(half_tr - disc);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    out
}

fn sort_key(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Paired right eigenvectors `|Φ_n⟩` and left eigenrows `⟨Φ̃_n|` with
/// `⟨Φ̃_m|Φ_n⟩ = δ_mn`.
#[derive(Debug, Clone)]
pub struct Doublet {
    /// Eigenvalues sorted by real, then imaginary part.
    pub eigenvalues: Vec<C64>,
    /// Right eigenvectors as unit-norm columns.
    pub right: CMat,
    /// Left eigenvectors as rows (row `n` pairs with column `n`).
    pub left: CMat,
    /// Cluster id of each eigenvalue; equal ids mark a degenerate cluster.
    pub cluster: Vec<usize>,
    /// The decomposed operator.
    pub operator: CMat,
    pub condition: f64,
}

impl Doublet {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `max |⟨Φ̃_m|Φ_n⟩ − δ_mn|`.
    pub fn biorthonormality_defect(&self) -> f64 {
        let n = self.len();
        linalg::max_abs(&(&self.left * &self.right - CMat::identity(n, n)))
    }

    /// `max |Σ_n |Φ_n⟩⟨Φ̃_n| − I|`.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.len();
        linalg::max_abs(&(&self.right * &self.left - CMat::identity(n, n)))
    }

    /// Largest relative right and left eigen-residuals.
    pub fn residuals(&self) -> (f64, f64) {
        let scale = linalg::frobenius(&self.operator).max(f64::MIN_POSITIVE);
        let mut right: f64 = 0.0;
        let mut left: f64 = 0.0;
        for (k, &e) in self.eigenvalues.iter().enumerate() {
            let r = self.right.column(k);
            let res = (&self.operator * r - r * e).norm() / (scale * r.norm());
            right = right.max(res);
            let l = self.left.row(k);
            let res = (l * &self.operator - l * e).norm() / (scale * l.norm());
            left = left.max(res);
        }
        (right, left)
    }

    pub fn max_imaginary(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.im.abs()).fold(0.0, f64::max)
    }
}

/// Solve both `h|Φ_n⟩ = E_n|Φ_n⟩` and `⟨Φ̃_n|h = E_n⟨Φ̃_n|`, biorthonormalized.
///
/// Hermitian input takes the orthonormal eigendecomposition directly. In the
/// general case eigenvalues come from the Schur form; each cluster of equal
/// eigenvalues gets its right and left null spaces of `h − μ` from one SVD,
/// and the cluster is biorthonormalized by the inverse of its overlap matrix.
pub fn doublet_eigensolve(h: &LinearOperator) -> Result<Doublet> {
    let m = h.matrix();
    let n = m.nrows();
    if linalg::hermiticity_defect_max(m) <= 1e-12 {
        return hermitian_doublet(m);
    }
    let scale = linalg::max_abs(m).max(f64::MIN_POSITIVE);
    let mut values = general_eigenvalues(m);
    values.sort_by(sort_key);

    // cluster consecutive (sorted) eigenvalues lying within tol of the cluster head
    let tol = 1e-7 * scale.max(1.0);
    let mut clusters: Vec<Vec<C64>> = Vec::new();
    for v in values {
        match clusters.last_mut() {
            Some(cl) if (cl[0] - v).abs() <= tol => cl.push(v),
            _ => clusters.push(vec![v]),
        }
    }

    let mut right = CMat::zeros(n, n);
    let mut left = CMat::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    let mut cluster_ids = Vec::with_capacity(n);
    let mut col = 0;
    for (cid, cl) in clusters.iter().enumerate() {
        let k = cl.len();
        let mu = cl.iter().sum::<C64>() / c(k as f64);
        let shifted = m - CMat::identity(n, n) * mu;
        let svd = shifted.svd(true, true);
        let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        let null_tol = 1e-6 * scale.max(1.0);
        if svd.singular_values[order[k - 1]] > null_tol {
            return Err(Error::DefectiveMatrix(format!(
                "eigenvalue {mu} has algebraic multiplicity {k} but a smaller eigenspace"
            )));
        }
        let mut r_c = CMat::zeros(n, k);
        let mut l_c = CMat::zeros(k, n);
        for (slot, &idx) in order.iter().take(k).enumerate() {
            r_c.set_column(slot, &vt.row(idx).adjoint());
            l_c.set_row(slot, &u.column(idx).adjoint());
        }
        let overlap = &l_c * &r_c;
        let rc = linalg::rcond(&overlap);
        if rc < 1.0 / CONDITION_LIMIT {
            return Err(Error::DefectiveMatrix(format!(
                "left and right eigenvectors of {mu} are nearly orthogonal (rcond {rc:.3e})"
            )));
        }
        let inv = overlap.try_inverse().ok_or_else(|| Error::DefectiveMatrix(format!("singular overlap at {mu}")))?;
        let l_c = inv * l_c;
        for slot in 0..k {
            let r = r_c.column(slot).into_owned();
            let norm = r.norm();
            let r = r / c(norm);
            let l = l_c.row(slot) * c(norm);
            let e = mu;
            right.set_column(col, &r);
            left.set_row(col, &l);
            eigenvalues.push(e);
            cluster_ids.push(cid);
            col += 1;
        }
    }

    let condition = spectral_norm(&right) * spectral_norm(&left);
    if condition > CONDITION_LIMIT {
        return Err(Error::DefectiveMatrix(format!(
            "eigenvector condition number {condition:.3e}"
        )));
    }
    // The cluster-wise left rows served to detect near-defective clusters.
    // For a complete system the biorthonormal left rows are exactly the rows
    // of R⁻¹, which is far more accurate than the per-cluster left null spaces
    // once the eigenvector matrix is moderately ill-conditioned.
    let left = right
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::DefectiveMatrix("singular eigenvector matrix".into()))?;
    for (k, e) in eigenvalues.iter_mut().enumerate() {
        *e = (left.row(k) * m * right.column(k))[(0, 0)];
    }
    Ok(Doublet {
        eigenvalues,
        right,
        left,
        cluster: cluster_ids,
        operator: m.clone(),
        condition,
    })
}

fn spectral_norm(m: &CMat) -> f64 {
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

fn hermitian_doublet(m: &CMat) -> Result<Doublet> {
    let n = m.nrows();
    let eig = SymmetricEigen::new(linalg::hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut right = CMat::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (k, &i) in order.iter().enumerate() {
        right.set_column(k, &eig.eigenvectors.column(i));
        eigenvalues.push(c(eig.eigenvalues[i]));
    }
    let left = right.adjoint();
    let mut cluster = Vec::with_capacity(n);
    let tol = 1e-7 * linalg::max_abs(m).max(1.0);
    let mut cid = 0;
    for k in 0..n {
        if k > 0 && (eigenvalues[k] - eigenvalues[k - 1]).abs() > tol {
            cid += 1;
        }
        cluster.push(cid);
    }
    Ok(Doublet {
        eigenvalues,
        right,
        left,
        cluster,
        operator: m.clone(),
        condition: 1.0,
    })
}

/// `Θ = Σ_n w_n ⟨Φ̃_n|†⟨Φ̃_n|` with unit-normalized left rows. `weights`
/// (all positive) select a different member of the family of admissible
/// metrics; `None` means all ones.
pub fn metric_from_spectrum(doublet: &Doublet, weights: Option<&[f64]>) -> Result<MetricOperator> {
    let n = doublet.operator.nrows();
    if doublet.len() != n || doublet.left.nrows() != n {
        return Err(Error::IncompleteSystem(format!("{} of {n} eigenpairs", doublet.len())));
    }
    if doublet.completeness_defect() > 1e-8 {
        return Err(Error::IncompleteSystem(format!(
            "completeness defect {:.3e}",
            doublet.completeness_defect()
        )));
    }
    let max_imag = doublet
        .eigenvalues
        .iter()
        .map(|e| e.im.abs() / e.abs().max(1.0))
        .fold(0.0, f64::max);
    if max_imag > REAL_SPECTRUM_TOLERANCE {
        return Err(Error::ComplexSpectrum { max_imag });
    }
    if let Some(w) = weights {
        if w.len() != n || w.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::InvalidSpec("metric weights must be n positive numbers".into()));
        }
    }
    let mut theta = CMat::zeros(n, n);
    for k in 0..n {
        let row = doublet.left.row(k);
        let row = row / c(row.norm());
        let w = weights.map_or(1.0, |w| w[k]);
        theta += row.adjoint() * &row * c(w);
    }
    let metric = MetricOperator::new(linalg::hermitian_part(&theta))?;
    let defect = quasi_hermiticity_defect(&LinearOperator::new(doublet.operator.clone()), &metric);
    if defect > 1e-8 {
        return Err(Error::NotQuasiHermitian { defect });
    }
    Ok(metric)
}

/// `|E_a − E_b| ≤ tol · max(1, |E_b|)` elementwise after sorting both by real part.
pub fn spectra_match(a: &[C64], b: &[f64], tol: f64) -> (bool, f64) {
    let mut a: Vec<C64> = a.to_vec();
    a.sort_by(sort_key);
    let mut b = b.to_vec();
    b.sort_by(f64::total_cmp);
    if a.len() != b.len() {
        return (false, f64::INFINITY);
    }
    let worst = a
        .iter()
        .zip(&b)
        .map(|(x, &y)| (x - c(y)).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max);
    (worst <= tol, worst)
}
