//! Brute-force eigensolvers: cyclic complex Jacobi for Hermitian matrices,
//! Hessenberg + shifted QR with inverse-iteration vectors otherwise.

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64};

const JACOBI_MAX_SWEEPS: usize = 100;
/// Per-pair residual contract, relative to `‖A‖_F`.
pub const RESIDUAL_CONTRACT: f64 = 1e-8;

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

fn fro(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues, eigenvectors (columns) and per-pair residuals.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    /// Sorted ascending by real part.
    pub eigenvalues: Vec<C64>,
    pub vectors: CMat,
    /// `‖Av − λv‖ / ‖A‖_F` per pair (unit `v`).
    pub residuals: Vec<f64>,
    pub hermitian: bool,
}

impl Eigensystem {
    pub fn real_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    /// Build from unsorted pairs, sort and validate the residual contract.
    fn assemble(a: &CMat, pairs: Vec<(C64, CVec)>, hermitian: bool) -> Result<Self> {
        let n = a.nrows();
        let mut pairs = pairs;
        pairs.sort_by(|x, y| x.0.re.total_cmp(&y.0.re).then(x.0.im.total_cmp(&y.0.im)));
        let scale = fro(a).max(f64::MIN_POSITIVE);
        let mut vectors = CMat::zeros(n, n);
        let mut eigenvalues = Vec::with_capacity(n);
        let mut residuals = Vec::with_capacity(n);
        for (k, (lambda, v)) in pairs.into_iter().enumerate() {
            let res = (a * &v - &v * lambda).norm() / (scale * v.norm());
            if !(res <= RESIDUAL_CONTRACT) {
                return Err(Error::ConvergenceFailure(format!(
                    "eigenpair {k} residual {res:.3e} exceeds {RESIDUAL_CONTRACT:.0e}"
                )));
            }
            vectors.set_column(k, &v);
            eigenvalues.push(lambda);
            residuals.push(res);
        }
        Ok(Self {
            eigenvalues,
            vectors,
            residuals,
            hermitian,
        })
    }
}

/// Cyclic Jacobi for a Hermitian matrix; returns real eigenvalues and an
/// orthonormal eigenvector matrix.
pub fn jacobi_hermitian(a: &CMat) -> Result<Eigensystem> {
    let n = a.nrows();
    let mut m = a.clone();
    // exact Hermitian symmetrization of the working copy
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    let mut v = CMat::identity(n, n);
    let total = fro(&m);
    let mut converged = n <= 1;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| m[(p, q)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * total || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let b = apq.norm();
                if b == 0.0 {
                    continue;
                }
                let phase = apq / b;
                let dq = phase.conj();
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // columns: A ← A U
                for i in 0..n {
                    let (x, y) = (m[(i, p)], m[(i, q)]);
                    m[(i, p)] = x * cs - y * dq * sn;
                    m[(i, q)] = x * sn + y * dq * cs;
                    let (x, y) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = x * cs - y * dq * sn;
                    v[(i, q)] = x * sn + y * dq * cs;
                }
                // rows: A ← U† A
                for j in 0..n {
                    let (x, y) = (m[(p, j)], m[(q, j)]);
                    m[(p, j)] = x * cs - y * phase * sn;
                    m[(q, j)] = x * sn + y * phase * cs;
                }
                m[(p, q)] = czero();
                m[(q, p)] = czero();
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
            }
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure(format!(
            "Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )));
    }
    let pairs = (0..n)
        .map(|k| (C64::new(m[(k, k)].re, 0.0), v.column(k).into_owned()))
        .collect();
    let sys = Eigensystem::assemble(a, pairs, true)?;
    let gram = sys.vectors.adjoint() * &sys.vectors;
    let defect = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (gram[(i, j)] - if i == j { C64::new(1.0, 0.0) } else { czero() }).norm())
        .fold(0.0, f64::max);
    if defect > 1e-10 {
        return Err(Error::ConvergenceFailure(format!("eigenvectors not orthonormal ({defect:.3e})")));
    }
    Ok(sys)
}

/// Householder reduction to upper Hessenberg form.
fn hessenberg(a: &CMat) -> CMat {
    let n = a.nrows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha_norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { C64::new(1.0, 0.0) } else { x[0] / x[0].norm() };
        let mut w = x.clone();
        w[0] += phase * alpha_norm;
        let wn = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut w {
            *z /= wn;
        }
        // H ← (I − 2ww†) H (I − 2ww†) acting on indices k+1..n
        for j in 0..n {
            let dot: C64 = (0..w.len()).map(|i| w[i].conj() * h[(k + 1 + i, j)]).sum();
            for i in 0..w.len() {
                h[(k + 1 + i, j)] -= w[i] * dot * 2.0;
            }
        }
        for i in 0..n {
            let dot: C64 = (0..w.len()).map(|j| h[(i, k + 1 + j)] * w[j]).sum();
            for j in 0..w.len() {
                h[(i, k + 1 + j)] -= dot * w[j].conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = czero();
        }
    }
    h
}

/// Eigenvalues of a general matrix by single-shift QR on the Hessenberg form.
pub fn qr_eigenvalues(a: &CMat) -> Result<Vec<C64>> {
    let n = a.nrows();
    let mut h = hessenberg(a);
    let mut out = Vec::with_capacity(n);
    let mut hi = n;
    let mut iter = 0usize;
    let mut total_iter = 0usize;
    while hi > 0 {
        let top = hi - 1;
        if top == 0 {
            out.push(h[(0, 0)]);
            break;
        }
        // locate the start of the active unreduced block
        let mut lo = top;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if sub <= f64::EPSILON * diag.max(f64::MIN_POSITIVE) {
                h[(lo, lo - 1)] = czero();
                break;
            }
            lo -= 1;
        }
        if lo == top {
            out.push(h[(top, top)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total_iter += 1;
        if total_iter > 100 * n.max(1) {
            return Err(Error::ConvergenceFailure("QR iteration did not deflate".into()));
        }
        let mu = if iter % 11 == 10 {
            // exceptional shift
            h[(top, top)] + C64::new(0.75 * h[(top, top - 1)].norm(), 0.0)
        } else {
            let (a11, a12, a21, a22) = (h[(top - 1, top - 1)], h[(top - 1, top)], h[(top, top - 1)], h[(top, top)]);
            // Wilkinson: the eigenvalue of the trailing 2×2 closer to a22
            let half = (a11 - a22) * 0.5;
            let disc = (half * half + a12 * a21).sqrt();
            let mid = (a11 + a22) * 0.5;
            let (e1, e2) = (mid + disc, mid - disc);
            if (e1 - a22).norm() <= (e2 - a22).norm() {
                e1
            } else {
                e2
            }
        };
        for k in lo..=top {
            h[(k, k)] -= mu;
        }
        let mut rotations = Vec::with_capacity(top - lo);
        for k in lo..top {
            let (x, y) = (h[(k, k)], h[(k + 1, k)]);
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (cs, sn) = if r == 0.0 {
                (1.0, czero())
            } else if x.norm() == 0.0 {
                (0.0, C64::new(1.0, 0.0))
            } else {
                (x.norm() / r, (x / x.norm()) * y.conj() / r)
            };
            for j in k..=top {
                let (p, q) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = p * cs + sn * q;
                h[(k + 1, j)] = -sn.conj() * p + q * cs;
            }
            rotations.push((cs, sn));
        }
        for (idx, k) in (lo..top).enumerate() {
            let (cs, sn) = rotations[idx];
            for i in lo..=(k + 1).min(top) {
                let (x, y) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = x * cs + y * sn.conj();
                h[(i, k + 1)] = -x * sn + y * cs;
            }
        }
        for k in lo..=top {
            h[(k, k)] += mu;
        }
    }
    Ok(out)
}

/// LU with partial pivoting; solves in place.
struct Lu {
    lu: CMat,
    perm: Vec<usize>,
}

impl Lu {
    fn new(a: &CMat) -> Self {
        let n = a.nrows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let tiny = f64::EPSILON * fro(a).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| lu[(i, k)].norm().total_cmp(&lu[(j, k)].norm())).unwrap();
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
            }
            if lu[(k, k)].norm() < tiny {
                lu[(k, k)] = C64::new(tiny, 0.0);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Self { lu, perm }
    }

    fn solve(&self, b: &CVec) -> CVec {
        let n = b.len();
        let mut x = CVec::from_iterator(n, self.perm.iter().map(|&p| b[p]));
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }
}

/// Eigenvectors by inverse iteration; vectors of (near-)equal eigenvalues are
/// kept orthogonal to each other.
pub fn general_eigensystem(a: &CMat) -> Result<Eigensystem> {
    let n = a.nrows();
    let values = qr_eigenvalues(a)?;
    let scale = fro(a).max(1.0);
    let mut pairs: Vec<(C64, CVec)> = Vec::with_capacity(n);
    for (k, &lambda) in values.iter().enumerate() {
        let shift = lambda + C64::new(1e-13 * scale, 1e-13 * scale);
        let mut shifted = a.clone();
        for i in 0..n {
            shifted[(i, i)] -= shift;
        }
        let lu = Lu::new(&shifted);
        let same: Vec<CVec> = pairs
            .iter()
            .filter(|(mu, _)| (mu - lambda).norm() <= 1e-7 * scale)
            .map(|(_, v)| v.clone())
            .collect();
        let mut x = CVec::from_iterator(n, (0..n).map(|i| C64::new(1.0 + ((i * 7 + k * 3) % 5) as f64 * 0.1, 0.1 * i as f64)));
        for _ in 0..4 {
            for v in &same {
                let proj = v.dotc(&x);
                x -= v * proj;
            }
            x = lu.solve(&x);
            let norm = x.norm();
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::ConvergenceFailure("inverse iteration broke down".into()));
            }
            x /= C64::new(norm, 0.0);
        }
        // Rayleigh refinement of the eigenvalue
        let rq = x.dotc(&(a * &x));
        pairs.push((rq, x));
    }
    Eigensystem::assemble(a, pairs, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herm(n: usize, seed: u64) -> CMat {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(next(), 0.0);
            for j in i + 1..n {
                let z = C64::new(next(), next());
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn jacobi_random_hermitian() {
        let m = herm(8, 3);
        let sys = jacobi_hermitian(&m).unwrap();
        let v = &sys.vectors;
        let d = CMat::from_diagonal(&CVec::from_vec(sys.eigenvalues.clone()));
        assert!(fro(&(&m * v - v * d)) <= 1e-8 * fro(&m));
        assert!(fro(&(v.adjoint() * v - CMat::identity(8, 8))) < 1e-12);
        let trace: f64 = (0..8).map(|i| m[(i, i)].re).sum();
        assert!((sys.real_eigenvalues().iter().sum::<f64>() - trace).abs() < 1e-12);
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let sys = jacobi_hermitian(&CMat::identity(5, 5)).unwrap();
        assert!(sys.eigenvalues.iter().all(|z| *z == C64::new(1.0, 0.0)));
    }

    #[test]
    fn qr_matches_triangular_diagonal() {
        let mut m = CMat::zeros(4, 4);
        for i in 0..4 {
            m[(i, i)] = C64::new(i as f64 + 1.0, 0.5 * i as f64);
            for j in i + 1..4 {
                m[(i, j)] = C64::new(0.3, -0.2);
            }
        }
        let mut vals = qr_eigenvalues(&m).unwrap();
        vals.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (i, v) in vals.iter().enumerate() {
            assert!((v - C64::new(i as f64 + 1.0, 0.5 * i as f64)).norm() < 1e-12);
        }
    }

    #[test]
    fn general_solver_on_similar_matrix() {
        // P⁻¹ diag(-1, 0.5, 2, 2) P has the same eigenvalues
        let d = CMat::from_diagonal(&CVec::from_vec(vec![
            C64::new(-1.0, 0.0),
            C64::new(0.5, 0.0),
            C64::new(2.0, 0.0),
            C64::new(2.0, 0.0),
        ]));
        let mut p = herm(4, 9);
        for i in 0..4 {
            p[(i, i)] += C64::new(3.0, 0.0);
        }
        let m = p.clone().try_inverse().unwrap() * d * p;
        let sys = general_eigensystem(&m).unwrap();
        let expected = [-1.0, 0.5, 2.0, 2.0];
        for (z, e) in sys.eigenvalues.iter().zip(expected) {
            assert!((z - C64::new(e, 0.0)).norm() < 1e-9, "{z} vs {e}");
        }
        assert!(sys.max_residual() < 1e-10);
    }
}
