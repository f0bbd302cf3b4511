//! Matrix exponential by scaling and squaring of a Taylor series.

use crate::linalg::{CMat, C64};

fn one_norm(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(A)`; works for any square matrix.
pub fn dense_exp(a: &CMat) -> CMat {
    let n = a.nrows();
    let norm = one_norm(a);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a / C64::new(2f64.powi(squarings), 0.0);
    let mut sum = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..=60 {
        term = &term * &scaled / C64::new(k as f64, 0.0);
        sum += &term;
        if one_norm(&term) <= 1e-18 * one_norm(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_and_rotation() {
        let a = CMat::from_element(1, 1, C64::new(3.0, 0.0));
        assert!((dense_exp(&a)[(0, 0)].re - 3f64.exp()).abs() < 1e-12 * 3f64.exp());
        // exp([[0, -t],[t, 0]]) is a rotation by t
        let t = 2.5;
        let r = CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(-t, 0.0), C64::new(t, 0.0), C64::new(0.0, 0.0)]);
        let e = dense_exp(&r);
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-13);
        assert!((e[(1, 0)].re - t.sin()).abs() < 1e-13);
    }

    #[test]
    fn nilpotent_terminates() {
        let mut s = CMat::zeros(3, 3);
        s[(1, 0)] = C64::new(2.0, 0.0);
        s[(2, 1)] = C64::new(3.0, 0.0);
        let e = dense_exp(&s);
        assert!((e[(2, 0)].re - 3.0).abs() < 1e-13);
        assert!((e[(1, 0)].re - 2.0).abs() < 1e-13);
    }
}
