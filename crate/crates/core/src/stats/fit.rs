use serde::Serialize;

use crate::error::{arg, Error, Result};
use crate::num::{mean, Real};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult<T> {
    /// Ascending degree: `c[0] + c[1] x + c[2] x^2`.
    pub coefficients: Vec<T>,
    pub r_squared: T,
}

impl<T: Real> FitResult<T> {
    pub fn eval(&self, x: T) -> T {
        self.coefficients.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
    }
}

/// Ordinary least squares polynomial fit of degree 1 or 2.
///
/// Solved by modified Gram-Schmidt on the Vandermonde columns.
pub fn fit_polynomial<T: Real>(x: &[T], y: &[T], degree: usize) -> Result<FitResult<T>> {
    if !(1..=2).contains(&degree) {
        return arg(format!("degree must be 1 or 2, got {degree}"));
    }
    if x.len() != y.len() {
        return arg("x and y lengths differ");
    }
    let n = x.len();
    let p = degree + 1;
    if n < p {
        return arg(format!("degree {degree} fit needs at least {p} points"));
    }

    let mut q: Vec<Vec<T>> = (0..p)
        .map(|k| x.iter().map(|&xi| xi.powi(k as i32)).collect())
        .collect();
    let mut r = vec![vec![T::zero(); p]; p];
    let eps = T::epsilon() * T::from_usize_lossy(64 * n);
    for k in 0..p {
        let col_scale = q[k].iter().fold(T::zero(), |m, v| m.max(v.abs())).max(T::one());
        for j in 0..k {
            let d: T = q[j].iter().zip(&q[k]).map(|(&a, &b)| a * b).sum();
            r[j][k] = d;
            let qj = q[j].clone();
            for (v, a) in q[k].iter_mut().zip(qj) {
                *v -= d * a;
            }
        }
        let norm = q[k].iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm <= eps * col_scale * T::from_usize_lossy(n).sqrt() {
            return Err(Error::Singular);
        }
        r[k][k] = norm;
        for v in q[k].iter_mut() {
            *v /= norm;
        }
    }

    let qty: Vec<T> = q.iter().map(|qk| qk.iter().zip(y).map(|(&a, &b)| a * b).sum()).collect();
    let mut coef = vec![T::zero(); p];
    for k in (0..p).rev() {
        let s: T = ((k + 1)..p).map(|j| r[k][j] * coef[j]).sum();
        coef[k] = (qty[k] - s) / r[k][k];
    }

    let fit = FitResult {
        coefficients: coef,
        r_squared: T::zero(),
    };
    let my = mean(y);
    let ss_tot: T = y.iter().map(|&v| (v - my) * (v - my)).sum();
    let ss_res: T = x.iter().zip(y).map(|(&a, &b)| (b - fit.eval(a)).powi(2)).sum();
    let r_squared = if ss_tot > T::zero() {
        T::one() - ss_res / ss_tot
    } else {
        T::one()
    };
    Ok(FitResult { r_squared, ..fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_line() {
        let x = [0.0f64, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let f = fit_polynomial(&x, &y, 1).unwrap();
        assert!((f.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((f.coefficients[1] - 2.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn burst_line_points() {
        let f = fit_polynomial(&[3.0f64, 5.0, 7.0], &[103.8, 172.6, 241.4], 1).unwrap();
        assert!((f.coefficients[0] - 0.6).abs() < 1e-8);
        assert!((f.coefficients[1] - 34.4).abs() < 1e-8);
        assert!((f.r_squared - 1.0).abs() < 1e-10);
    }

    #[test]
    fn quadratic_under_linear() {
        let x = [1.0f64, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        assert!(fit_polynomial(&x, &y, 1).unwrap().r_squared < 1.0);
        let q = fit_polynomial(&x, &y, 2).unwrap();
        assert!((q.coefficients[2] - 1.0).abs() < 1e-10);
        assert!(q.coefficients[0].abs() < 1e-9);
    }

    #[test]
    fn f32_line() {
        let f = fit_polynomial(&[1.0f32, 2.0, 3.0], &[3.0, 5.0, 7.0], 1).unwrap();
        assert!((f.coefficients[1] - 2.0).abs() < 1e-5);
    }

    #[test]
    fn errors() {
        assert!(matches!(fit_polynomial(&[1.0f64, 1.0, 1.0], &[1.0, 2.0, 3.0], 1), Err(Error::Singular)));
        assert!(fit_polynomial(&[1.0f64, 2.0], &[1.0, 2.0], 2).is_err());
        assert!(fit_polynomial(&[1.0f64, 2.0], &[1.0, 2.0], 3).is_err());
        assert!(fit_polynomial(&[1.0f64, 2.0], &[1.0], 1).is_err());
    }

    proptest! {
        #[test]
        fn exact_polynomial_has_unit_r2(
            c0 in -50.0f64..50.0, c1 in -10.0f64..10.0, c2 in -3.0f64..3.0,
            xs in proptest::collection::btree_set(-200i32..200, 4..12),
        ) {
            let x: Vec<f64> = xs.iter().map(|&v| v as f64 / 10.0).collect();
            let y: Vec<f64> = x.iter().map(|v| c0 + c1 * v + c2 * v * v).collect();
            let f = fit_polynomial(&x, &y, 2).unwrap();
            let spread = y.iter().cloned().fold(f64::MIN, f64::max) - y.iter().cloned().fold(f64::MAX, f64::min);
            prop_assume!(spread > 1e-3);
            prop_assert!((f.r_squared - 1.0).abs() < 1e-10, "r2 {}", f.r_squared);
        }

        #[test]
        fn residuals_orthogonal_to_design(
            pts in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 5..30),
        ) {
            let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            if let Ok(f) = fit_polynomial(&x, &y, 2) {
                for k in 0..3 {
                    let dot: f64 = x.iter().zip(&y).map(|(&a, &b)| (b - f.eval(a)) * a.powi(k)).sum();
                    prop_assert!(dot.abs() < 1e-7 * (1.0 + 100f64.powi(k)), "k {k} dot {dot}");
                }
                prop_assert!(f.r_squared <= 1.0 + 1e-12);
            }
        }
    }
}
