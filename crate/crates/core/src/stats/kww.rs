use serde::Serialize;

use crate::error::{arg, Error, Result};
use crate::num::Real;
use crate::stats::fit::fit_polynomial;

pub const KWW_MAX_ITERATIONS: usize = 200;

/// Fitted `A * exp(-(t / tau)^alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KwwFit<T> {
    pub amplitude: T,
    pub timescale: T,
    pub stretch: T,
    pub rmse: T,
    pub iterations: usize,
}

impl<T: Real> KwwFit<T> {
    pub fn eval(&self, t: T) -> T {
        kww(self.amplitude, self.timescale, self.stretch, t)
    }
}

fn kww<T: Real>(a: T, tau: T, alpha: T, t: T) -> T {
    a * (-(t / tau).powf(alpha)).exp()
}

// Parameters are (A, ln tau, ln alpha) so tau and alpha stay positive.
fn residuals<T: Real>(p: &[T; 3], t: &[T], y: &[T]) -> (Vec<T>, T) {
    let (tau, alpha) = (p[1].exp(), p[2].exp());
    let r: Vec<T> = t.iter().zip(y).map(|(&ti, &yi)| kww(p[0], tau, alpha, ti) - yi).collect();
    let sse = r.iter().map(|&v| v * v).sum();
    (r, sse)
}

fn jacobian_row<T: Real>(p: &[T; 3], t: T) -> [T; 3] {
    let (tau, alpha) = (p[1].exp(), p[2].exp());
    if t <= T::zero() {
        return [T::one(), T::zero(), T::zero()];
    }
    let ratio = t / tau;
    let u = ratio.powf(alpha);
    let e = (-u).exp();
    [e, p[0] * e * u * alpha, -p[0] * e * u * alpha * ratio.ln()]
}

fn solve3<T: Real>(mut m: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    for c in 0..3 {
        let piv = (c..3).max_by(|&i, &j| m[i][c].abs().partial_cmp(&m[j][c].abs()).unwrap())?;
        if m[piv][c].abs() <= T::min_positive_value() {
            return None;
        }
        m.swap(c, piv);
        b.swap(c, piv);
        for r in (c + 1)..3 {
            let k = m[r][c] / m[c][c];
            let pivot_row = m[c];
            for (dst, &v) in m[r][c..].iter_mut().zip(&pivot_row[c..]) {
                *dst -= k * v;
            }
            let v = b[c];
            b[r] -= k * v;
        }
    }
    let mut x = [T::zero(); 3];
    for r in (0..3).rev() {
        let s: T = ((r + 1)..3).map(|j| m[r][j] * x[j]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn failure<T: Real>(iterations: usize, p: &[T; 3], sse: T, n: usize) -> Error {
    Error::FitFailure {
        iterations,
        amplitude: p[0].to_f64_lossy(),
        timescale: p[1].exp().to_f64_lossy(),
        stretch: p[2].exp().to_f64_lossy(),
        rmse: (sse / T::from_usize_lossy(n)).sqrt().to_f64_lossy(),
    }
}

/// Initial guess from the log-log linearisation `ln(-ln(y / A)) = alpha ln t - alpha ln tau`.
fn initial_guess<T: Real>(t: &[T], y: &[T]) -> Option<[T; 3]> {
    let ymax = y.iter().copied().fold(T::zero(), T::max);
    let a0 = if t[0] == T::zero() {
        y[0]
    } else {
        ymax * T::from_f64_lossy(1.05)
    };
    let (lx, ly): (Vec<T>, Vec<T>) = t
        .iter()
        .zip(y)
        .filter(|&(&ti, &yi)| ti > T::zero() && yi < a0)
        .map(|(&ti, &yi)| (ti.ln(), (-(yi / a0).ln()).ln()))
        .filter(|(_, v)| v.is_finite())
        .unzip();
    if lx.len() < 2 {
        return None;
    }
    let line = fit_polynomial(&lx, &ly, 1).ok()?;
    let alpha = line.coefficients[1];
    if alpha.is_nan() || alpha <= T::zero() {
        return None;
    }
    let ln_tau = -line.coefficients[0] / alpha;
    Some([a0, ln_tau, alpha.ln()])
}

/// Least-squares fit of a stretched exponential by Levenberg-Marquardt,
/// seeded from the log-log linearisation.
///
/// Inputs that show no decay, or that fail to converge within
/// [`KWW_MAX_ITERATIONS`], yield [`Error::FitFailure`] carrying the best iterate.
pub fn kww_fit<T: Real>(t: &[T], y: &[T]) -> Result<KwwFit<T>> {
    if t.len() != y.len() {
        return arg("t and y lengths differ");
    }
    let n = t.len();
    if n < 4 {
        return arg("KWW fit needs at least 4 points");
    }
    if t[0] < T::zero() || t.windows(2).any(|w| w[1] <= w[0]) {
        return arg("t must be non-negative and strictly increasing");
    }
    if y.iter().any(|&v| v.is_nan() || v <= T::zero()) {
        return arg("y must be positive");
    }

    let Some(mut p) = initial_guess(t, y) else {
        let mean = y.iter().copied().sum::<T>() / T::from_usize_lossy(n);
        let sse: T = y.iter().map(|&v| (v - mean) * (v - mean)).sum();
        return Err(Error::FitFailure {
            iterations: 0,
            amplitude: mean.to_f64_lossy(),
            timescale: f64::INFINITY,
            stretch: f64::NAN,
            rmse: (sse / T::from_usize_lossy(n)).sqrt().to_f64_lossy(),
        });
    };

    let scale: T = y.iter().map(|&v| v * v).sum();
    let tiny = scale * T::epsilon() * T::epsilon();
    let (mut r, mut sse) = residuals(&p, t, y);
    let mut lambda = T::from_f64_lossy(1e-3);
    let ten = T::from_f64_lossy(10.0);
    let lambda_max = T::from_f64_lossy(1e16);
    let tol = T::epsilon().sqrt() * T::from_f64_lossy(1e-4);

    for iter in 1..=KWW_MAX_ITERATIONS {
        if sse <= tiny {
            return Ok(finish(p, sse, n, iter - 1));
        }
        let mut jtj = [[T::zero(); 3]; 3];
        let mut jtr = [T::zero(); 3];
        for (&ti, &ri) in t.iter().zip(&r) {
            let row = jacobian_row(&p, ti);
            for a in 0..3 {
                jtr[a] += row[a] * ri;
                for b in 0..3 {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        loop {
            let mut m = jtj;
            for d in 0..3 {
                m[d][d] += lambda * jtj[d][d].max(T::min_positive_value());
            }
            let step = solve3(m, [-jtr[0], -jtr[1], -jtr[2]]);
            let accepted = step.and_then(|s| {
                let cand = [p[0] + s[0], p[1] + s[1], p[2] + s[2]];
                let (rc, sc) = residuals(&cand, t, y);
                (sc.is_finite() && sc < sse).then_some((cand, rc, sc, s))
            });
            match accepted {
                Some((cand, rc, sc, s)) => {
                    let gain = (sse - sc) / sse;
                    let small_step = s.iter().zip(&cand).all(|(d, v)| d.abs() <= tol * (T::one() + v.abs()));
                    p = cand;
                    r = rc;
                    sse = sc;
                    lambda = (lambda / ten).max(T::from_f64_lossy(1e-12));
                    if gain < tol * tol || small_step {
                        return Ok(finish(p, sse, n, iter));
                    }
                    break;
                }
                None => {
                    lambda *= ten;
                    if lambda > lambda_max {
                        // No descent direction left: a numerical minimum.
                        return Ok(finish(p, sse, n, iter));
                    }
                }
            }
        }
    }
    Err(failure(KWW_MAX_ITERATIONS, &p, sse, n))
}

fn finish<T: Real>(p: [T; 3], sse: T, n: usize, iterations: usize) -> KwwFit<T> {
    KwwFit {
        amplitude: p[0],
        timescale: p[1].exp(),
        stretch: p[2].exp(),
        rmse: (sse / T::from_usize_lossy(n)).sqrt(),
        iterations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentFraction {
    pub fraction: f64,
    pub in_band: usize,
    pub fitted: usize,
    pub failed: usize,
}

/// Fraction of segments whose fitted stretch exponent lies in
/// `[center - delta, center + delta]`. Failed fits are counted but excluded.
pub fn kww_segment_fraction<T: Real>(segments: &[(Vec<T>, Vec<T>)], center: T, delta: T) -> Result<SegmentFraction> {
    if delta.is_nan() || delta <= T::zero() {
        return arg("band half-width must be positive");
    }
    let mut in_band = 0;
    let mut fitted = 0;
    let mut failed = 0;
    for (t, y) in segments {
        match kww_fit(t, y) {
            Ok(f) => {
                fitted += 1;
                if (f.stretch - center).abs() <= delta {
                    in_band += 1;
                }
            }
            Err(Error::FitFailure { .. }) => failed += 1,
            Err(e) => return Err(e),
        }
    }
    if fitted == 0 {
        return Err(Error::Validation(format!("no successful KWW fits ({failed} failed)")));
    }
    Ok(SegmentFraction {
        fraction: in_band as f64 / fitted as f64,
        in_band,
        fitted,
        failed,
    })
}
