use serde::Serialize;

use crate::error::{arg, Error, Result};
use crate::num::{mean, Real};
use crate::stats::fit::fit_polynomial;

pub const DFA_MIN_LEN: usize = 64;
const DFA_SCALES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DfaResult<T> {
    pub hurst: T,
    /// `(window, F(window))` pairs used in the log-log fit.
    pub fluctuations: Vec<(usize, T)>,
}

fn window_sizes(len: usize) -> Vec<usize> {
    let lo = 4.0f64;
    let hi = (len / 4) as f64;
    let mut out: Vec<usize> = (0..DFA_SCALES)
        .map(|i| (lo * (hi / lo).powf(i as f64 / (DFA_SCALES - 1) as f64)).round() as usize)
        .collect();
    out.dedup();
    out
}

/// Root-mean-square residual of the profile after a straight-line fit in each
/// non-overlapping window of size `n`.
fn fluctuation<T: Real>(profile: &[T], n: usize) -> T {
    let segments = profile.len() / n;
    let nt = T::from_usize_lossy(n);
    let xm = (nt - T::one()) / T::two();
    let sxx: T = (0..n).map(|i| (T::from_usize_lossy(i) - xm).powi(2)).sum();
    let mut total = T::zero();
    for s in 0..segments {
        let seg = &profile[s * n..(s + 1) * n];
        let ym = mean(seg);
        let mut sxy = T::zero();
        let mut syy = T::zero();
        for (i, &y) in seg.iter().enumerate() {
            let dx = T::from_usize_lossy(i) - xm;
            let dy = y - ym;
            sxy += dx * dy;
            syy += dy * dy;
        }
        total += (syy - sxy * sxy / sxx).max(T::zero());
    }
    (total / T::from_usize_lossy(segments * n)).sqrt()
}

/// Detrended fluctuation analysis with order-1 detrending over log-spaced
/// window sizes from 4 to `len / 4`.
pub fn dfa<T: Real>(series: &[T]) -> Result<DfaResult<T>> {
    if series.len() < DFA_MIN_LEN {
        return arg(format!("DFA needs at least {DFA_MIN_LEN} samples, got {}", series.len()));
    }
    let m = mean(series);
    let mut acc = T::zero();
    let profile: Vec<T> = series
        .iter()
        .map(|&x| {
            acc += x - m;
            acc
        })
        .collect();

    let mut fluctuations = Vec::new();
    for n in window_sizes(series.len()) {
        let f = fluctuation(&profile, n);
        if f <= T::zero() {
            return Err(Error::DegenerateVariance(format!("zero fluctuation at window {n}")));
        }
        fluctuations.push((n, f));
    }
    let lx: Vec<T> = fluctuations.iter().map(|&(n, _)| T::from_usize_lossy(n).ln()).collect();
    let ly: Vec<T> = fluctuations.iter().map(|&(_, f)| f.ln()).collect();
    let hurst = fit_polynomial(&lx, &ly, 1)?.coefficients[1];
    Ok(DfaResult { hurst, fluctuations })
}

pub fn dfa_hurst<T: Real>(series: &[T]) -> Result<T> {
    dfa(series).map(|r| r.hurst)
}
