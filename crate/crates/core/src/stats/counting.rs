use serde::Serialize;

use crate::dataset::SyndromeDataset;
use crate::error::{arg, Error, Result};
use crate::num::{mean, sample_variance, Real};
use crate::stats::fit::fit_polynomial;

/// Variance-to-mean ratio with the unbiased variance estimator.
pub fn fano<T: Real>(values: &[T]) -> Result<T> {
    if values.len() < 2 {
        return arg("Fano factor needs at least two values");
    }
    let m = mean(values);
    if m == T::zero() {
        return Err(Error::MeanZero);
    }
    Ok(sample_variance(values) / m)
}

pub fn fano_counts<T: Real>(counts: &[u32]) -> Result<T> {
    let xs: Vec<T> = counts.iter().map(|&c| T::from_u32(c).expect("u32 as float")).collect();
    fano(&xs)
}

/// Per shot, the number of rounds with at least `threshold` simultaneous activations.
pub fn burst_count(ds: &SyndromeDataset, threshold: u32) -> Vec<u32> {
    (0..ds.shots)
        .map(|s| (0..ds.rounds).filter(|&r| ds.round_count(s, r) >= threshold).count() as u32)
        .collect()
}

/// Ratios `means[i + 1] / means[i]`.
pub fn burst_ratios<T: Real>(means: &[T]) -> Result<Vec<T>> {
    if means.len() < 2 {
        return arg("burst ratios need at least two distances");
    }
    means
        .windows(2)
        .map(|w| {
            if w[0] == T::zero() {
                arg("zero mean burst count in denominator")
            } else {
                Ok(w[1] / w[0])
            }
        })
        .collect()
}

/// Sample autocorrelation at lag `k`, normalised by the full-series sum of squares.
pub fn lag_autocorr<T: Real>(series: &[T], k: usize) -> Result<T> {
    if series.len() <= k {
        return arg(format!("series of length {} too short for lag {k}", series.len()));
    }
    let m = mean(series);
    let denom: T = series.iter().map(|&x| (x - m) * (x - m)).sum();
    if denom <= T::zero() {
        return Err(Error::DegenerateVariance("constant series".into()));
    }
    let num: T = series
        .iter()
        .zip(&series[k..])
        .map(|(&a, &b)| (a - m) * (b - m))
        .sum();
    Ok(num / denom)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjacentCorrelation {
    pub mean_corr: f64,
    pub fraction_positive: f64,
    pub pairs: usize,
    pub skipped: usize,
    pub per_pair: Vec<((usize, usize), f64)>,
}

fn pearson_bits(xs: impl Iterator<Item = (bool, bool)>) -> Option<f64> {
    let (mut n, mut sx, mut sy, mut sxy) = (0u64, 0u64, 0u64, 0u64);
    for (x, y) in xs {
        n += 1;
        sx += x as u64;
        sy += y as u64;
        sxy += (x && y) as u64;
    }
    let n = n as f64;
    let (sx, sy, sxy) = (sx as f64, sy as f64, sxy as f64);
    let cov = n * sxy - sx * sy;
    let vx = n * sx - sx * sx;
    let vy = n * sy - sy * sy;
    if vx <= 0.0 || vy <= 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

/// Pearson correlation of adjacent detector activations across shots.
///
/// Each pair is correlated within every round and the per-round values are
/// averaged. Pairs with no round of nonzero variance are skipped.
pub fn adjacent_correlation(ds: &SyndromeDataset) -> Result<AdjacentCorrelation> {
    let Some(adj) = &ds.adjacency else {
        return arg("dataset has no adjacency");
    };
    if ds.shots < 2 {
        return arg("adjacent correlation needs at least two shots");
    }
    let mut per_pair = Vec::with_capacity(adj.len());
    let mut skipped = 0;
    for &(a, b) in adj {
        let rs: Vec<f64> = (0..ds.rounds)
            .filter_map(|r| pearson_bits((0..ds.shots).map(|s| (ds.get(s, r, a), ds.get(s, r, b)))))
            .collect();
        if rs.is_empty() {
            skipped += 1;
        } else {
            per_pair.push(((a, b), rs.iter().sum::<f64>() / rs.len() as f64));
        }
    }
    if per_pair.is_empty() {
        return Err(Error::DegenerateVariance("every adjacent pair has zero variance".into()));
    }
    let pairs = per_pair.len();
    let mean_corr = per_pair.iter().map(|p| p.1).sum::<f64>() / pairs as f64;
    let fraction_positive = per_pair.iter().filter(|p| p.1 > 0.0).count() as f64 / pairs as f64;
    Ok(AdjacentCorrelation {
        mean_corr,
        fraction_positive,
        pairs,
        skipped,
        per_pair,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FanoDecomposition {
    /// Spatial Fano per round; `None` where the round has zero mean.
    pub spatial_per_round: Vec<Option<f64>>,
    pub spatial_round1: Option<f64>,
    /// Mean spatial Fano over rounds after the first (round 1 alone if there is one round).
    pub spatial_bulk: Option<f64>,
    pub skipped_rounds: Vec<usize>,
    /// `(r, F)` for the aggregate count over the first `r` rounds.
    pub aggregate: Vec<(usize, f64)>,
    pub aggregate_slope: Option<f64>,
}

/// Spatial (within-round) and aggregate (first-`r`-rounds) Fano factors.
pub fn fano_decompose(ds: &SyndromeDataset, round_grid: &[usize]) -> Result<FanoDecomposition> {
    ds.validate()?;
    if let Some(&r) = round_grid.iter().find(|&&r| r == 0 || r > ds.rounds) {
        return arg(format!("round grid entry {r} outside 1..={}", ds.rounds));
    }
    if ds.shots < 2 {
        return arg("decomposition needs at least two shots");
    }

    let counts: Vec<Vec<u32>> = (0..ds.shots)
        .map(|s| (0..ds.rounds).map(|r| ds.round_count(s, r)).collect())
        .collect();

    let mut skipped_rounds = Vec::new();
    let spatial_per_round: Vec<Option<f64>> = (0..ds.rounds)
        .map(|r| {
            let col: Vec<u32> = counts.iter().map(|c| c[r]).collect();
            match fano_counts::<f64>(&col) {
                Ok(f) => Some(f),
                Err(_) => {
                    skipped_rounds.push(r);
                    None
                }
            }
        })
        .collect();
    let spatial_round1 = spatial_per_round[0];
    let bulk: Vec<f64> = if ds.rounds == 1 {
        spatial_per_round.iter().flatten().copied().collect()
    } else {
        spatial_per_round[1..].iter().flatten().copied().collect()
    };
    let spatial_bulk = (!bulk.is_empty()).then(|| bulk.iter().sum::<f64>() / bulk.len() as f64);

    let mut aggregate = Vec::with_capacity(round_grid.len());
    for &r in round_grid {
        let totals: Vec<u32> = counts.iter().map(|c| c[..r].iter().sum()).collect();
        match fano_counts::<f64>(&totals) {
            Ok(f) => aggregate.push((r, f)),
            Err(Error::MeanZero) => {}
            Err(e) => return Err(e),
        }
    }
    let aggregate_slope = if aggregate.len() >= 2 {
        let x: Vec<f64> = aggregate.iter().map(|a| a.0 as f64).collect();
        let y: Vec<f64> = aggregate.iter().map(|a| a.1).collect();
        Some(fit_polynomial(&x, &y, 1)?.coefficients[1])
    } else {
        None
    };

    Ok(FanoDecomposition {
        spatial_per_round,
        spatial_round1,
        spatial_bulk,
        skipped_rounds,
        aggregate,
        aggregate_slope,
    })
}
