use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use serde_json::{json, Value};

use ternary_qec::ingest::read_dataset;
use ternary_qec::stats::{
    adjacent_correlation, alpha_s_map, anova_oneway, burst_count, burst_ratios, dfa, fano_counts, fano_crosscheck,
    fano_decompose, fit_polynomial, kww_segment_fraction, lag_autocorr, t_vs_poisson, DEFAULT_BURST_THRESHOLD,
    DEFAULT_CELL_SIZE,
};
use ternary_qec::SyndromeDataset;

pub const OPS: [&str; 9] = [
    "fano",
    "anova",
    "burst",
    "dfa",
    "kww",
    "decompose",
    "alpha-s",
    "correlation",
    "autocorr",
];

#[derive(Args, Debug, Clone)]
pub struct StatsArgs {
    /// JSONL dataset; repeat for several (e.g. one per distance).
    #[arg(long = "in", required = true)]
    pub inputs: Vec<PathBuf>,
    /// Comma-separated operations; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub ops: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_BURST_THRESHOLD)]
    pub threshold: u32,
    /// Shots per block for block Fano factors.
    #[arg(long, default_value_t = 100)]
    pub block: usize,
    #[arg(long, default_value_t = DEFAULT_CELL_SIZE)]
    pub cell_size: usize,
    /// Shots per relaxation segment.
    #[arg(long, default_value_t = 1000)]
    pub segment: usize,
    /// Maximum autocorrelation lag used for relaxation fits.
    #[arg(long, default_value_t = 20)]
    pub max_lag: usize,
    /// Half-width of the stretch-exponent band around 4/3.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
}

fn err(e: impl std::fmt::Display) -> Value {
    json!({ "error": e.to_string() })
}

fn as_f64(counts: &[u32]) -> Vec<f64> {
    counts.iter().map(|&c| c as f64).collect()
}

fn block_fanos(counts: &[u32], block: usize) -> Vec<f64> {
    counts
        .chunks(block)
        .filter(|c| c.len() == block)
        .filter_map(|c| fano_counts::<f64>(c).ok())
        .collect()
}

fn fano_op(ds: &SyndromeDataset, block: usize) -> Value {
    let counts = ds.shot_counts();
    let f = match fano_counts::<f64>(&counts) {
        Ok(f) => f,
        Err(e) => return err(e),
    };
    let blocks = block_fanos(&counts, block);
    let ttest = match t_vs_poisson(&blocks) {
        Ok(t) => json!(t),
        Err(e) => err(e),
    };
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / counts.len() as f64;
    json!({ "fano": f, "mean": mean, "shots": ds.shots, "blocks": blocks.len(), "t_vs_poisson": ttest })
}

fn anova_op(datasets: &[SyndromeDataset], block: usize) -> Value {
    let (groups, by): (Vec<Vec<f64>>, &str) = if datasets.len() >= 2 {
        (datasets.iter().map(|d| block_fanos(&d.shot_counts(), block)).collect(), "dataset")
    } else {
        let ds = &datasets[0];
        let groups = (0..ds.rounds)
            .map(|r| {
                let col: Vec<u32> = (0..ds.shots).map(|s| ds.round_count(s, r)).collect();
                block_fanos(&col, block)
            })
            .collect();
        (groups, "round")
    };
    match anova_oneway(&groups) {
        Ok(a) => json!({ "groups_by": by, "groups": groups.len(), "f_stat": a.f_stat, "p": a.p,
                         "df_between": a.df_between, "df_within": a.df_within }),
        Err(e) => err(e),
    }
}

fn burst_op(datasets: &[SyndromeDataset], threshold: u32) -> Value {
    let means: Vec<f64> = datasets
        .iter()
        .map(|d| {
            let b = burst_count(d, threshold);
            b.iter().map(|&c| c as f64).sum::<f64>() / b.len() as f64
        })
        .collect();
    let per_dataset: Vec<Value> = datasets
        .iter()
        .zip(&means)
        .map(|(d, m)| json!({ "distance_or_rings": d.distance_or_rings, "mean_bursts": m }))
        .collect();
    let mut out = json!({ "threshold": threshold, "per_dataset": per_dataset });
    if datasets.len() >= 2 {
        out["ratios"] = burst_ratios(&means).map_or_else(err, |r| json!(r));
        let x: Vec<f64> = datasets.iter().map(|d| d.distance_or_rings as f64).collect();
        out["linear_fit"] = fit_polynomial(&x, &means, 1).map_or_else(err, |f| json!(f));
        if datasets.len() >= 3 {
            out["quadratic_fit"] = fit_polynomial(&x, &means, 2).map_or_else(err, |f| json!(f));
        }
    }
    out
}

fn dfa_op(ds: &SyndromeDataset) -> Value {
    match dfa(&as_f64(&ds.shot_counts())) {
        Ok(r) => json!({ "hurst": r.hurst, "windows": r.fluctuations.len() }),
        Err(e) => err(e),
    }
}

fn acf_curve(series: &[f64], max_lag: usize) -> (Vec<f64>, Vec<f64>) {
    let mut t = Vec::new();
    let mut y = Vec::new();
    for k in 0..=max_lag.min(series.len().saturating_sub(1)) {
        match lag_autocorr(series, k) {
            Ok(r) if r > 0.0 => {
                t.push(k as f64);
                y.push(r);
            }
            _ => break,
        }
    }
    (t, y)
}

fn kww_op(ds: &SyndromeDataset, args: &StatsArgs) -> Value {
    let series = as_f64(&ds.shot_counts());
    let segments: Vec<(Vec<f64>, Vec<f64>)> = series
        .chunks(args.segment)
        .filter(|c| c.len() == args.segment)
        .map(|c| acf_curve(c, args.max_lag))
        .collect();
    let usable: Vec<_> = segments.into_iter().filter(|(t, _)| t.len() >= 4).collect();
    let short = series.len() / args.segment.max(1) - usable.len();
    if usable.is_empty() {
        return json!({ "error": "no segment has four positive autocorrelation lags", "too_short": short });
    }
    match kww_segment_fraction(&usable, 4.0 / 3.0, args.delta) {
        Ok(r) => json!({ "fraction": r.fraction, "in_band": r.in_band, "fitted": r.fitted,
                         "failed": r.failed, "too_short": short, "delta": args.delta }),
        Err(e) => err(e),
    }
}

fn decompose_op(ds: &SyndromeDataset) -> Value {
    let grid: Vec<usize> = (1..=ds.rounds).collect();
    fano_decompose(ds, &grid).map_or_else(err, |d| json!(d))
}

fn alpha_s_op(ds: &SyndromeDataset, cell_size: usize) -> Value {
    match fano_counts::<f64>(&ds.shot_counts()) {
        Ok(f) => json!(alpha_s_map(f, cell_size)),
        Err(e) => err(e),
    }
}

fn correlation_op(ds: &SyndromeDataset) -> Value {
    match adjacent_correlation(ds) {
        Ok(c) => json!({ "mean_corr": c.mean_corr, "fraction_positive": c.fraction_positive,
                         "pairs": c.pairs, "skipped": c.skipped,
                         "predicted_fano": fano_crosscheck(c.mean_corr) }),
        Err(e) => err(e),
    }
}

fn autocorr_op(ds: &SyndromeDataset) -> Value {
    lag_autocorr(&as_f64(&ds.shot_counts()), 1).map_or_else(err, |r| json!({ "lag1": r }))
}

pub fn run(args: &StatsArgs) -> Result<BTreeMap<String, Value>> {
    let ops: Vec<String> = if args.ops.is_empty() {
        OPS.iter().map(|s| s.to_string()).collect()
    } else {
        args.ops.clone()
    };
    if let Some(bad) = ops.iter().find(|o| !OPS.contains(&o.as_str())) {
        bail!("unknown stats operation {bad:?} (known: {})", OPS.join(","));
    }
    if args.block < 2 || args.segment < 2 {
        bail!("--block and --segment must be at least 2");
    }
    let datasets = args.inputs.iter().map(read_dataset).collect::<Result<Vec<_>, _>>()?;

    let per = |f: &dyn Fn(&SyndromeDataset) -> Value| Value::Array(datasets.iter().map(f).collect());
    let mut report = BTreeMap::new();
    report.insert(
        "inputs".to_string(),
        json!(args.inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>()),
    );
    for op in &ops {
        let v = match op.as_str() {
            "fano" => per(&|d| fano_op(d, args.block)),
            "anova" => anova_op(&datasets, args.block),
            "burst" => burst_op(&datasets, args.threshold),
            "dfa" => per(&dfa_op),
            "kww" => per(&|d| kww_op(d, args)),
            "decompose" => per(&decompose_op),
            "alpha-s" => per(&|d| alpha_s_op(d, args.cell_size)),
            "correlation" => per(&correlation_op),
            "autocorr" => per(&autocorr_op),
            _ => unreachable!(),
        };
        report.insert(op.clone(), v);
    }
    Ok(report)
}
