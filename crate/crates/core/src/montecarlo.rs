//! Paired decoder comparisons over Monte Carlo trials.
//!
//! Every trial draws its events and syndrome window once and decodes the same
//! window with both policies. Trial `t` owns the RNG stream seeded by
//! `mix(master_seed, t)`, so aggregates are independent of thread count and
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal};

use crate::decode::{apply_corrections, decide, ClassifierWeights, DecoderPolicy};
use crate::error::{arg, Result};
use crate::error_model::{extract_syndrome, sample_events, EventKind, ModelConfig, SyndromeWindow};
use crate::lattice::{build_cell, HexCell};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TRIALS: usize = 100_000;

const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub rings: usize,
    pub tau: usize,
    pub trials: usize,
    pub model: ModelConfig,
    pub weights: ClassifierWeights,
    pub master_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            rings: 2,
            tau: 1,
            trials: DEFAULT_TRIALS,
            model: ModelConfig::calibrated(),
            weights: ClassifierWeights::default(),
            master_seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub nodes: usize,
    pub rings: usize,
    pub tau: usize,
    pub f: f64,
    pub trials: usize,
    pub std_failures: u64,
    pub reg_failures: u64,
    pub std_ler: f64,
    pub reg_ler: f64,
    pub improvement: f64,
    /// Trials where only the standard decoder failed.
    pub std_only_failures: u64,
    /// Trials where only the regime decoder failed.
    pub reg_only_failures: u64,
    pub p_value: f64,
    pub correct_abstains: u64,
    pub misc_ternary: u64,
    pub ternary_events: u64,
    pub abstain_pct: f64,
    /// Nodes flagged by stage 1, summed over trials.
    pub flagged: u64,
    /// Flagged nodes the regime decoder left alone, whatever their ground truth.
    pub abstained: u64,
}

impl RunSummary {
    pub fn abstain_fraction_of_flagged(&self) -> f64 {
        if self.flagged == 0 {
            0.0
        } else {
            self.abstained as f64 / self.flagged as f64
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    std_fail: u64,
    reg_fail: u64,
    std_only: u64,
    reg_only: u64,
    correct_abstains: u64,
    misc_ternary: u64,
    ternary: u64,
    flagged: u64,
    abstained: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            std_fail: self.std_fail + o.std_fail,
            reg_fail: self.reg_fail + o.reg_fail,
            std_only: self.std_only + o.std_only,
            reg_only: self.reg_only + o.reg_only,
            correct_abstains: self.correct_abstains + o.correct_abstains,
            misc_ternary: self.misc_ternary + o.misc_ternary,
            ternary: self.ternary + o.ternary,
            flagged: self.flagged + o.flagged,
            abstained: self.abstained + o.abstained,
        }
    }
}

/// SplitMix64 finalizer over the pair `(seed, index)`.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(master_seed, trial))
}

fn run_trial(cell: &HexCell, cfg: &RunConfig, trial: u64) -> Result<Tally> {
    let mut rng = trial_rng(cfg.master_seed, trial);
    let events = sample_events(cell, &cfg.model, &mut rng);
    let window = extract_syndrome(cell, &events, cfg.tau, &cfg.model, &mut rng)?;

    let mut fidelity_rng = rng.clone();
    let (sa, sc) = decide(cell, &window, DecoderPolicy::Standard, &cfg.weights)?;
    let std = apply_corrections(&events, &sc, &sa, &cfg.model, &mut fidelity_rng)?;
    let (ra, rc) = decide(cell, &window, DecoderPolicy::RegimeClassifier, &cfg.weights)?;
    let reg = apply_corrections(&events, &rc, &ra, &cfg.model, &mut rng)?;

    Ok(Tally {
        std_fail: std.logical_failure as u64,
        reg_fail: reg.logical_failure as u64,
        std_only: (std.logical_failure && !reg.logical_failure) as u64,
        reg_only: (reg.logical_failure && !std.logical_failure) as u64,
        correct_abstains: reg.correct_abstains as u64,
        misc_ternary: reg.misc_ternary as u64,
        ternary: events.count(EventKind::Ternary) as u64,
        flagged: reg.flagged.len() as u64,
        abstained: reg.abstained.len() as u64,
    })
}

pub fn run_condition(cfg: &RunConfig) -> Result<RunSummary> {
    if cfg.trials == 0 {
        return arg("trials must be at least 1");
    }
    if cfg.tau == 0 {
        return arg("tau must be at least 1");
    }
    cfg.model.validate()?;
    cfg.weights.validate()?;
    let cell = build_cell(cfg.rings)?;

    let chunks = cfg.trials.div_ceil(CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(cfg.trials);
            (lo..hi).try_fold(Tally::default(), |acc, t| -> Result<Tally> { Ok(acc.merge(run_trial(&cell, cfg, t as u64)?)) })
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;

    Ok(summarize(&cell, cfg, tally))
}

/// Standard-decoder failures only, drawn from the same trial streams as
/// [`run_condition`] so the count equals its `std_failures`.
pub fn standard_failures(cfg: &RunConfig) -> Result<u64> {
    if cfg.trials == 0 || cfg.tau == 0 {
        return arg("trials and tau must be at least 1");
    }
    cfg.model.validate()?;
    let cell = build_cell(cfg.rings)?;
    let chunks = cfg.trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(cfg.trials);
            (lo..hi).try_fold(0u64, |acc, t| -> Result<u64> {
                let mut rng = trial_rng(cfg.master_seed, t as u64);
                let events = sample_events(&cell, &cfg.model, &mut rng);
                let window = extract_syndrome(&cell, &events, cfg.tau, &cfg.model, &mut rng)?;
                let (sa, sc) = decide(&cell, &window, DecoderPolicy::Standard, &cfg.weights)?;
                let out = apply_corrections(&events, &sc, &sa, &cfg.model, &mut rng)?;
                Ok(acc + out.logical_failure as u64)
            })
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Syndrome windows of the first `cfg.trials` trials, in trial order.
pub fn simulate_windows(cfg: &RunConfig) -> Result<Vec<SyndromeWindow>> {
    if cfg.tau == 0 {
        return arg("tau must be at least 1");
    }
    cfg.model.validate()?;
    let cell = build_cell(cfg.rings)?;
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.master_seed, t);
            let events = sample_events(&cell, &cfg.model, &mut rng);
            extract_syndrome(&cell, &events, cfg.tau, &cfg.model, &mut rng)
        })
        .collect()
}

fn summarize(cell: &HexCell, cfg: &RunConfig, t: Tally) -> RunSummary {
    let n = cfg.trials as f64;
    let std_ler = t.std_fail as f64 / n;
    let reg_ler = t.reg_fail as f64 / n;
    let improvement = if t.std_fail == 0 {
        0.0
    } else {
        (std_ler - reg_ler) / std_ler
    };
    RunSummary {
        nodes: cell.len(),
        rings: cfg.rings,
        tau: cfg.tau,
        f: cfg.model.f,
        trials: cfg.trials,
        std_failures: t.std_fail,
        reg_failures: t.reg_fail,
        std_ler,
        reg_ler,
        improvement,
        std_only_failures: t.std_only,
        reg_only_failures: t.reg_only,
        p_value: paired_discordance_test(t.std_only, t.reg_only),
        correct_abstains: t.correct_abstains,
        misc_ternary: t.misc_ternary,
        ternary_events: t.ternary,
        abstain_pct: if t.ternary == 0 {
            0.0
        } else {
            t.correct_abstains as f64 / t.ternary as f64
        },
        flagged: t.flagged,
        abstained: t.abstained,
    }
}

/// Exact two-sided sign test on discordant pairs (exact McNemar).
pub fn paired_discordance_test(b: u64, c: u64) -> f64 {
    let n = b + c;
    if n == 0 {
        return 1.0;
    }
    let k = b.min(c);
    let dist = Binomial::new(0.5, n).expect("valid binomial");
    (2.0 * dist.cdf(k)).min(1.0)
}

/// Primary sweep conditions: rings 1..=4 at tau 1, then rings 1..=4 at tau 5.
pub fn primary_conditions() -> Vec<(usize, usize)> {
    [1usize, 5]
        .iter()
        .flat_map(|&tau| (1..=4).map(move |rings| (rings, tau)))
        .collect()
}

pub fn sweep_primary(base: &RunConfig) -> Result<Vec<RunSummary>> {
    primary_conditions()
        .into_iter()
        .map(|(rings, tau)| run_condition(&RunConfig { rings, tau, ..*base }))
        .collect()
}

pub const SENSITIVITY_F: [f64; 6] = [0.0, 0.05, 0.10, 0.144, 0.20, 0.30];

pub fn sweep_sensitivity(base: &RunConfig, f_values: &[f64]) -> Result<Vec<RunSummary>> {
    if f_values.windows(2).any(|w| w[0] > w[1]) {
        return arg("f_values must be sorted ascending");
    }
    f_values
        .iter()
        .map(|&f| {
            run_condition(&RunConfig {
                model: ModelConfig { f, ..base.model },
                ..*base
            })
        })
        .collect()
}

/// Two-sided test for equal proportions `k1/n1` and `k2/n2`.
///
/// Uses the pooled z statistic unless an expected cell count is below five,
/// in which case Fisher's exact test is used.
pub fn two_proportion_test(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<f64> {
    if n1 == 0 || n2 == 0 || k1 > n1 || k2 > n2 {
        return arg(format!("invalid counts ({k1}/{n1}, {k2}/{n2})"));
    }
    let total = (n1 + n2) as f64;
    let successes = (k1 + k2) as f64;
    let pooled = successes / total;
    let expected = [
        n1 as f64 * pooled,
        n1 as f64 * (1.0 - pooled),
        n2 as f64 * pooled,
        n2 as f64 * (1.0 - pooled),
    ];
    if expected.iter().any(|&e| e < 5.0) {
        return Ok(fisher_exact(k1, n1, k2, n2));
    }
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    let diff = k1 as f64 / n1 as f64 - k2 as f64 / n2 as f64;
    if se == 0.0 {
        return Ok(1.0);
    }
    let z = (diff / se).abs();
    let normal = Normal::standard();
    Ok((2.0 * (1.0 - normal.cdf(z))).min(1.0))
}

fn ln_choose(n: u64, k: u64) -> f64 {
    statrs::function::factorial::ln_binomial(n, k)
}

/// Two-sided Fisher exact test: sums the probabilities of all tables with
/// the observed margins that are no more likely than the observed one.
pub fn fisher_exact(k1: u64, n1: u64, k2: u64, n2: u64) -> f64 {
    let m = k1 + k2;
    let n = n1 + n2;
    let lo = m.saturating_sub(n2);
    let hi = m.min(n1);
    let ln_total = ln_choose(n, m);
    let prob = |x: u64| (ln_choose(n1, x) + ln_choose(n2, m - x) - ln_total).exp();
    let observed = prob(k1);
    let p: f64 = (lo..=hi)
        .map(prob)
        .filter(|&q| q <= observed * (1.0 + 1e-7))
        .sum();
    p.min(1.0)
}
