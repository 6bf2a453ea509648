//! Grid calibration of the activation parameters against standard-decoder
//! logical error rates, subject to a syndrome Fano window.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decode::ClassifierWeights;
use crate::error::{arg, Error, Result};
use crate::error_model::{generate_edge_correlated_fixture, ModelConfig};
use crate::lattice::build_cell;
use crate::montecarlo::{standard_failures, trial_rng, RunConfig, DEFAULT_SEED};
use crate::stats::fano_counts;

/// Standard-decoder LER targets for rings 1..=4 at tau 1.
pub const REFERENCE_STD_LER: [f64; 4] = [0.0680, 0.1658, 0.2877, 0.4295];
pub const FANO_TARGET: f64 = 0.856;
pub const FANO_TOLERANCE: f64 = 0.05;
/// Base activation rate of the anti-bunched Fano fixture.
pub const FANO_FIXTURE_RATE: f64 = 0.06;
pub const FANO_FIXTURE_RINGS: usize = 2;

/// Candidate values per parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpace {
    pub a_b: Vec<f64>,
    pub a_t: Vec<f64>,
    pub leak_c: Vec<f64>,
    pub q_false: Vec<f64>,
    pub s_fidelity: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            a_b: vec![0.75, 0.85, 0.95],
            a_t: vec![0.66, 0.76, 0.86],
            leak_c: vec![0.30, 0.34, 0.38],
            q_false: vec![0.0, 0.005, 0.01],
            s_fidelity: vec![0.2, 0.25, 0.5],
            alpha: vec![0.25, 0.5, 0.75],
        }
    }
}

const PARAMS: usize = 6;

impl SearchSpace {
    fn axes(&self) -> [&Vec<f64>; PARAMS] {
        [&self.a_b, &self.a_t, &self.leak_c, &self.q_false, &self.s_fidelity, &self.alpha]
    }

    pub fn size(&self) -> usize {
        self.axes().iter().map(|a| a.len()).product()
    }

    pub fn validate(&self) -> Result<()> {
        const NAMES: [&str; PARAMS] = ["a_b", "a_t", "leak_c", "q_false", "s_fidelity", "alpha"];
        for (name, axis) in NAMES.iter().zip(self.axes()) {
            if axis.is_empty() {
                return arg(format!("search space for {name} is empty"));
            }
            if let Some(v) = axis.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return arg(format!("{name} candidate {v} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    /// Trials per condition for every grid point.
    pub trials: usize,
    pub seed: u64,
    /// Number of halving refinement passes around the incumbent.
    pub refinements: usize,
    /// Shots used for the Fano fixture.
    pub fano_shots: usize,
    /// Supplies `p`, `f` and `interior_suppression`.
    pub base: ModelConfig,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            trials: 20_000,
            seed: DEFAULT_SEED,
            refinements: 2,
            fano_shots: 50_000,
            base: ModelConfig::calibrated(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub model: ModelConfig,
    pub objective: f64,
    pub targets: Vec<f64>,
    pub std_ler: Vec<f64>,
    pub fano: f64,
    pub evaluated: usize,
    /// `(alpha, fixture Fano)` for alpha values outside the Fano window.
    pub rejected_alpha: Vec<(f64, f64)>,
}

/// Fano factor of per-shot activation counts on the anti-bunched fixture
/// with edge coupling `-alpha`.
pub fn anti_bunched_fano(alpha: f64, rings: usize, base_rate: f64, shots: usize, seed: u64) -> Result<f64> {
    let cell = build_cell(rings)?;
    let mut rng = trial_rng(seed, u64::MAX);
    let ds = generate_edge_correlated_fixture(&cell, shots, base_rate, -alpha, &mut rng)?;
    fano_counts(&ds.shot_counts())
}

pub fn fano_in_window(fano: f64) -> bool {
    (fano - FANO_TARGET).abs() <= FANO_TOLERANCE
}

/// Sum of squared relative errors.
pub fn objective(simulated: &[f64], targets: &[f64]) -> f64 {
    simulated
        .iter()
        .zip(targets)
        .map(|(s, t)| ((s - t) / t).powi(2))
        .sum()
}

/// Standard-decoder LER at tau 1 for rings 1..=4.
pub fn simulate_std_ler(model: &ModelConfig, trials: usize, seed: u64) -> Result<Vec<f64>> {
    (1..=REFERENCE_STD_LER.len())
        .map(|rings| {
            let cfg = RunConfig {
                rings,
                tau: 1,
                trials,
                model: *model,
                weights: ClassifierWeights::default(),
                master_seed: seed,
            };
            Ok(standard_failures(&cfg)? as f64 / trials as f64)
        })
        .collect()
}

fn with_point(base: &ModelConfig, x: &[f64; PARAMS]) -> ModelConfig {
    ModelConfig {
        a_b: x[0],
        a_t: x[1],
        leak_c: x[2],
        q_false: x[3],
        s_fidelity: x[4],
        alpha: x[5],
        ..*base
    }
}

fn key(x: &[f64; PARAMS]) -> [u64; PARAMS] {
    x.map(f64::to_bits)
}

fn cartesian(axes: &[Vec<f64>; PARAMS]) -> Vec<[f64; PARAMS]> {
    let mut out = vec![[0.0; PARAMS]];
    for (d, axis) in axes.iter().enumerate() {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p;
                    q[d] = v;
                    q
                })
            })
            .collect();
    }
    out
}

fn spacing(axis: &[f64]) -> f64 {
    let mut v = axis.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    if v.len() < 2 {
        return 0.0;
    }
    v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

struct Search<'a> {
    targets: &'a [f64],
    opts: &'a CalibrationOptions,
    scores: BTreeMap<[u64; PARAMS], (f64, Vec<f64>)>,
    fanos: BTreeMap<u64, f64>,
    best: Option<([f64; PARAMS], f64)>,
}

impl Search<'_> {
    fn fano(&mut self, alpha: f64) -> Result<f64> {
        if let Some(&f) = self.fanos.get(&alpha.to_bits()) {
            return Ok(f);
        }
        let f = anti_bunched_fano(
            alpha,
            FANO_FIXTURE_RINGS,
            FANO_FIXTURE_RATE,
            self.opts.fano_shots,
            self.opts.seed,
        )?;
        self.fanos.insert(alpha.to_bits(), f);
        Ok(f)
    }

    fn visit(&mut self, x: [f64; PARAMS]) -> Result<()> {
        if self.scores.contains_key(&key(&x)) || !fano_in_window(self.fano(x[5])?) {
            return Ok(());
        }
        let model = with_point(&self.opts.base, &x);
        let ler = simulate_std_ler(&model, self.opts.trials, self.opts.seed)?;
        let obj = objective(&ler, self.targets);
        self.scores.insert(key(&x), (obj, ler));
        if self.best.is_none_or(|(_, b)| obj < b) {
            self.best = Some((x, obj));
        }
        Ok(())
    }
}

/// Deterministic coarse-to-fine grid search minimising [`objective`] over the
/// four tau-1 conditions. Every grid point shares the same seed, so
/// comparisons use common random numbers.
pub fn calibrate(targets: &[f64], space: &SearchSpace, opts: &CalibrationOptions) -> Result<CalibrationResult> {
    space.validate()?;
    if targets.len() != REFERENCE_STD_LER.len() {
        return arg(format!("expected {} targets, got {}", REFERENCE_STD_LER.len(), targets.len()));
    }
    if targets.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        return arg("targets must lie in (0, 1]");
    }
    if opts.trials == 0 || opts.fano_shots < 2 {
        return arg("trials must be positive and fano_shots at least 2");
    }

    let mut search = Search {
        targets,
        opts,
        scores: BTreeMap::new(),
        fanos: BTreeMap::new(),
        best: None,
    };
    let axes = space.axes().map(|a| a.clone());
    for x in cartesian(&axes) {
        search.visit(x)?;
    }
    let Some((mut centre, _)) = search.best else {
        return Err(Error::Validation(format!(
            "no alpha candidate gives a fixture Fano within {FANO_TARGET} +/- {FANO_TOLERANCE}"
        )));
    };

    let mut steps = axes.each_ref().map(|a| spacing(a));
    for _ in 0..opts.refinements {
        steps = steps.map(|h| h / 2.0);
        let local: [Vec<f64>; PARAMS] = std::array::from_fn(|d| {
            let mut v: Vec<f64> = [centre[d] - steps[d], centre[d], centre[d] + steps[d]]
                .into_iter()
                .map(|v| (v * 1e9).round() / 1e9)
                .filter(|v| (0.0..=1.0).contains(v))
                .collect();
            v.dedup();
            v
        });
        for x in cartesian(&local) {
            search.visit(x)?;
        }
        centre = search.best.expect("incumbent exists").0;
    }

    let (x, obj) = search.best.expect("incumbent exists");
    let std_ler = search.scores[&key(&x)].1.clone();
    let fano = search.fanos[&x[5].to_bits()];
    let rejected_alpha = search
        .fanos
        .iter()
        .map(|(&a, &f)| (f64::from_bits(a), f))
        .filter(|&(_, f)| !fano_in_window(f))
        .collect();
    Ok(CalibrationResult {
        model: with_point(&opts.base, &x),
        objective: obj,
        targets: targets.to_vec(),
        std_ler,
        fano,
        evaluated: search.scores.len(),
        rejected_alpha,
    })
}
