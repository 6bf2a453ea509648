//! Majority-vote detection, five-feature regime classification, and the
//! correction policies with miscorrection accounting.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::error_model::{EventKind, ModelConfig, SyndromeWindow, TrialEvents};
use crate::lattice::HexCell;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierWeights {
    pub isolation: f64,
    pub boundary: f64,
    pub density_contrast: f64,
    pub chirality: f64,
    pub temporal_consistency: f64,
    pub theta: f64,
}

impl Default for ClassifierWeights {
    fn default() -> Self {
        Self {
            isolation: 0.35,
            boundary: 0.25,
            density_contrast: 0.20,
            chirality: 0.10,
            temporal_consistency: 0.10,
            theta: 0.3,
        }
    }
}

impl ClassifierWeights {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.isolation,
            self.boundary,
            self.density_contrast,
            self.chirality,
            self.temporal_consistency,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.as_array();
        if w.iter().any(|&x| x.is_nan() || x < 0.0) {
            return arg("classifier weights must be non-negative");
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return arg(format!("classifier weights must sum to 1, got {sum}"));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return arg(format!("theta must lie in [0, 1], got {}", self.theta));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeScore {
    pub isolation: f64,
    pub boundary: f64,
    pub density_contrast: f64,
    pub chirality: f64,
    pub temporal_consistency: f64,
    pub total: f64,
}

impl NodeScore {
    pub fn features(&self) -> [f64; 5] {
        [
            self.isolation,
            self.boundary,
            self.density_contrast,
            self.chirality,
            self.temporal_consistency,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecoderPolicy {
    Standard,
    RegimeClassifier,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DecodeOutcome {
    pub flagged: BTreeSet<usize>,
    pub abstained: BTreeSet<usize>,
    pub corrected: BTreeSet<usize>,
    pub residual_errors: BTreeSet<usize>,
    pub logical_failure: bool,
    pub correct_abstains: usize,
    pub misc_ternary: usize,
    pub missed_binary: usize,
    pub injected_errors: usize,
}

/// Stage 1: flag every node whose activation count exceeds `tau / 2`.
pub fn detect(window: &SyndromeWindow) -> BTreeSet<usize> {
    window
        .counts
        .iter()
        .enumerate()
        .filter(|&(_, &c)| 2 * c as usize > window.tau)
        .map(|(i, _)| i)
        .collect()
}

fn is_flagged(window: &SyndromeWindow, i: usize) -> bool {
    2 * window.counts[i] as usize > window.tau
}

/// Stage 2 features for one flagged node.
pub fn score_node(cell: &HexCell, window: &SyndromeWindow, i: usize, weights: &ClassifierWeights) -> Result<NodeScore> {
    if i >= window.nodes() || i >= cell.len() {
        return arg(format!("node index {i} out of range"));
    }
    if !is_flagged(window, i) {
        return Err(Error::Contract(format!("node {i} is not flagged")));
    }
    let tau = window.tau as f64;
    let own = window.counts[i] as f64 / tau;
    let nb = &cell.adjacency[i];

    let (isolation, density_contrast) = if nb.is_empty() {
        (1.0, own)
    } else {
        let (max, sum) = nb.iter().fold((0u32, 0u32), |(m, s), &j| {
            let c = window.counts[j];
            (m.max(c), s + c)
        });
        let mean = sum as f64 / nb.len() as f64 / tau;
        (1.0 - max as f64 / tau, (own - mean).max(0.0))
    };
    let boundary = (6usize.saturating_sub(cell.coordination[i])) as f64 / 6.0;
    let chirality = if cell.chirality[i].is_zero() { 0.0 } else { 1.0 };
    let temporal_consistency = if window.counts[i] as usize == window.tau { 1.0 } else { own };

    let features = [isolation, boundary, density_contrast, chirality, temporal_consistency];
    let total = features
        .iter()
        .zip(weights.as_array())
        .map(|(f, w)| f * w)
        .sum::<f64>()
        .clamp(0.0, 1.0);

    Ok(NodeScore {
        isolation,
        boundary,
        density_contrast,
        chirality,
        temporal_consistency,
        total,
    })
}

/// Splits the flagged set into `(abstained, corrected)`.
pub fn decide(
    cell: &HexCell,
    window: &SyndromeWindow,
    policy: DecoderPolicy,
    weights: &ClassifierWeights,
) -> Result<(BTreeSet<usize>, BTreeSet<usize>)> {
    let flagged = detect(window);
    match policy {
        DecoderPolicy::Standard => Ok((BTreeSet::new(), flagged)),
        DecoderPolicy::RegimeClassifier => {
            let mut abstained = BTreeSet::new();
            let mut corrected = BTreeSet::new();
            for i in flagged {
                // ties abstain
                if score_node(cell, window, i, weights)?.total >= weights.theta {
                    abstained.insert(i);
                } else {
                    corrected.insert(i);
                }
            }
            Ok((abstained, corrected))
        }
    }
}

/// Resolves the residual error set after corrections.
///
/// One fidelity draw is taken for every Binary node in node order, whether
/// or not it was corrected, so that two policies handed clones of the same
/// stream see identical fidelity outcomes.
pub fn apply_corrections<R: Rng + ?Sized>(
    events: &TrialEvents,
    corrected: &BTreeSet<usize>,
    abstained: &BTreeSet<usize>,
    cfg: &ModelConfig,
    rng: &mut R,
) -> Result<DecodeOutcome> {
    if let Some(&i) = corrected.intersection(abstained).next() {
        return Err(Error::Contract(format!("node {i} is both corrected and abstained")));
    }
    let n = events.kinds.len();
    if let Some(&i) = corrected.iter().chain(abstained).find(|&&i| i >= n) {
        return arg(format!("node index {i} out of range for {n} nodes"));
    }

    let mut out = DecodeOutcome {
        flagged: corrected.union(abstained).copied().collect(),
        abstained: abstained.clone(),
        corrected: corrected.clone(),
        ..Default::default()
    };
    for (i, kind) in events.kinds.iter().enumerate() {
        match kind {
            EventKind::Binary => {
                let fixes = rng.random::<f64>() < cfg.s_fidelity;
                if corrected.contains(&i) {
                    if !fixes {
                        out.residual_errors.insert(i);
                    }
                } else {
                    out.residual_errors.insert(i);
                    out.missed_binary += 1;
                }
            }
            EventKind::Ternary => {
                if corrected.contains(&i) {
                    out.residual_errors.insert(i);
                    out.misc_ternary += 1;
                    out.injected_errors += 1;
                } else if abstained.contains(&i) {
                    out.correct_abstains += 1;
                }
            }
            EventKind::None => {
                if corrected.contains(&i) {
                    out.residual_errors.insert(i);
                    out.injected_errors += 1;
                }
            }
        }
    }
    out.logical_failure = !out.residual_errors.is_empty();
    Ok(out)
}
