//! Mixed binary/ternary event generation, syndrome extraction over a
//! detection window, and synthetic syndrome fixtures for the statistics
//! toolkit.
//!
//! Events are drawn in two passes over the cell's spiral order. Binary
//! errors are independent at rate `p(1 - f)`. Ternary transitions are then
//! drawn on the remaining quiet nodes at rate `p f`, enhanced on boundary
//! nodes by `1 + (6 - coord)/6`, suppressed on interior nodes by
//! `interior_suppression`, and damped by `(1 - alpha)` next to a node that
//! already transitioned in the same trial.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::SyndromeDataset;
use crate::error::{arg, Result};
use crate::lattice::HexCell;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    None,
    Binary,
    Ternary,
}

/// Parameters of the mixed error model and of syndrome activation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Physical event rate per node per trial.
    pub p: f64,
    /// Ternary fraction.
    pub f: f64,
    /// Anti-bunching strength.
    pub alpha: f64,
    /// Ternary rate multiplier on interior (full-coordination) nodes.
    pub interior_suppression: f64,
    /// Per-round activation probability of a Binary node.
    pub a_b: f64,
    /// Per-round co-activation probability of each neighbor of an active Binary node.
    pub leak_c: f64,
    /// Per-round activation probability of a Ternary node.
    pub a_t: f64,
    /// Per-round false activation probability of a quiet node.
    pub q_false: f64,
    /// Probability that correcting a Binary node removes the error.
    pub s_fidelity: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            p: 0.01,
            f: 0.144,
            alpha: 0.5,
            interior_suppression: 0.5,
            a_b: 0.95,
            leak_c: 0.35,
            a_t: 0.76,
            q_false: 0.01,
            s_fidelity: 1.0,
        }
    }
}

impl ModelConfig {
    /// Activation parameters selected by the calibration search; see the
    /// README for how they were obtained.
    pub fn calibrated() -> Self {
        Self {
            a_b: 0.85,
            leak_c: 0.34,
            q_false: 0.0,
            s_fidelity: 0.25,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("p", self.p),
            ("f", self.f),
            ("alpha", self.alpha),
            ("interior_suppression", self.interior_suppression),
            ("a_b", self.a_b),
            ("leak_c", self.leak_c),
            ("a_t", self.a_t),
            ("q_false", self.q_false),
            ("s_fidelity", self.s_fidelity),
        ];
        for (name, v) in fields {
            if !(0.0..=1.0).contains(&v) {
                return arg(format!("{name} must be a probability in [0, 1], got {v}"));
            }
        }
        Ok(())
    }

    pub fn binary_rate(&self) -> f64 {
        self.p * (1.0 - self.f)
    }

    pub fn ternary_rate(&self) -> f64 {
        self.p * self.f
    }

    /// Coordination multiplier applied to the ternary rate before anti-bunching.
    pub fn coordination_multiplier(&self, coordination: usize) -> f64 {
        if coordination < 6 {
            1.0 + (6 - coordination) as f64 / 6.0
        } else {
            self.interior_suppression
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialEvents {
    pub kinds: Vec<EventKind>,
}

impl TrialEvents {
    pub fn quiet(n: usize) -> Self {
        Self {
            kinds: vec![EventKind::None; n],
        }
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.kinds.iter().filter(|&&k| k == kind).count()
    }
}

/// Per-node activations over `tau` rounds. Bits are node-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyndromeWindow {
    pub tau: usize,
    pub bits: Vec<bool>,
    pub counts: Vec<u32>,
}

impl SyndromeWindow {
    pub fn zeros(nodes: usize, tau: usize) -> Self {
        Self {
            tau,
            bits: vec![false; nodes * tau],
            counts: vec![0; nodes],
        }
    }

    /// Builds a window from per-node counts, filling the first `count` rounds.
    pub fn from_counts(tau: usize, counts: &[u32]) -> Result<Self> {
        if tau == 0 {
            return arg("tau must be at least 1");
        }
        let mut w = Self::zeros(counts.len(), tau);
        for (i, &c) in counts.iter().enumerate() {
            if c as usize > tau {
                return arg(format!("count {c} at node {i} exceeds tau {tau}"));
            }
            for r in 0..c as usize {
                w.bits[i * tau + r] = true;
            }
            w.counts[i] = c;
        }
        Ok(w)
    }

    pub fn nodes(&self) -> usize {
        self.counts.len()
    }

    pub fn bit(&self, node: usize, round: usize) -> bool {
        self.bits[node * self.tau + round]
    }
}

pub fn sample_events<R: Rng + ?Sized>(cell: &HexCell, cfg: &ModelConfig, rng: &mut R) -> TrialEvents {
    let n = cell.len();
    let mut kinds = vec![EventKind::None; n];

    let pb = cfg.binary_rate().clamp(0.0, 1.0);
    for k in kinds.iter_mut() {
        if rng.random::<f64>() < pb {
            *k = EventKind::Binary;
        }
    }

    let pt = cfg.ternary_rate();
    for i in 0..n {
        if kinds[i] != EventKind::None {
            continue;
        }
        let mut prob = pt * cfg.coordination_multiplier(cell.coordination[i]);
        if cell.adjacency[i].iter().any(|&j| kinds[j] == EventKind::Ternary) {
            prob *= 1.0 - cfg.alpha;
        }
        if rng.random::<f64>() < prob.clamp(0.0, 1.0) {
            kinds[i] = EventKind::Ternary;
        }
    }

    TrialEvents { kinds }
}

pub fn extract_syndrome<R: Rng + ?Sized>(
    cell: &HexCell,
    events: &TrialEvents,
    tau: usize,
    cfg: &ModelConfig,
    rng: &mut R,
) -> Result<SyndromeWindow> {
    if tau == 0 {
        return arg("tau must be at least 1");
    }
    let n = cell.len();
    if events.kinds.len() != n {
        return arg(format!("events cover {} nodes, cell has {n}", events.kinds.len()));
    }
    let mut w = SyndromeWindow::zeros(n, tau);
    for round in 0..tau {
        for i in 0..n {
            match events.kinds[i] {
                EventKind::Binary => {
                    if rng.random::<f64>() < cfg.a_b {
                        w.bits[i * tau + round] = true;
                        for &j in &cell.adjacency[i] {
                            if rng.random::<f64>() < cfg.leak_c {
                                w.bits[j * tau + round] = true;
                            }
                        }
                    }
                }
                EventKind::Ternary => {
                    if rng.random::<f64>() < cfg.a_t {
                        w.bits[i * tau + round] = true;
                    }
                }
                EventKind::None => {
                    if rng.random::<f64>() < cfg.q_false {
                        w.bits[i * tau + round] = true;
                    }
                }
            }
        }
    }
    for i in 0..n {
        w.counts[i] = w.bits[i * tau..(i + 1) * tau].iter().filter(|&&b| b).count() as u32;
    }
    Ok(w)
}

/// Independent activations at a fixed rate, one round per shot.
pub fn generate_poisson_fixture<R: Rng + ?Sized>(
    n_detectors: usize,
    n_shots: usize,
    rate: f64,
    rng: &mut R,
) -> Result<SyndromeDataset> {
    if !(0.0..=1.0).contains(&rate) {
        return arg(format!("rate must be in [0, 1], got {rate}"));
    }
    let mut ds = SyndromeDataset::zeros("poisson-fixture", n_shots, 1, n_detectors);
    for b in ds.bits.iter_mut() {
        *b = rng.random::<f64>() < rate;
    }
    ds.metadata.insert("rate".into(), rate.to_string());
    Ok(ds)
}

/// Activations coupled along the cell's edges, one round per shot.
///
/// Each node starts as an independent Bernoulli(`base_rate`) draw. Edges are
/// then visited in node order and, with probability `|edge_coupling|`, the
/// later endpoint is re-drawn conditionally on the earlier one: a copy for
/// positive coupling, an exclusion (`0` if the partner is active, else
/// Bernoulli(`r / (1 - r)`)) for negative coupling. Both updates keep every
/// marginal at `base_rate`, so only the pair correlations move.
pub fn generate_edge_correlated_fixture<R: Rng + ?Sized>(
    cell: &HexCell,
    n_shots: usize,
    base_rate: f64,
    edge_coupling: f64,
    rng: &mut R,
) -> Result<SyndromeDataset> {
    if !(0.0..=1.0).contains(&base_rate) {
        return arg(format!("base_rate must be in [0, 1], got {base_rate}"));
    }
    if !(-1.0..=1.0).contains(&edge_coupling) {
        return arg(format!("edge_coupling must be in [-1, 1], got {edge_coupling}"));
    }
    if edge_coupling < 0.0 && base_rate > 0.5 {
        return arg("negative edge_coupling needs base_rate <= 0.5");
    }
    let n = cell.len();
    let edges = cell.edges();
    let refill = if base_rate < 1.0 { base_rate / (1.0 - base_rate) } else { 0.0 };
    let strength = edge_coupling.abs();

    let mut ds = SyndromeDataset::zeros("edge-fixture", n_shots, 1, n);
    ds.distance_or_rings = cell.rings as u32;
    ds.adjacency = Some(edges.clone());
    ds.metadata.insert("base_rate".into(), base_rate.to_string());
    ds.metadata.insert("edge_coupling".into(), edge_coupling.to_string());

    let mut x = vec![false; n];
    for shot in 0..n_shots {
        for v in x.iter_mut() {
            *v = rng.random::<f64>() < base_rate;
        }
        if strength > 0.0 {
            for &(i, j) in &edges {
                if rng.random::<f64>() < strength {
                    x[j] = if edge_coupling > 0.0 {
                        x[i]
                    } else if x[i] {
                        false
                    } else {
                        rng.random::<f64>() < refill
                    };
                }
            }
        }
        for (d, &v) in x.iter().enumerate() {
            ds.set(shot, 0, d, v);
        }
    }
    Ok(ds)
}

/// Independent detectors with round-to-round persistence: each round after
/// the first repeats the previous round's value with probability
/// `cross_round_coupling`, otherwise redraws at `rate`.
pub fn generate_temporal_fixture<R: Rng + ?Sized>(
    n_detectors: usize,
    n_shots: usize,
    rounds: usize,
    rate: f64,
    cross_round_coupling: f64,
    rng: &mut R,
) -> Result<SyndromeDataset> {
    if !(0.0..=1.0).contains(&rate) || !(0.0..=1.0).contains(&cross_round_coupling) {
        return arg("rate and cross_round_coupling must lie in [0, 1]");
    }
    if rounds == 0 {
        return arg("rounds must be at least 1");
    }
    let mut ds = SyndromeDataset::zeros("temporal-fixture", n_shots, rounds, n_detectors);
    for shot in 0..n_shots {
        for d in 0..n_detectors {
            let mut prev = rng.random::<f64>() < rate;
            ds.set(shot, 0, d, prev);
            for r in 1..rounds {
                if rng.random::<f64>() >= cross_round_coupling {
                    prev = rng.random::<f64>() < rate;
                }
                ds.set(shot, r, d, prev);
            }
        }
    }
    ds.metadata.insert("rate".into(), rate.to_string());
    ds.metadata
        .insert("cross_round_coupling".into(), cross_round_coupling.to_string());
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_cell;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn no_ternary_when_f_zero() {
        let cell = build_cell(2).unwrap();
        let cfg = ModelConfig { f: 0.0, p: 0.3, ..Default::default() };
        let mut r = rng(1);
        for _ in 0..2000 {
            let ev = sample_events(&cell, &cfg, &mut r);
            assert_eq!(ev.count(EventKind::Ternary), 0);
        }
    }

    #[test]
    fn all_quiet_when_p_zero() {
        let cell = build_cell(3).unwrap();
        let cfg = ModelConfig { p: 0.0, ..Default::default() };
        let mut r = rng(2);
        for _ in 0..500 {
            let ev = sample_events(&cell, &cfg, &mut r);
            assert_eq!(ev.count(EventKind::None), cell.len());
        }
    }

    #[test]
    fn quiet_window_is_zero() {
        let cell = build_cell(2).unwrap();
        let cfg = ModelConfig { q_false: 0.0, ..Default::default() };
        let ev = TrialEvents::quiet(cell.len());
        let w = extract_syndrome(&cell, &ev, 5, &cfg, &mut rng(3)).unwrap();
        assert!(w.bits.iter().all(|&b| !b));
        assert!(w.counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn deterministic_ternary_activation() {
        let cell = build_cell(2).unwrap();
        let cfg = ModelConfig { a_t: 1.0, q_false: 0.0, ..Default::default() };
        let mut ev = TrialEvents::quiet(cell.len());
        ev.kinds[4] = EventKind::Ternary;
        let w = extract_syndrome(&cell, &ev, 5, &cfg, &mut rng(4)).unwrap();
        for (i, &c) in w.counts.iter().enumerate() {
            assert_eq!(c, if i == 4 { 5 } else { 0 });
        }
    }

    #[test]
    fn binary_leak_frequency() {
        let cell = build_cell(2).unwrap();
        let cfg = ModelConfig { a_b: 1.0, leak_c: 0.3, q_false: 0.0, ..Default::default() };
        let mut ev = TrialEvents::quiet(cell.len());
        ev.kinds[0] = EventKind::Binary;
        let trials = 100_000;
        let mut hits = vec![0usize; cell.len()];
        let mut r = rng(5);
        for _ in 0..trials {
            let w = extract_syndrome(&cell, &ev, 1, &cfg, &mut r).unwrap();
            for (i, &c) in w.counts.iter().enumerate() {
                hits[i] += c as usize;
            }
        }
        let sigma = (0.3 * 0.7 / trials as f64).sqrt();
        for &j in &cell.adjacency[0] {
            let freq = hits[j] as f64 / trials as f64;
            assert!((freq - 0.3).abs() < 3.0 * sigma, "neighbor {j}: {freq}");
        }
        assert_eq!(hits[0], trials);
        // nodes outside the first ring never light up
        assert!(hits[7..].iter().all(|&h| h == 0));
    }

    #[test]
    fn tau_zero_rejected() {
        let cell = build_cell(1).unwrap();
        let ev = TrialEvents::quiet(7);
        assert!(extract_syndrome(&cell, &ev, 0, &ModelConfig::default(), &mut rng(0)).is_err());
    }

    #[test]
    fn config_validation_and_json() {
        let cfg = ModelConfig::default();
        cfg.validate().unwrap();
        assert!(ModelConfig { a_t: 1.5, ..cfg }.validate().is_err());
        let s = serde_json::to_string(&cfg).unwrap();
        for key in ["\"p\"", "\"f\"", "\"alpha\"", "\"interior_suppression\"", "\"a_b\"", "\"leak_c\"", "\"a_t\"", "\"q_false\"", "\"s_fidelity\""] {
            assert!(s.contains(key), "{key} missing in {s}");
        }
        let back: ModelConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<ModelConfig>(r#"{"p":0.1,"bogus":1}"#).is_err());
    }

    #[test]
    fn poisson_fixture_zero_rate() {
        let ds = generate_poisson_fixture(10, 100, 0.0, &mut rng(6)).unwrap();
        assert!(ds.bits.iter().all(|&b| !b));
    }

    #[test]
    fn zero_coupling_matches_poisson_marginals() {
        let cell = build_cell(2).unwrap();
        let ds = generate_edge_correlated_fixture(&cell, 20_000, 0.1, 0.0, &mut rng(7)).unwrap();
        let rate = ds.bits.iter().filter(|&&b| b).count() as f64 / ds.bits.len() as f64;
        assert!((rate - 0.1).abs() < 0.003);
    }

    #[test]
    fn coupling_keeps_marginals() {
        let cell = build_cell(2).unwrap();
        for k in [-1.0, -0.5, 0.5, 1.0] {
            let ds = generate_edge_correlated_fixture(&cell, 40_000, 0.1, k, &mut rng(8)).unwrap();
            let rate = ds.bits.iter().filter(|&&b| b).count() as f64 / ds.bits.len() as f64;
            assert!((rate - 0.1).abs() < 0.003, "coupling {k}: rate {rate}");
        }
    }
}
