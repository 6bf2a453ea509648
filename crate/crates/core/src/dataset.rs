use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Binary syndrome records, `shots x rounds x detectors`, stored shot-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyndromeDataset {
    pub platform: String,
    pub distance_or_rings: u32,
    pub shots: usize,
    pub rounds: usize,
    pub detectors: usize,
    pub bits: Vec<bool>,
    pub adjacency: Option<Vec<(usize, usize)>>,
    pub metadata: BTreeMap<String, String>,
}

impl SyndromeDataset {
    pub fn zeros(platform: impl Into<String>, shots: usize, rounds: usize, detectors: usize) -> Self {
        Self {
            platform: platform.into(),
            distance_or_rings: 0,
            shots,
            rounds,
            detectors,
            bits: vec![false; shots * rounds * detectors],
            adjacency: None,
            metadata: BTreeMap::new(),
        }
    }

    #[inline]
    pub fn index(&self, shot: usize, round: usize, det: usize) -> usize {
        (shot * self.rounds + round) * self.detectors + det
    }

    #[inline]
    pub fn get(&self, shot: usize, round: usize, det: usize) -> bool {
        self.bits[self.index(shot, round, det)]
    }

    #[inline]
    pub fn set(&mut self, shot: usize, round: usize, det: usize, v: bool) {
        let i = self.index(shot, round, det);
        self.bits[i] = v;
    }

    pub fn round_bits(&self, shot: usize, round: usize) -> &[bool] {
        let start = self.index(shot, round, 0);
        &self.bits[start..start + self.detectors]
    }

    /// Number of active detectors in one round of one shot.
    pub fn round_count(&self, shot: usize, round: usize) -> u32 {
        self.round_bits(shot, round).iter().filter(|&&b| b).count() as u32
    }

    /// Total activations per shot over all rounds.
    pub fn shot_counts(&self) -> Vec<u32> {
        (0..self.shots)
            .map(|s| (0..self.rounds).map(|r| self.round_count(s, r)).sum())
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 || self.rounds == 0 || self.detectors == 0 {
            return Err(Error::Validation(format!(
                "dimensions must be positive (shots {}, rounds {}, detectors {})",
                self.shots, self.rounds, self.detectors
            )));
        }
        if self.bits.len() != self.shots * self.rounds * self.detectors {
            return Err(Error::Validation(format!(
                "bit buffer has {} entries, expected {}",
                self.bits.len(),
                self.shots * self.rounds * self.detectors
            )));
        }
        if let Some(adj) = &self.adjacency {
            if let Some(&(a, b)) = adj.iter().find(|&&(a, b)| a >= self.detectors || b >= self.detectors) {
                return Err(Error::Validation(format!(
                    "adjacency pair ({a}, {b}) exceeds {} detectors",
                    self.detectors
                )));
            }
        }
        Ok(())
    }
}
