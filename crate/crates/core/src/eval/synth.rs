//! Synthetic multi-label benchmark with items that bridge two classes.
//!
//! Three classes `a`, `b`, `c`. Gaussian clusters labelled `{a}` and `{b}`
//! sit on opposite sides of the first axis, a smaller cluster labelled
//! `{a, b}` sits between them, and a distractor cluster `{c}` sits off to the
//! side along the second axis. Pairs with one query from `{a}` and one from
//! `{b}` are the interesting ones: only bridge items are uniquely related to
//! both.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{FeatureDataset, LabelMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeBenchmark {
    pub cluster_size: usize,
    pub bridge_size: usize,
    pub distractor_size: usize,
    pub dim: usize,
    /// Distance of the `{a}` and `{b}` centres from the origin.
    pub separation: f64,
    /// Per-coordinate standard deviation of the class clusters.
    pub spread: f64,
    /// Per-coordinate standard deviation of the bridge cluster.
    pub bridge_spread: f64,
}

impl Default for BridgeBenchmark {
    fn default() -> Self {
        Self {
            cluster_size: 150,
            bridge_size: 40,
            distractor_size: 150,
            dim: 16,
            separation: 3.0,
            spread: 1.0,
            bridge_spread: 1.0,
        }
    }
}

impl BridgeBenchmark {
    pub fn generate(&self, seed: u64) -> Result<(FeatureDataset, LabelMatrix)> {
        if self.dim < 2 {
            return Err(Error::Config("benchmark needs at least two dimensions".into()));
        }
        if self.cluster_size == 0 || self.bridge_size == 0 {
            return Err(Error::Config("class and bridge clusters must be non-empty".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let groups: [(&str, usize, [f64; 2], f64, [bool; 3]); 4] = [
            ("a", self.cluster_size, [-self.separation, 0.0], self.spread, [true, false, false]),
            ("b", self.cluster_size, [self.separation, 0.0], self.spread, [false, true, false]),
            ("ab", self.bridge_size, [0.0, 0.0], self.bridge_spread, [true, true, false]),
            ("c", self.distractor_size, [0.0, 2.0 * self.separation], self.spread, [false, false, true]),
        ];
        let mut ids = Vec::new();
        let mut features = Vec::new();
        let mut bits = Vec::new();
        for (name, size, centre, sd, labels) in groups {
            for i in 0..size {
                ids.push(format!("{name}{i}"));
                for d in 0..self.dim {
                    let mean = if d < 2 { centre[d] } else { 0.0 };
                    let z: f64 = StandardNormal.sample(&mut rng);
                    features.push(mean + sd * z);
                }
                bits.extend_from_slice(&labels);
            }
        }
        let rows = ids.len();
        let ds = FeatureDataset::new(ids, features, self.dim)?;
        let names = ["label_a", "label_b", "label_c"].map(String::from).to_vec();
        Ok((ds, LabelMatrix::new(names, bits, rows)?))
    }

    pub fn len(&self) -> usize {
        2 * self.cluster_size + self.bridge_size + self.distractor_size
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
