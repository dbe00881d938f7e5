//! Datasets, label matrices, query sets and shared configuration.

mod io;

pub use io::{fingerprint_file, load_dataset, save_dataset, DatasetFormat};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` items, each an opaque id plus an `m`-dimensional feature vector.
///
/// Features are stored row-major and are immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDataset {
    ids: Vec<String>,
    features: Vec<f64>,
    dim: usize,
}

impl FeatureDataset {
    /// Builds a dataset from ids and row-major features, enforcing the
    /// uniform-dimension, unique-id and finiteness invariants.
    pub fn new(ids: Vec<String>, features: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Integrity("feature dimension must be at least 1".into()));
        }
        if ids.is_empty() {
            return Err(Error::Integrity("dataset has no items".into()));
        }
        if features.len() != ids.len() * dim {
            return Err(Error::Dimension {
                expected: ids.len() * dim,
                actual: features.len(),
            });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Integrity(format!(
                "non-finite feature in item {} (column {})",
                pos / dim,
                pos % dim
            )));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Integrity(format!("duplicate item_id {id:?}")));
            }
        }
        Ok(Self { ids, features, dim })
    }

    /// Builds a dataset from rows, naming items `0..n`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut features = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Parse {
                    row: i + 1,
                    message: format!("expected {dim} features, found {}", row.len()),
                });
            }
            features.extend_from_slice(row);
        }
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::new(ids, features, dim)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.dim)
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Returns a rescaled copy. Nothing else in the crate rescales features.
    pub fn normalized(&self, mode: Normalization) -> Self {
        let n = self.len();
        let mut features = self.features.clone();
        for c in 0..self.dim {
            let col = (0..n).map(|i| self.features[i * self.dim + c]);
            let (shift, scale) = match mode {
                Normalization::MinMax => {
                    let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v), hi.max(v))
                    });
                    (lo, hi - lo)
                }
                Normalization::ZScore => {
                    let mean = col.clone().sum::<f64>() / n as f64;
                    let var = col.map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
                    (mean, var.sqrt())
                }
            };
            let scale = if scale > 0.0 { scale } else { 1.0 };
            for i in 0..n {
                let v = &mut features[i * self.dim + c];
                *v = (*v - shift) / scale;
            }
        }
        Self {
            ids: self.ids.clone(),
            features,
            dim: self.dim,
        }
    }
}

/// Explicit feature rescaling modes, applied only on request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    MinMax,
    ZScore,
}

/// `n × C` binary label matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMatrix {
    names: Vec<String>,
    bits: Vec<bool>,
    rows: usize,
}

impl LabelMatrix {
    pub fn new(names: Vec<String>, bits: Vec<bool>, rows: usize) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Integrity("label matrix needs at least one class".into()));
        }
        if bits.len() != rows * names.len() {
            return Err(Error::Dimension {
                expected: rows * names.len(),
                actual: bits.len(),
            });
        }
        Ok(Self { names, bits, rows })
    }

    /// Builds a matrix with classes named `label_0..label_{C-1}`.
    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let classes = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != classes) {
            return Err(Error::Integrity("label rows differ in length".into()));
        }
        let names = (0..classes).map(|c| format!("label_{c}")).collect();
        Self::new(names, rows.concat(), rows.len())
    }

    pub fn classes(&self) -> usize {
        self.names.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> &[bool] {
        let c = self.classes();
        &self.bits[i * c..(i + 1) * c]
    }
}

/// `T` distinct in-sample query item indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySet {
    pub queries: Vec<usize>,
}

impl QuerySet {
    pub fn new(queries: Vec<usize>) -> Self {
        Self { queries }
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn contains(&self, item: usize) -> bool {
        self.queries.contains(&item)
    }
}

/// Checks that `qs` is non-empty, in range for `n` items, and duplicate-free.
pub fn validate_query_set(qs: &QuerySet, n: usize) -> Result<()> {
    if qs.is_empty() {
        return Err(Error::Query("at least one query is required".into()));
    }
    let mut seen = HashSet::new();
    for &q in &qs.queries {
        if q >= n {
            return Err(Error::Query(format!("query index {q} out of range for {n} items")));
        }
        if !seen.insert(q) {
            return Err(Error::Query(format!("duplicate query index {q}")));
        }
    }
    Ok(())
}

/// Parameters shared by model building and retrieval. Missing JSON fields
/// take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetrievalConfig {
    /// Manifold ranking trade-off, `1 / (1 + mu)`.
    pub alpha: f64,
    pub anchor_count: usize,
    /// Number of nearest anchors each item is attached to.
    pub nearest_anchors: usize,
    /// Gaussian bandwidth for the dense (classic) ranker.
    pub sigma: f64,
    pub k_return: usize,
    #[serde(default = "default_kmeans_iterations")]
    pub kmeans_iterations: usize,
}

fn default_kmeans_iterations() -> usize {
    50
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self {
            alpha: 0.99,
            anchor_count: 64,
            nearest_anchors: 5,
            sigma: 1.0,
            k_return: 20,
            kmeans_iterations: default_kmeans_iterations(),
        }
    }
}

impl RetrievalConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.anchor_count == 0 || self.anchor_count > n {
            return Err(Error::Config(format!(
                "anchor_count must be in [1, {n}], got {}",
                self.anchor_count
            )));
        }
        if self.nearest_anchors == 0 || self.nearest_anchors > self.anchor_count {
            return Err(Error::Config(format!(
                "nearest_anchors must be in [1, {}], got {}",
                self.anchor_count, self.nearest_anchors
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.k_return == 0 {
            return Err(Error::Config("k_return must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(n: usize) -> FeatureDataset {
        FeatureDataset::from_rows(&(0..n).map(|i| vec![i as f64]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn query_set_validation() {
        let d = ds(10);
        assert!(validate_query_set(&QuerySet::new(vec![0, 5]), d.len()).is_ok());
        let dup = validate_query_set(&QuerySet::new(vec![0, 0]), d.len()).unwrap_err();
        assert!(dup.to_string().contains("duplicate"));
        let range = validate_query_set(&QuerySet::new(vec![12]), d.len()).unwrap_err();
        assert!(range.to_string().contains("out of range"));
        assert!(validate_query_set(&QuerySet::new(vec![]), d.len()).is_err());
    }

    #[test]
    fn dataset_rejects_bad_input() {
        assert!(FeatureDataset::new(vec!["a".into(), "a".into()], vec![0.0, 1.0], 1).is_err());
        assert!(FeatureDataset::new(vec!["a".into()], vec![f64::NAN], 1).is_err());
        assert!(FeatureDataset::new(vec!["a".into()], vec![1.0, 2.0], 1).is_err());
    }

    #[test]
    fn normalization_is_explicit() {
        let d = FeatureDataset::from_rows(&[vec![0.0, 5.0], vec![2.0, 5.0], vec![4.0, 5.0]]).unwrap();
        let mm = d.normalized(Normalization::MinMax);
        assert_eq!(mm.row(1), &[0.5, 0.0]);
        let z = d.normalized(Normalization::ZScore);
        assert!((z.row(0)[0] + 1.224744871391589).abs() < 1e-12);
        assert_eq!(d.row(1), &[2.0, 5.0]);
    }

    #[test]
    fn config_validation() {
        let mut cfg = RetrievalConfig::default();
        assert!(cfg.validate(100).is_ok());
        assert!(cfg.validate(10).is_err());
        cfg.alpha = 1.0;
        assert!(cfg.validate(100).is_err());
        cfg.alpha = 0.5;
        cfg.nearest_anchors = 65;
        assert!(cfg.validate(100).is_err());
    }
}
