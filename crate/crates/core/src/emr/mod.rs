//! Efficient manifold ranking over an anchor graph, plus the dense
//! manifold ranker it approximates.
//!
//! Items are tied to `A` anchors through a column-stochastic weight matrix
//! `Z` (`A × n`). The item affinity is `W = ZᵀZ`, the degree is
//! `D_ii = z_iᵀ Σ_j z_j`, and with `H = Z D^{-1/2}` the ranking for a query
//! indicator `y` is
//!
//! ```text
//! r = (I_n − Hᵀ (H Hᵀ − I_A / α)⁻¹ H) y
//! ```
//!
//! which equals `(I_n − α HᵀH)⁻¹ y` by the Woodbury identity while only
//! inverting an `A × A` matrix.

mod classic;
mod kmeans;
mod persist;

pub use classic::{classic_mr_iterate, classic_mr_rank, ClassicGraph, DENSE_CAP};
pub use kmeans::kmeans;
pub use persist::{load_model, save_model};

use nalgebra::DMatrix;

use crate::data::{FeatureDataset, RetrievalConfig};
use crate::error::{Error, Result};
use kmeans::squared_distance;

/// Ranking scores over all items.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingVector {
    pub scores: Vec<f64>,
    /// The query item, when the vector was produced for a single query.
    pub query_index: Option<usize>,
}

/// Sparse `A × n` anchor weight matrix in compressed-sparse-column layout:
/// column `i` lists the anchors of item `i` and their weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorWeights {
    pub(crate) col_ptr: Vec<usize>,
    pub(crate) anchor: Vec<usize>,
    pub(crate) weight: Vec<f64>,
}

impl AnchorWeights {
    /// `(anchor, weight)` pairs of item `i`.
    pub fn column(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.col_ptr[i]..self.col_ptr[i + 1];
        self.anchor[span.clone()].iter().copied().zip(self.weight[span].iter().copied())
    }

    pub fn items(&self) -> usize {
        self.col_ptr.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmrModel {
    anchors: Vec<f64>,
    anchor_count: usize,
    dim: usize,
    weights: AnchorWeights,
    degree: Vec<f64>,
    core_inverse: DMatrix<f64>,
    alpha: f64,
    /// `H = Z D^{-1/2}`, same sparsity as `weights`.
    scaled: Vec<f64>,
}

impl EmrModel {
    pub(crate) fn from_parts(
        anchors: Vec<f64>,
        anchor_count: usize,
        dim: usize,
        weights: AnchorWeights,
        degree: Vec<f64>,
        core_inverse: DMatrix<f64>,
        alpha: f64,
    ) -> Self {
        let scaled = scale_columns(&weights, &degree);
        Self {
            anchors,
            anchor_count,
            dim,
            weights,
            degree,
            core_inverse,
            alpha,
            scaled,
        }
    }

    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn anchor_count(&self) -> usize {
        self.anchor_count
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Anchor coordinates, row-major `A × m`.
    pub fn anchors(&self) -> &[f64] {
        &self.anchors
    }

    pub fn anchor(&self, a: usize) -> &[f64] {
        &self.anchors[a * self.dim..(a + 1) * self.dim]
    }

    pub fn weights(&self) -> &AnchorWeights {
        &self.weights
    }

    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    pub fn core_inverse(&self) -> &DMatrix<f64> {
        &self.core_inverse
    }

    /// `H Hᵀ − I/α`, the matrix whose inverse is cached.
    pub fn core_matrix(&self) -> DMatrix<f64> {
        core_matrix(&self.weights, &self.scaled, self.anchor_count, self.alpha)
    }

    /// Checks the model against a dataset's shape.
    pub fn check_dataset(&self, ds: &FeatureDataset) -> Result<()> {
        if ds.len() != self.len() || ds.dim() != self.dim {
            return Err(Error::ModelMismatch(format!(
                "model has n = {}, m = {}; dataset has n = {}, m = {}",
                self.len(),
                self.dim,
                ds.len(),
                ds.dim()
            )));
        }
        Ok(())
    }

    /// Ranks all items against an arbitrary indicator vector `y`.
    pub fn rank(&self, y: &[f64]) -> Result<RankingVector> {
        let n = self.len();
        if y.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: y.len(),
            });
        }
        let mut hy = vec![0.0; self.anchor_count];
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                for k in self.weights.col_ptr[i]..self.weights.col_ptr[i + 1] {
                    hy[self.weights.anchor[k]] += self.scaled[k] * yi;
                }
            }
        }
        Ok(RankingVector {
            scores: self.apply(y, &hy),
            query_index: None,
        })
    }

    /// Ranks all items against the single query item `q`.
    pub fn rank_query(&self, q: usize) -> Result<RankingVector> {
        let n = self.len();
        if q >= n {
            return Err(Error::Query(format!("query index {q} out of range for {n} items")));
        }
        let mut hy = vec![0.0; self.anchor_count];
        for k in self.weights.col_ptr[q]..self.weights.col_ptr[q + 1] {
            hy[self.weights.anchor[k]] += self.scaled[k];
        }
        let mut y = vec![0.0; n];
        y[q] = 1.0;
        Ok(RankingVector {
            scores: self.apply(&y, &hy),
            query_index: Some(q),
        })
    }

    fn apply(&self, y: &[f64], hy: &[f64]) -> Vec<f64> {
        let a = self.anchor_count;
        let mut u = vec![0.0; a];
        for (r, ur) in u.iter_mut().enumerate() {
            *ur = (0..a).map(|c| self.core_inverse[(r, c)] * hy[c]).sum();
        }
        (0..self.len())
            .map(|i| {
                let span = self.weights.col_ptr[i]..self.weights.col_ptr[i + 1];
                let dot: f64 = span.map(|k| self.scaled[k] * u[self.weights.anchor[k]]).sum();
                y[i] - dot
            })
            .collect()
    }
}

fn scale_columns(weights: &AnchorWeights, degree: &[f64]) -> Vec<f64> {
    let mut scaled = weights.weight.clone();
    for (i, d) in degree.iter().enumerate() {
        let s = 1.0 / d.sqrt();
        for v in &mut scaled[weights.col_ptr[i]..weights.col_ptr[i + 1]] {
            *v *= s;
        }
    }
    scaled
}

fn core_matrix(weights: &AnchorWeights, scaled: &[f64], a: usize, alpha: f64) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::zeros(a, a);
    for i in 0..weights.items() {
        let span = weights.col_ptr[i]..weights.col_ptr[i + 1];
        for p in span.clone() {
            for q in span.clone() {
                m[(weights.anchor[p], weights.anchor[q])] += scaled[p] * scaled[q];
            }
        }
    }
    for d in 0..a {
        m[(d, d)] -= 1.0 / alpha;
    }
    m
}

/// Anchor weights for one item: the `s` nearest anchors under a triangular
/// kernel with bandwidth equal to the distance of the `(s+1)`-th nearest
/// anchor, normalised to sum to one. All-zero kernels fall back to uniform.
fn item_weights(x: &[f64], anchors: &[f64], dim: usize, s: usize) -> Vec<(usize, f64)> {
    let mut dist: Vec<(f64, usize)> = anchors
        .chunks_exact(dim)
        .enumerate()
        .map(|(a, u)| (squared_distance(x, u).sqrt(), a))
        .collect();
    dist.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
    let bandwidth = match dist.get(s) {
        Some(&(d, _)) => d,
        // s == A: no (s+1)-th anchor, so widen just past the farthest.
        None => dist[s - 1].0 * (1.0 + 1e-9),
    };
    let nearest = &dist[..s];
    let mut out: Vec<(usize, f64)> = if bandwidth > 0.0 {
        nearest
            .iter()
            .map(|&(d, a)| (a, (1.0 - d / bandwidth).max(0.0)))
            .collect()
    } else {
        Vec::new()
    };
    let total: f64 = out.iter().map(|p| p.1).sum();
    if total > 0.0 {
        out.retain(|p| p.1 > 0.0);
        for p in &mut out {
            p.1 /= total;
        }
    } else {
        out = nearest.iter().map(|&(_, a)| (a, 1.0 / s as f64)).collect();
    }
    out.sort_by_key(|p| p.0);
    out
}

/// Builds the anchor graph and caches `(H Hᵀ − I/α)⁻¹`.
pub fn build_emr_model(ds: &FeatureDataset, cfg: &RetrievalConfig, seed: u64) -> Result<EmrModel> {
    cfg.validate(ds.len())?;
    let a = cfg.anchor_count;
    let anchors = kmeans(ds, a, cfg.kmeans_iterations, seed);
    build_with_anchors(ds, anchors, cfg.nearest_anchors, cfg.alpha)
}

/// Builds a model from explicit anchors (row-major `A × m`).
pub fn build_with_anchors(
    ds: &FeatureDataset,
    anchors: Vec<f64>,
    nearest_anchors: usize,
    alpha: f64,
) -> Result<EmrModel> {
    let dim = ds.dim();
    if anchors.is_empty() || anchors.len() % dim != 0 {
        return Err(Error::Dimension {
            expected: dim,
            actual: anchors.len(),
        });
    }
    let a = anchors.len() / dim;
    if nearest_anchors == 0 || nearest_anchors > a {
        return Err(Error::Config(format!("nearest_anchors must be in [1, {a}]")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1), got {alpha}")));
    }

    let n = ds.len();
    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut anchor = Vec::with_capacity(n * nearest_anchors);
    let mut weight = Vec::with_capacity(n * nearest_anchors);
    col_ptr.push(0);
    for x in ds.rows() {
        for (k, w) in item_weights(x, &anchors, dim, nearest_anchors) {
            anchor.push(k);
            weight.push(w);
        }
        col_ptr.push(anchor.len());
    }
    let weights = AnchorWeights {
        col_ptr,
        anchor,
        weight,
    };

    let mut anchor_mass = vec![0.0; a];
    for (k, &w) in weights.anchor.iter().zip(&weights.weight) {
        anchor_mass[*k] += w;
    }
    let degree: Vec<f64> = (0..n)
        .map(|i| weights.column(i).map(|(k, w)| w * anchor_mass[k]).sum())
        .collect();
    if let Some(item) = degree.iter().position(|&d| d <= 0.0 || !d.is_finite()) {
        return Err(Error::Connectivity { item });
    }

    let scaled = scale_columns(&weights, &degree);
    let core = core_matrix(&weights, &scaled, a, alpha);
    let core_inverse = core
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("anchor core matrix is singular".into()))?;
    if core_inverse.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("anchor core inverse is not finite".into()));
    }
    Ok(EmrModel {
        anchors,
        anchor_count: a,
        dim,
        weights,
        degree,
        core_inverse,
        alpha,
        scaled,
    })
}

/// `r* = (I − Hᵀ(HHᵀ − I/α)⁻¹H) y`.
pub fn emr_rank(model: &EmrModel, y: &[f64]) -> Result<RankingVector> {
    model.rank(y)
}
