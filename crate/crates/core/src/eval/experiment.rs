//! Query-pair experiments: nDCG curves per method and per-front relevance
//! profiles, averaged over pairs and over independently seeded models.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{mq_uniq_rel, ndcg_at_k};
use crate::data::{FeatureDataset, LabelMatrix, QuerySet};
use crate::emr::EmrModel;
use crate::engine::{
    query_rankings, retrieve_from_rankings, DissimilarityMatrix, FrontRanking, Method,
};
use crate::error::{Error, Result};

/// Minimum number of items with nonzero relevance for a pair to be used.
pub const MIN_RELEVANT_ITEMS: usize = 5;

/// Relevance of every item for the query pair `(a, b)`; queries themselves
/// and items with undefined relevance score 0.
pub fn pair_relevance(labels: &LabelMatrix, queries: &[usize]) -> Result<Vec<f64>> {
    let q: Vec<&[bool]> = queries.iter().map(|&i| labels.row(i)).collect();
    (0..labels.rows())
        .map(|j| {
            if queries.contains(&j) {
                Ok(0.0)
            } else {
                mq_uniq_rel(labels.row(j), &q)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryPairBatch {
    pub pairs: Vec<(usize, usize)>,
    pub rng_seed: u64,
}

impl QueryPairBatch {
    /// Draws up to `count` distinct viable pairs uniformly at random.
    ///
    /// A pair is viable when at least [`MIN_RELEVANT_ITEMS`] other items have
    /// positive relevance to it.
    pub fn sample(labels: &LabelMatrix, count: usize, seed: u64) -> Result<Self> {
        let n = labels.rows();
        if n < 2 {
            return Err(Error::Query("need at least two items to form pairs".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = HashSet::new();
        let mut pairs = Vec::with_capacity(count);
        let max_draws = count.saturating_mul(1000).max(10_000);
        for _ in 0..max_draws {
            if pairs.len() == count {
                break;
            }
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a == b || !seen.insert((a, b)) {
                continue;
            }
            if is_viable(labels, a, b) {
                pairs.push((a, b));
            }
        }
        if pairs.is_empty() {
            return Err(Error::Query("no viable query pairs in this dataset".into()));
        }
        Ok(Self {
            pairs,
            rng_seed: seed,
        })
    }
}

pub fn is_viable(labels: &LabelMatrix, a: usize, b: usize) -> bool {
    match pair_relevance(labels, &[a, b]) {
        Ok(rel) => rel.iter().filter(|&&r| r > 0.0).count() >= MIN_RELEVANT_ITEMS,
        Err(_) => false,
    }
}

/// One pair's fronts, each listed as `(d1, relevance)` in retrieval layering.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileInput {
    pub fronts: Vec<Vec<(f64, f64)>>,
}

impl ProfileInput {
    /// Extracts the first `n_fronts` fronts of a two-query layering.
    pub fn from_fronts(fronts: &FrontRanking, relevance: &[f64], n_fronts: usize) -> Result<Self> {
        if fronts.dissimilarity.queries() != 2 {
            return Err(Error::Query("front profiles need exactly two queries".into()));
        }
        Ok(Self {
            fronts: fronts
                .layering
                .fronts
                .iter()
                .take(n_fronts)
                .map(|f| {
                    f.iter()
                        .map(|&p| {
                            let pt = &fronts.points[p];
                            (pt.coords[0], relevance[pt.item_index])
                        })
                        .collect()
                })
                .collect(),
        })
    }
}

/// Mean relevance along each front, tail to tail, on a fixed grid over `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontProfiles {
    pub grid: Vec<f64>,
    /// `curves[f]` is front `f + 1`.
    pub curves: Vec<Vec<f64>>,
    /// Number of pairs that contributed to each front.
    pub counts: Vec<usize>,
}

impl FrontProfiles {
    /// Mean of `curves[front]` over the grid points in `[lo, hi]`.
    pub fn band_mean(&self, front: usize, lo: f64, hi: f64) -> f64 {
        let vals: Vec<f64> = self
            .grid
            .iter()
            .zip(&self.curves[front])
            .filter(|(g, _)| **g >= lo && **g <= hi)
            .map(|(_, v)| *v)
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    }

    /// `front,position,relevance` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("front,position,relevance\n");
        for (f, curve) in self.curves.iter().enumerate() {
            for (g, v) in self.grid.iter().zip(curve) {
                let _ = writeln!(out, "{},{},{}", f + 1, g, v);
            }
        }
        out
    }
}

/// Linear interpolation of values at evenly spaced positions onto the grid.
fn interpolate(values: &[f64], grid: &[f64]) -> Vec<f64> {
    if values.len() == 1 {
        return vec![values[0]; grid.len()];
    }
    let last = (values.len() - 1) as f64;
    grid.iter()
        .map(|&g| {
            let x = g * last;
            let i = (x.floor() as usize).min(values.len() - 2);
            let t = x - i as f64;
            values[i] * (1.0 - t) + values[i + 1] * t
        })
        .collect()
}

/// Averages per-front relevance curves across pairs. Each front is ordered by
/// its first dissimilarity coordinate, positions are mapped to `[0, 1]`, and
/// the relevance is linearly interpolated onto `grid_size` points. A
/// single-point front gives a constant curve.
pub fn front_relevance_profile(
    inputs: &[ProfileInput],
    n_fronts: usize,
    grid_size: usize,
) -> Result<FrontProfiles> {
    if n_fronts == 0 {
        return Err(Error::Config("n_fronts must be at least 1".into()));
    }
    if grid_size < 2 {
        return Err(Error::Config("grid_size must be at least 2".into()));
    }
    let grid: Vec<f64> = (0..grid_size).map(|i| i as f64 / (grid_size - 1) as f64).collect();
    let mut sums = vec![vec![0.0; grid_size]; n_fronts];
    let mut counts = vec![0usize; n_fronts];
    for input in inputs {
        for (f, front) in input.fronts.iter().take(n_fronts).enumerate() {
            if front.is_empty() {
                continue;
            }
            let mut pts = front.clone();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let rel: Vec<f64> = pts.iter().map(|p| p.1).collect();
            for (s, v) in sums[f].iter_mut().zip(interpolate(&rel, &grid)) {
                *s += v;
            }
            counts[f] += 1;
        }
    }
    let curves = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &c)| {
            if c == 0 {
                vec![0.0; grid_size]
            } else {
                s.into_iter().map(|v| v / c as f64).collect()
            }
        })
        .collect();
    Ok(FrontProfiles {
        grid,
        curves,
        counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub pairs: usize,
    pub models: usize,
    pub pair_seed: u64,
    #[serde(default)]
    pub model_seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub k_max: usize,
    /// Method name → mean nDCG@k for `k = 1..=k_max`.
    pub ndcg_at_k: BTreeMap<String, Vec<f64>>,
    /// Method names in the order they were requested.
    pub methods: Vec<String>,
    pub front_profiles: Option<FrontProfiles>,
    pub meta: ReportMeta,
}

impl MetricReport {
    pub fn ndcg(&self, method: &str, k: usize) -> f64 {
        self.ndcg_at_k[method][k - 1]
    }

    /// One row per `k` with a column per method.
    pub fn to_csv_wide(&self) -> String {
        let header: Vec<String> = self.methods.iter().map(|m| csv_field(m)).collect();
        let mut out = format!("k,{}\n", header.join(","));
        for k in 1..=self.k_max {
            let row: Vec<String> = self
                .methods
                .iter()
                .map(|m| self.ndcg_at_k[m][k - 1].to_string())
                .collect();
            let _ = writeln!(out, "{k},{}", row.join(","));
        }
        out
    }

    /// One row per `(k, method)`.
    pub fn to_csv_long(&self) -> String {
        let mut out = String::from("k,method,ndcg\n");
        for k in 1..=self.k_max {
            for m in &self.methods {
                let _ = writeln!(out, "{k},{},{}", csv_field(m), self.ndcg_at_k[m][k - 1]);
            }
        }
        out
    }
}

/// Quotes method names such as `scalarized:0.3,0.7`.
fn csv_field(s: &str) -> String {
    if s.contains(',') {
        format!("\"{s}\"")
    } else {
        s.to_owned()
    }
}

/// Optional front-profile collection during an experiment (pfm only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileOptions {
    pub n_fronts: usize,
    pub grid_size: usize,
}

struct PairOutcome {
    ndcg: Vec<Vec<f64>>,
    profile: Option<ProfileInput>,
}

/// Mean nDCG@k (`k = 1..=k_max`) per method, averaged over pairs and then
/// over models. Summation order is fixed, so results do not depend on
/// thread scheduling.
pub fn run_query_pair_experiment(
    ds: &FeatureDataset,
    labels: &LabelMatrix,
    models: &[EmrModel],
    batch: &QueryPairBatch,
    methods: &[Method],
    k_max: usize,
    profile: Option<ProfileOptions>,
) -> Result<MetricReport> {
    if labels.rows() != ds.len() {
        return Err(Error::Dimension {
            expected: ds.len(),
            actual: labels.rows(),
        });
    }
    if models.is_empty() || methods.is_empty() {
        return Err(Error::Config("need at least one model and one method".into()));
    }
    if batch.pairs.is_empty() {
        return Err(Error::Query("empty viable pair set".into()));
    }
    if k_max == 0 {
        return Err(Error::Config("k_max must be at least 1".into()));
    }
    for m in models {
        m.check_dataset(ds)?;
    }

    let mut totals = vec![vec![0.0; k_max]; methods.len()];
    let mut profile_inputs = Vec::new();
    for model in models {
        let outcomes: Vec<PairOutcome> = batch
            .pairs
            .par_iter()
            .map(|&(a, b)| evaluate_pair(model, labels, a, b, methods, k_max, profile))
            .collect::<Result<_>>()?;
        let mut model_sums = vec![vec![0.0; k_max]; methods.len()];
        for o in outcomes {
            for (acc, curve) in model_sums.iter_mut().zip(&o.ndcg) {
                for (x, v) in acc.iter_mut().zip(curve) {
                    *x += v;
                }
            }
            profile_inputs.extend(o.profile);
        }
        let pairs = batch.pairs.len() as f64;
        for (tot, acc) in totals.iter_mut().zip(model_sums) {
            for (t, v) in tot.iter_mut().zip(acc) {
                *t += v / pairs;
            }
        }
    }
    let n_models = models.len() as f64;
    let ndcg_at_k = methods
        .iter()
        .zip(totals)
        .map(|(m, t)| (m.to_string(), t.into_iter().map(|v| v / n_models).collect()))
        .collect();
    let front_profiles = match profile {
        Some(p) => Some(front_relevance_profile(&profile_inputs, p.n_fronts, p.grid_size)?),
        None => None,
    };
    Ok(MetricReport {
        k_max,
        ndcg_at_k,
        methods: methods.iter().map(Method::to_string).collect(),
        front_profiles,
        meta: ReportMeta {
            pairs: batch.pairs.len(),
            models: models.len(),
            pair_seed: batch.rng_seed,
            model_seeds: Vec::new(),
        },
    })
}

fn evaluate_pair(
    model: &EmrModel,
    labels: &LabelMatrix,
    a: usize,
    b: usize,
    methods: &[Method],
    k_max: usize,
    profile: Option<ProfileOptions>,
) -> Result<PairOutcome> {
    let qs = QuerySet::new(vec![a, b]);
    let relevance = pair_relevance(labels, &qs.queries)?;
    let rankings = query_rankings(model, &qs)?;
    let ndcg = methods
        .iter()
        .map(|m| {
            let res = retrieve_from_rankings(&rankings, &qs, m, k_max)?;
            let mut rels: Vec<f64> = res.items.iter().map(|it| relevance[it.item_index]).collect();
            rels.resize(k_max, 0.0);
            (1..=k_max).map(|k| ndcg_at_k(&rels, k)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let profile = match profile {
        Some(p) => {
            let fronts =
                FrontRanking::from_dissimilarity(DissimilarityMatrix::from_rankings(&rankings)?, &qs)?;
            Some(ProfileInput::from_fronts(&fronts, &relevance, p.n_fronts)?)
        }
        None => None,
    };
    Ok(PairOutcome { ndcg, profile })
}
