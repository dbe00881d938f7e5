//! Multiple-query retrieval: per-query ranking, Pareto layering of the
//! resulting dissimilarities, and the scalar fusion baselines.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{validate_query_set, FeatureDataset, QuerySet};
use crate::emr::{EmrModel, RankingVector};
use crate::error::{Error, Result};
use crate::pareto::{middle_out_order, non_dominated_sort, ParetoLayering, ParetoPoint};

/// How per-query scores are combined into one list.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Front by front, middle-out within each front.
    Pfm,
    /// Mean of per-query scores.
    MqAvg,
    /// Max of per-query scores.
    MqMax,
    /// Nonnegative weighted sum of per-query scores.
    Scalarized(Vec<f64>),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Pfm => "pfm",
            Method::MqAvg => "mq_avg",
            Method::MqMax => "mq_max",
            Method::Scalarized(_) => "scalarized",
        }
    }

    pub fn weights(&self) -> Option<&[f64]> {
        match self {
            Method::Scalarized(w) => Some(w),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Scalarized(w) => {
                let parts: Vec<String> = w.iter().map(|v| v.to_string()).collect();
                write!(f, "scalarized:{}", parts.join(","))
            }
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    /// Accepts `pfm`, `mq_avg`, `mq_max` and `scalarized:w1,w2,...`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "pfm" => Ok(Method::Pfm),
            "mq_avg" => Ok(Method::MqAvg),
            "mq_max" => Ok(Method::MqMax),
            other => {
                let weights = other
                    .strip_prefix("scalarized:")
                    .ok_or_else(|| Error::Config(format!("unknown method {other:?}")))?;
                let w = weights
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::Config(format!("bad weight list {weights:?}: {e}")))?;
                Ok(Method::Scalarized(w))
            }
        }
    }
}

/// Row `i` holds `1 − r*_i` for query `i` over all `n` items.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    rows: Vec<Vec<f64>>,
}

impl DissimilarityMatrix {
    pub fn from_rankings(rankings: &[RankingVector]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = rankings
            .iter()
            .map(|r| r.scores.iter().map(|s| 1.0 - s).collect())
            .collect();
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite ranking score".into()));
        }
        Ok(Self { rows })
    }

    pub fn queries(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, q: usize) -> &[f64] {
        &self.rows[q]
    }

    /// The Pareto point of item `j`.
    pub fn coords(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

/// One retrieved item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedItem {
    pub item_index: usize,
    /// 1-based Pareto front (front retrieval only).
    pub front: Option<usize>,
    /// 0-based position within the front's middle-out order.
    pub position: Option<usize>,
    /// Dissimilarity to each query.
    pub coords: Vec<f64>,
    /// Fused score (scalar baselines only).
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalResult {
    pub items: Vec<RankedItem>,
    pub method: Method,
}

impl RetrievalResult {
    pub fn item_indices(&self) -> Vec<usize> {
        self.items.iter().map(|i| i.item_index).collect()
    }

    pub fn to_json(&self, ds: &FeatureDataset) -> RetrievalJson {
        RetrievalJson {
            method: self.method.name().to_owned(),
            weights: self.method.weights().map(<[f64]>::to_vec),
            items: self
                .items
                .iter()
                .map(|it| ItemJson {
                    item_id: ds.id(it.item_index).to_owned(),
                    front: it.front,
                    position: it.position,
                    coords: it.coords.clone(),
                    score: it.score,
                })
                .collect(),
        }
    }
}

/// Wire form of a [`RetrievalResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalJson {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub items: Vec<ItemJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemJson {
    pub item_id: String,
    pub front: Option<usize>,
    pub position: Option<usize>,
    pub coords: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

/// Ranks every item against each query separately (in parallel).
pub fn query_rankings(model: &EmrModel, qs: &QuerySet) -> Result<Vec<RankingVector>> {
    validate_query_set(qs, model.len())?;
    qs.queries.par_iter().map(|&q| model.rank_query(q)).collect()
}

/// Non-query items layered into Pareto fronts, each front in visiting order.
#[derive(Debug, Clone)]
pub struct FrontRanking {
    pub dissimilarity: DissimilarityMatrix,
    /// Candidate points; `item_index` refers to the dataset.
    pub points: Vec<ParetoPoint>,
    pub layering: ParetoLayering,
    /// Positions into `points`, per front, in middle-out order.
    pub ordered_fronts: Vec<Vec<usize>>,
}

impl FrontRanking {
    pub fn from_dissimilarity(dissimilarity: DissimilarityMatrix, qs: &QuerySet) -> Result<Self> {
        let n = dissimilarity.row(0).len();
        let points = (0..n)
            .filter(|j| !qs.contains(*j))
            .map(|j| ParetoPoint::new(dissimilarity.coords(j), j))
            .collect::<Result<Vec<_>>>()?;
        if points.is_empty() {
            return Err(Error::Query("no candidate items remain after excluding queries".into()));
        }
        let layering = non_dominated_sort(&points)?;
        let ordered_fronts = layering
            .fronts
            .iter()
            .map(|f| middle_out_order(f, &points))
            .collect();
        Ok(Self {
            dissimilarity,
            points,
            layering,
            ordered_fronts,
        })
    }

    pub fn depth(&self) -> usize {
        self.ordered_fronts.len()
    }

    /// Items of the first `depth` fronts, in retrieval order.
    pub fn fronts(&self, depth: usize) -> Vec<Vec<RankedItem>> {
        self.ordered_fronts
            .iter()
            .take(depth)
            .enumerate()
            .map(|(f, front)| {
                front
                    .iter()
                    .enumerate()
                    .map(|(pos, &p)| RankedItem {
                        item_index: self.points[p].item_index,
                        front: Some(f + 1),
                        position: Some(pos),
                        coords: self.points[p].coords.clone(),
                        score: None,
                    })
                    .collect()
            })
            .collect()
    }

    /// The first `k` items, front by front.
    pub fn take(&self, k: usize) -> Vec<RankedItem> {
        self.fronts(self.depth()).into_iter().flatten().take(k).collect()
    }
}

/// Builds the Pareto layering for `qs` over the model's items.
pub fn pareto_fronts(model: &EmrModel, qs: &QuerySet) -> Result<FrontRanking> {
    let rankings = query_rankings(model, qs)?;
    FrontRanking::from_dissimilarity(DissimilarityMatrix::from_rankings(&rankings)?, qs)
}

fn check_request(ds: &FeatureDataset, model: &EmrModel, qs: &QuerySet, k: usize) -> Result<()> {
    model.check_dataset(ds)?;
    validate_query_set(qs, ds.len())?;
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    Ok(())
}

/// Pareto-front retrieval.
pub fn pfm_retrieve(
    ds: &FeatureDataset,
    model: &EmrModel,
    qs: &QuerySet,
    k: usize,
) -> Result<RetrievalResult> {
    check_request(ds, model, qs, k)?;
    let fronts = pareto_fronts(model, qs)?;
    Ok(RetrievalResult {
        items: fronts.take(k),
        method: Method::Pfm,
    })
}

/// Sorts non-query items by a fused score, descending, ties by item index.
fn fused_retrieve(
    rankings: &[RankingVector],
    qs: &QuerySet,
    k: usize,
    method: Method,
    fuse: impl Fn(&[f64]) -> f64,
) -> Result<RetrievalResult> {
    let d = DissimilarityMatrix::from_rankings(rankings)?;
    let n = rankings[0].scores.len();
    let mut scored: Vec<(f64, usize)> = (0..n)
        .filter(|j| !qs.contains(*j))
        .map(|j| {
            let s: Vec<f64> = rankings.iter().map(|r| r.scores[j]).collect();
            (fuse(&s), j)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let items = scored
        .into_iter()
        .take(k)
        .map(|(score, j)| RankedItem {
            item_index: j,
            front: None,
            position: None,
            coords: d.coords(j),
            score: Some(score),
        })
        .collect();
    Ok(RetrievalResult { items, method })
}

pub fn mq_avg_retrieve(
    ds: &FeatureDataset,
    model: &EmrModel,
    qs: &QuerySet,
    k: usize,
) -> Result<RetrievalResult> {
    check_request(ds, model, qs, k)?;
    let r = query_rankings(model, qs)?;
    fused_retrieve(&r, qs, k, Method::MqAvg, |s| s.iter().sum::<f64>() / s.len() as f64)
}

pub fn mq_max_retrieve(
    ds: &FeatureDataset,
    model: &EmrModel,
    qs: &QuerySet,
    k: usize,
) -> Result<RetrievalResult> {
    check_request(ds, model, qs, k)?;
    let r = query_rankings(model, qs)?;
    fused_retrieve(&r, qs, k, Method::MqMax, |s| {
        s.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    })
}

pub fn scalarized_retrieve(
    ds: &FeatureDataset,
    model: &EmrModel,
    qs: &QuerySet,
    weights: &[f64],
    k: usize,
) -> Result<RetrievalResult> {
    check_request(ds, model, qs, k)?;
    check_weights(weights, qs.len())?;
    let r = query_rankings(model, qs)?;
    let w = weights.to_vec();
    fused_retrieve(&r, qs, k, Method::Scalarized(w.clone()), move |s| {
        s.iter().zip(&w).map(|(a, b)| a * b).sum()
    })
}

fn check_weights(weights: &[f64], t: usize) -> Result<()> {
    if weights.len() != t {
        return Err(Error::Dimension {
            expected: t,
            actual: weights.len(),
        });
    }
    if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::Config("weights must be finite and nonnegative".into()));
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Config("weights must not all be zero".into()));
    }
    Ok(())
}

/// Dispatches on `method`.
pub fn retrieve(
    ds: &FeatureDataset,
    model: &EmrModel,
    qs: &QuerySet,
    method: &Method,
    k: usize,
) -> Result<RetrievalResult> {
    match method {
        Method::Pfm => pfm_retrieve(ds, model, qs, k),
        Method::MqAvg => mq_avg_retrieve(ds, model, qs, k),
        Method::MqMax => mq_max_retrieve(ds, model, qs, k),
        Method::Scalarized(w) => scalarized_retrieve(ds, model, qs, w, k),
    }
}

/// Same as [`retrieve`] but from precomputed per-query rankings, so several
/// methods can share one set of ranking solves.
pub fn retrieve_from_rankings(
    rankings: &[RankingVector],
    qs: &QuerySet,
    method: &Method,
    k: usize,
) -> Result<RetrievalResult> {
    if rankings.len() != qs.len() {
        return Err(Error::Dimension {
            expected: qs.len(),
            actual: rankings.len(),
        });
    }
    match method {
        Method::Pfm => {
            let fronts =
                FrontRanking::from_dissimilarity(DissimilarityMatrix::from_rankings(rankings)?, qs)?;
            Ok(RetrievalResult {
                items: fronts.take(k),
                method: Method::Pfm,
            })
        }
        Method::MqAvg => fused_retrieve(rankings, qs, k, Method::MqAvg, |s| {
            s.iter().sum::<f64>() / s.len() as f64
        }),
        Method::MqMax => fused_retrieve(rankings, qs, k, Method::MqMax, |s| {
            s.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        }),
        Method::Scalarized(w) => {
            check_weights(w, qs.len())?;
            let w2 = w.clone();
            fused_retrieve(rankings, qs, k, method.clone(), move |s| {
                s.iter().zip(&w2).map(|(a, b)| a * b).sum()
            })
        }
    }
}

/// Items ranked first by `scalarized:w,1−w` for some `w` in
/// `{0, 1/steps, …, 1}` (two queries only).
pub fn scalarization_top1(
    rankings: &[RankingVector],
    qs: &QuerySet,
    steps: usize,
) -> Result<BTreeSet<usize>> {
    if qs.len() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            actual: qs.len(),
        });
    }
    if steps == 0 {
        return Err(Error::Config("weight grid needs at least one step".into()));
    }
    (0..=steps)
        .map(|i| {
            let w = i as f64 / steps as f64;
            let res = retrieve_from_rankings(rankings, qs, &Method::Scalarized(vec![w, 1.0 - w]), 1)?;
            Ok(res.items[0].item_index)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(scores: &[f64]) -> RankingVector {
        RankingVector {
            scores: scores.to_vec(),
            query_index: None,
        }
    }

    #[test]
    fn method_parsing() {
        assert_eq!("pfm".parse::<Method>().unwrap(), Method::Pfm);
        assert_eq!(
            "scalarized:0.25,0.75".parse::<Method>().unwrap(),
            Method::Scalarized(vec![0.25, 0.75])
        );
        assert!("borda".parse::<Method>().is_err());
        assert_eq!(Method::Scalarized(vec![1.0, 0.5]).to_string(), "scalarized:1,0.5");
    }

    #[test]
    fn avg_and_max_preferences() {
        // Items 0 and 1 are queries; candidates are 2 and 3.
        let qs = QuerySet::new(vec![0, 1]);
        let a = rv(&[1.0, 0.0, 1.0, 0.4]);
        let b = rv(&[0.0, 1.0, 0.0, 0.4]);
        let avg = retrieve_from_rankings(&[a.clone(), b.clone()], &qs, &Method::MqAvg, 2).unwrap();
        assert_eq!(avg.item_indices(), vec![2, 3]);

        let a = rv(&[1.0, 0.0, 1.0, 0.6]);
        let b = rv(&[0.0, 1.0, 0.0, 0.6]);
        let max = retrieve_from_rankings(&[a.clone(), b.clone()], &qs, &Method::MqMax, 2).unwrap();
        assert_eq!(max.item_indices(), vec![2, 3]);
        // Swapping which query produced the max does not change the order.
        let b2 = rv(&[0.0, 1.0, 1.0, 0.6]);
        let a2 = rv(&[1.0, 0.0, 0.0, 0.6]);
        let swapped = retrieve_from_rankings(&[a2, b2], &qs, &Method::MqMax, 2).unwrap();
        assert_eq!(swapped.item_indices(), max.item_indices());
    }

    #[test]
    fn pfm_on_handmade_scores() {
        let qs = QuerySet::new(vec![0, 1]);
        let a = rv(&[1.0, 0.0, 0.9, 0.5, 0.1, 0.4]);
        let b = rv(&[0.0, 1.0, 0.1, 0.5, 0.9, 0.4]);
        let res = retrieve_from_rankings(&[a, b], &qs, &Method::Pfm, 10).unwrap();
        // Front 1 = {2, 3, 4} middle-out: 3, 4, 2; item 5 is dominated by 3.
        assert_eq!(res.item_indices(), vec![3, 4, 2, 5]);
        assert_eq!(res.items[3].front, Some(2));
        assert_eq!(res.items[1].position, Some(1));
        assert!((res.items[0].coords[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn weights_are_validated() {
        let qs = QuerySet::new(vec![0, 1]);
        let r = [rv(&[1.0, 0.0, 0.5]), rv(&[0.0, 1.0, 0.5])];
        for w in [vec![0.0, 0.0], vec![-1.0, 2.0], vec![1.0]] {
            assert!(retrieve_from_rankings(&r, &qs, &Method::Scalarized(w), 1).is_err());
        }
    }

    #[test]
    fn all_items_are_queries() {
        let qs = QuerySet::new(vec![0, 1]);
        let r = [rv(&[1.0, 0.0]), rv(&[0.0, 1.0])];
        assert!(retrieve_from_rankings(&r, &qs, &Method::Pfm, 1).is_err());
    }
}
