//! Model registry, wire types and the HTTP front end.

pub mod http;
pub mod registry;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::QuerySet;
use crate::engine::{pareto_fronts, retrieve, Method, RankedItem};
use crate::error::{Error, Result};

pub use http::{router, serve, AppState};
pub use registry::{
    default_data_dir, model_id, register_model, LoadedModel, ModelRegistry, RegistryEntry,
    DATA_DIR_ENV,
};

/// One item inside a front (or inside the single list of a scalar method).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontItem {
    pub item_id: String,
    /// Dissimilarity to each query, in query order.
    pub coords: Vec<f64>,
    /// 0-based position: middle-out order for fronts, rank for scalar lists.
    pub position: usize,
    /// 1-based front, absent for scalar methods.
    pub front: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

/// Retrieval output grouped by front. Scalar methods yield one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub model_id: String,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub query_ids: Vec<String>,
    pub k: usize,
    pub fronts: Vec<Vec<FrontItem>>,
    /// The only field that differs between replays of a request.
    pub timing: Timing,
}

impl QueryResponse {
    pub fn item_count(&self) -> usize {
        self.fronts.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontsResponse {
    pub model_id: String,
    pub query_ids: Vec<String>,
    pub depth: usize,
    /// Number of fronts in the full layering.
    pub available_depth: usize,
    pub fronts: Vec<Vec<FrontItem>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemResponse {
    pub item_id: String,
    pub model_id: String,
    /// Names of the labels set on the item, when the dataset has labels.
    pub labels: Option<Vec<String>>,
    /// Opaque string from the dataset's thumbnail sidecar.
    pub thumbnail: Option<String>,
}

fn front_item(loaded: &LoadedModel, it: &RankedItem, rank: usize) -> FrontItem {
    FrontItem {
        item_id: loaded.dataset.id(it.item_index).to_owned(),
        coords: it.coords.clone(),
        position: it.position.unwrap_or(rank),
        front: it.front,
        score: it.score,
    }
}

fn query_set(loaded: &LoadedModel, query_ids: &[String]) -> Result<QuerySet> {
    if query_ids.is_empty() {
        return Err(Error::Query("at least one query id is required".into()));
    }
    Ok(QuerySet::new(loaded.resolve(query_ids)?))
}

/// Runs one retrieval request against a loaded model.
pub fn query_response(
    loaded: &LoadedModel,
    query_ids: &[String],
    method: &Method,
    k: usize,
) -> Result<QueryResponse> {
    let start = Instant::now();
    let qs = query_set(loaded, query_ids)?;
    let result = retrieve(&loaded.dataset, &loaded.model, &qs, method, k)?;
    let mut fronts: Vec<Vec<FrontItem>> = Vec::new();
    for (rank, it) in result.items.iter().enumerate() {
        let item = front_item(loaded, it, rank);
        match fronts.last_mut() {
            Some(last) if last.last().map(|l| l.front) == Some(item.front) => last.push(item),
            _ => fronts.push(vec![item]),
        }
    }
    Ok(QueryResponse {
        model_id: loaded.id.clone(),
        method: method.name().to_owned(),
        weights: method.weights().map(<[f64]>::to_vec),
        query_ids: query_ids.to_vec(),
        k,
        fronts,
        timing: Timing {
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    })
}

/// The first `depth` Pareto fronts for a query set.
pub fn fronts_response(loaded: &LoadedModel, query_ids: &[String], depth: usize) -> Result<FrontsResponse> {
    if depth == 0 {
        return Err(Error::Query("depth must be at least 1".into()));
    }
    let qs = query_set(loaded, query_ids)?;
    let ranking = pareto_fronts(&loaded.model, &qs)?;
    let fronts = ranking
        .fronts(depth)
        .iter()
        .map(|f| f.iter().enumerate().map(|(r, it)| front_item(loaded, it, r)).collect())
        .collect();
    Ok(FrontsResponse {
        model_id: loaded.id.clone(),
        query_ids: query_ids.to_vec(),
        depth,
        available_depth: ranking.depth(),
        fronts,
    })
}

/// Sidecar holding `item_id,thumbnail` rows next to a dataset file.
pub fn thumbnail_sidecar(dataset_path: &Path) -> PathBuf {
    let mut name = dataset_path.as_os_str().to_owned();
    name.push(".thumbnails.csv");
    PathBuf::from(name)
}

/// Reads the thumbnail sidecar; a missing file means no thumbnails.
pub fn load_thumbnails(dataset_path: &Path) -> Result<HashMap<String, String>> {
    let path = thumbnail_sidecar(dataset_path);
    if !path.exists() {
        return Ok(HashMap::new());
    }
    let mut reader = csv::Reader::from_path(&path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| Error::Parse {
                row: i + 2,
                message: e.to_string(),
            })?;
            match (rec.get(0), rec.get(1)) {
                (Some(id), Some(t)) => Ok((id.to_owned(), t.to_owned())),
                _ => Err(Error::Parse {
                    row: i + 2,
                    message: "expected item_id,thumbnail".into(),
                }),
            }
        })
        .collect()
}

/// Stored metadata for an item, or `None` if the dataset lacks it.
pub fn item_response(loaded: &LoadedModel, item_id: &str) -> Result<Option<ItemResponse>> {
    let Some(i) = loaded.dataset.index_of(item_id) else {
        return Ok(None);
    };
    let labels = loaded.labels.as_ref().map(|l| {
        l.names()
            .iter()
            .zip(l.row(i))
            .filter(|(_, &on)| on)
            .map(|(name, _)| name.clone())
            .collect()
    });
    let thumbnail = load_thumbnails(&loaded.entry.dataset_path)?.remove(item_id);
    Ok(Some(ItemResponse {
        item_id: item_id.to_owned(),
        model_id: loaded.id.clone(),
        labels,
        thumbnail,
    }))
}
