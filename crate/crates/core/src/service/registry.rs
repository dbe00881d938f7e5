use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{fingerprint_file, load_dataset, DatasetFormat};
use crate::data::{FeatureDataset, LabelMatrix, RetrievalConfig};
use crate::emr::{build_emr_model, load_model, save_model, EmrModel};
use crate::error::{Error, Result};

/// Environment variable naming the service data directory.
pub const DATA_DIR_ENV: &str = "PARETOIR_DATA_DIR";
const REGISTRY_FILE: &str = "registry.json";

static REGISTRY_WRITE: Mutex<()> = Mutex::new(());

/// Data directory from [`DATA_DIR_ENV`], else `./paretoir-data`.
pub fn default_data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("paretoir-data"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub dataset_path: PathBuf,
    pub dataset_format: DatasetFormat,
    /// SHA-256 of the dataset file at build time.
    pub dataset_fingerprint: String,
    pub model_path: PathBuf,
    pub config: RetrievalConfig,
    pub seed: u64,
}

/// `model_id → entry`, persisted as `registry.json` in the data directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelRegistry {
    pub models: BTreeMap<String, RegistryEntry>,
}

/// First 16 hex digits of SHA-256 over fingerprint, config JSON and seed.
pub fn model_id(fingerprint: &str, config: &RetrievalConfig, seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(fingerprint.as_bytes());
    h.update(serde_json::to_vec(config).expect("config serializes"));
    h.update(seed.to_le_bytes());
    hex::encode(h.finalize())[..16].to_owned()
}

impl ModelRegistry {
    pub fn open(data_dir: &Path) -> Result<Self> {
        let path = data_dir.join(REGISTRY_FILE);
        match fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| Error::Format(format!("{}: {e}", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(Error::io(&path, e)),
        }
    }

    /// Writes through a temporary file so readers never see a partial file.
    pub fn save(&self, data_dir: &Path) -> Result<()> {
        fs::create_dir_all(data_dir).map_err(|e| Error::io(data_dir, e))?;
        let path = data_dir.join(REGISTRY_FILE);
        let tmp = data_dir.join(format!("{REGISTRY_FILE}.tmp"));
        let json = serde_json::to_vec_pretty(self).expect("registry serializes");
        fs::write(&tmp, json).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }

    pub fn get(&self, id: &str) -> Option<&RegistryEntry> {
        self.models.get(id)
    }
}

/// Builds (or reuses) the model for `(dataset, config, seed)` and records
/// it in the registry under `data_dir`. Returns the model id and entry.
pub fn register_model(
    data_dir: &Path,
    dataset_path: &Path,
    config: &RetrievalConfig,
    seed: u64,
) -> Result<(String, RegistryEntry)> {
    let fingerprint = fingerprint_file(dataset_path)?;
    let id = model_id(&fingerprint, config, seed);
    let mut registry = ModelRegistry::open(data_dir)?;
    if let Some(entry) = registry.get(&id) {
        if entry.model_path.exists() {
            return Ok((id, entry.clone()));
        }
    }
    let format = DatasetFormat::from_path(dataset_path);
    let (ds, _) = load_dataset(dataset_path, format)?;
    let model = build_emr_model(&ds, config, seed)?;
    let models_dir = data_dir.join("models");
    fs::create_dir_all(&models_dir).map_err(|e| Error::io(&models_dir, e))?;
    let model_path = models_dir.join(format!("{id}.emr"));
    save_model(&model_path, &model)?;
    let dataset_path = fs::canonicalize(dataset_path).map_err(|e| Error::io(dataset_path, e))?;
    let entry = RegistryEntry {
        dataset_path,
        dataset_format: format,
        dataset_fingerprint: fingerprint,
        model_path,
        config: config.clone(),
        seed,
    };
    let _guard = REGISTRY_WRITE.lock().unwrap_or_else(|e| e.into_inner());
    registry = ModelRegistry::open(data_dir)?;
    registry.models.insert(id.clone(), entry.clone());
    registry.save(data_dir)?;
    Ok((id, entry))
}

/// A registered model together with its dataset, ready to serve.
#[derive(Debug)]
pub struct LoadedModel {
    pub id: String,
    pub entry: RegistryEntry,
    pub dataset: FeatureDataset,
    pub labels: Option<LabelMatrix>,
    pub model: EmrModel,
}

impl LoadedModel {
    /// Loads dataset and model, refusing if the dataset file changed since
    /// the model was built.
    pub fn load(id: &str, entry: &RegistryEntry) -> Result<Self> {
        let fingerprint = fingerprint_file(&entry.dataset_path)?;
        if fingerprint != entry.dataset_fingerprint {
            return Err(Error::ModelMismatch(format!(
                "dataset {} has fingerprint {fingerprint}, model {id} was built from {}",
                entry.dataset_path.display(),
                entry.dataset_fingerprint
            )));
        }
        let (dataset, labels) = load_dataset(&entry.dataset_path, entry.dataset_format)?;
        let model = load_model(&entry.model_path, Some(&dataset))?;
        Ok(Self {
            id: id.to_owned(),
            entry: entry.clone(),
            dataset,
            labels,
            model,
        })
    }

    /// Resolves item ids to indices. A string that is not an id but parses
    /// as an in-range integer is taken as a 0-based item index.
    pub fn resolve(&self, ids: &[String]) -> Result<Vec<usize>> {
        ids.iter()
            .map(|id| {
                self.dataset
                    .index_of(id)
                    .or_else(|| id.parse::<usize>().ok().filter(|&i| i < self.dataset.len()))
                    .ok_or_else(|| Error::Query(format!("unknown item id {id:?}")))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::save_dataset;
    use crate::emr::tests::blob;

    #[test]
    fn ids_are_deterministic_and_config_sensitive() {
        let cfg = RetrievalConfig::default();
        assert_eq!(model_id("ab", &cfg, 1), model_id("ab", &cfg, 1));
        assert_ne!(model_id("ab", &cfg, 1), model_id("ab", &cfg, 2));
        let other = RetrievalConfig {
            anchor_count: 8,
            ..cfg.clone()
        };
        assert_ne!(model_id("ab", &cfg, 1), model_id("ab", &other, 1));
    }

    #[test]
    fn register_reuse_and_fingerprint_refusal() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("d.bin");
        save_dataset(&data, DatasetFormat::Binary, &blob(60, 3, 1), None).unwrap();
        let cfg = RetrievalConfig {
            anchor_count: 8,
            nearest_anchors: 3,
            ..RetrievalConfig::default()
        };
        let (id, entry) = register_model(dir.path(), &data, &cfg, 4).unwrap();
        let (again, _) = register_model(dir.path(), &data, &cfg, 4).unwrap();
        assert_eq!(id, again);
        assert_eq!(ModelRegistry::open(dir.path()).unwrap().models.len(), 1);
        assert!(LoadedModel::load(&id, &entry).is_ok());
        save_dataset(&data, DatasetFormat::Binary, &blob(60, 3, 2), None).unwrap();
        assert!(matches!(LoadedModel::load(&id, &entry), Err(Error::ModelMismatch(_))));
    }
}
