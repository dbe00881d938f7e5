//! Command-line front end. `main` only forwards to [`run`].

use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use crate::asymptotics::{
    continuum_comparison, evaluation_grid, quasiconcavity_probe, AxisDensity, SeparableDensity,
};
use crate::data::{
    fingerprint_file, load_dataset, save_dataset, DatasetFormat, FeatureDataset, LabelMatrix,
    Normalization, RetrievalConfig,
};
use crate::emr::{build_emr_model, load_model, save_model, EmrModel};
use crate::engine::Method;
use crate::eval::{run_query_pair_experiment, BridgeBenchmark, ProfileOptions, QueryPairBatch};
use crate::service::{
    default_data_dir, fronts_response, query_response, register_model, LoadedModel, ModelRegistry,
    RegistryEntry,
};

#[derive(Debug, Parser)]
#[command(name = "paretoir", version, about = "Multiple-query retrieval by Pareto front depth")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a dataset between CSV and binary, optionally normalising features.
    Ingest(IngestArgs),
    /// Build an EMR model from a dataset.
    BuildModel(BuildArgs),
    /// Retrieve items for a set of queries (JSON on stdout).
    Retrieve(RetrieveArgs),
    /// Print the first Pareto fronts for a set of queries (JSON on stdout).
    Fronts(FrontsArgs),
    /// Run the query-pair nDCG experiment (CSV on stdout).
    Evaluate(EvaluateArgs),
    /// Monte Carlo checks of the large-sample depth limit.
    #[command(subcommand)]
    Asymptotics(AsymptoticsCommand),
    /// Serve the HTTP API.
    Serve(ServeArgs),
    /// Write the synthetic bridge benchmark as a labelled dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Binary,
}

impl From<FormatArg> for DatasetFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => DatasetFormat::Csv,
            FormatArg::Binary => DatasetFormat::Binary,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormalizeArg {
    Minmax,
    Zscore,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OutputArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Defaults to the input file extension.
    #[arg(long, value_enum)]
    pub input_format: Option<FormatArg>,
    /// Defaults to the output file extension.
    #[arg(long, value_enum)]
    pub output_format: Option<FormatArg>,
    #[arg(long, value_enum)]
    pub normalize: Option<NormalizeArg>,
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 64)]
    pub anchors: usize,
    /// Nearest anchors per item.
    #[arg(long, default_value_t = 5)]
    pub nearest: usize,
    #[arg(long, default_value_t = 0.99)]
    pub alpha: f64,
    #[arg(long, default_value_t = 50)]
    pub kmeans_iterations: usize,
}

impl ModelArgs {
    fn config(&self) -> RetrievalConfig {
        RetrievalConfig {
            alpha: self.alpha,
            anchor_count: self.anchors,
            nearest_anchors: self.nearest,
            kmeans_iterations: self.kmeans_iterations,
            ..RetrievalConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Write the model here instead of registering it in the data directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, env = "PARETOIR_DATA_DIR")]
    pub data_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelRef {
    /// Registered model id, or a model file path (then `--dataset` is required).
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, env = "PARETOIR_DATA_DIR")]
    pub data_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RetrieveArgs {
    #[command(flatten)]
    pub target: ModelRef,
    /// Comma-separated item ids.
    #[arg(long, value_delimiter = ',', required = true)]
    pub queries: Vec<String>,
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    /// `pfm`, `mq_avg`, `mq_max` or `scalarized:w1,w2,...`.
    #[arg(long, default_value = "pfm")]
    pub method: String,
}

#[derive(Debug, Args)]
pub struct FrontsArgs {
    #[command(flatten)]
    pub target: ModelRef,
    #[arg(long, value_delimiter = ',', required = true)]
    pub queries: Vec<String>,
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Labelled dataset; the synthetic bridge benchmark when omitted.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    /// Number of independently seeded models (seeds `seed..seed+models`).
    #[arg(long, default_value_t = 5)]
    pub models: usize,
    /// Comma-separated; numbers after `scalarized:` are its weights.
    #[arg(long, default_value = "pfm,mq_avg,mq_max")]
    pub methods: String,
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Also write the full report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Also write the front relevance profile CSV (requires pfm).
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub profile_fronts: usize,
    #[arg(long, default_value_t = 21)]
    pub profile_grid: usize,
}

#[derive(Debug, Subcommand)]
pub enum AsymptoticsCommand {
    /// Error table of scaled depth against `ĉ F^{1/d}`.
    Continuum(ContinuumArgs),
    /// Convexity defect of planar super-level sets.
    Probe(ProbeArgs),
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Per-axis density: `uniform`, `exp:RATE` or `bump[:W,M1,M2,S1,S2]`.
    #[arg(long, default_value = "uniform")]
    pub density: String,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputArg,
}

#[derive(Debug, Args)]
pub struct ContinuumArgs {
    #[command(flatten)]
    pub density: DensityArgs,
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub density: DensityArgs,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    /// Levels as fractions of the largest scaled depth.
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75")]
    pub levels: Vec<f64>,
    /// Write level curves as gnuplot data.
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    #[arg(long, env = "PARETOIR_DATA_DIR")]
    pub data_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Parses `argv`, runs the command and maps failures to exit codes:
/// 2 for usage errors (from clap), 1 for everything else.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::BuildModel(a) => build(a),
        Command::Retrieve(a) => {
            let loaded = resolve_model(&a.target)?;
            let method: Method = a.method.parse()?;
            print_json(&query_response(&loaded, &a.queries, &method, a.k)?)
        }
        Command::Fronts(a) => {
            let loaded = resolve_model(&a.target)?;
            print_json(&fronts_response(&loaded, &a.queries, a.depth)?)
        }
        Command::Evaluate(a) => evaluate(a),
        Command::Asymptotics(AsymptoticsCommand::Continuum(a)) => continuum(a),
        Command::Asymptotics(AsymptoticsCommand::Probe(a)) => probe(a),
        Command::Serve(a) => {
            let data_dir = a.data_dir.unwrap_or_else(default_data_dir);
            tokio::runtime::Runtime::new()?
                .block_on(crate::service::serve(a.addr, data_dir))
                .context("server failed")
        }
        Command::Synth(a) => {
            let (ds, labels) = BridgeBenchmark::default().generate(a.seed)?;
            save_dataset(&a.out, DatasetFormat::from_path(&a.out), &ds, Some(&labels))?;
            print_json(&json!({"path": a.out, "items": ds.len(), "dim": ds.dim(), "seed": a.seed}))
        }
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    emit(&format!("{}\n", serde_json::to_string_pretty(value)?))
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn ingest(a: IngestArgs) -> anyhow::Result<()> {
    let in_fmt = a.input_format.map_or_else(|| DatasetFormat::from_path(&a.input), Into::into);
    let out_fmt = a.output_format.map_or_else(|| DatasetFormat::from_path(&a.output), Into::into);
    let (mut ds, labels) = load_dataset(&a.input, in_fmt)?;
    if let Some(mode) = a.normalize {
        ds = ds.normalized(match mode {
            NormalizeArg::Minmax => Normalization::MinMax,
            NormalizeArg::Zscore => Normalization::ZScore,
        });
    }
    save_dataset(&a.output, out_fmt, &ds, labels.as_ref())?;
    print_json(&json!({
        "output": a.output,
        "format": out_fmt,
        "items": ds.len(),
        "dim": ds.dim(),
        "labels": labels.as_ref().map(LabelMatrix::classes),
        "fingerprint": fingerprint_file(&a.output)?,
    }))
}

fn build(a: BuildArgs) -> anyhow::Result<()> {
    let cfg = a.model.config();
    match a.out {
        Some(out) => {
            let (ds, _) = load_dataset(&a.dataset, DatasetFormat::from_path(&a.dataset))?;
            let model = build_emr_model(&ds, &cfg, a.seed)?;
            save_model(&out, &model)?;
            print_json(&json!({
                "model_path": out,
                "dataset_fingerprint": fingerprint_file(&a.dataset)?,
                "seed": a.seed,
                "config": cfg,
            }))
        }
        None => {
            let data_dir = a.data_dir.unwrap_or_else(default_data_dir);
            let (id, entry) = register_model(&data_dir, &a.dataset, &cfg, a.seed)?;
            print_json(&json!({
                "model_id": id,
                "model_path": entry.model_path,
                "dataset_fingerprint": entry.dataset_fingerprint,
                "seed": a.seed,
                "config": cfg,
            }))
        }
    }
}

/// A model file plus `--dataset`, or a registry id.
fn resolve_model(r: &ModelRef) -> anyhow::Result<LoadedModel> {
    let path = Path::new(&r.model);
    if path.is_file() {
        let Some(dataset_path) = &r.dataset else {
            bail!("--dataset is required when --model is a file");
        };
        let format = DatasetFormat::from_path(dataset_path);
        let (dataset, labels) = load_dataset(dataset_path, format)?;
        let model = load_model(path, Some(&dataset))?;
        let entry = RegistryEntry {
            dataset_path: dataset_path.clone(),
            dataset_format: format,
            dataset_fingerprint: fingerprint_file(dataset_path)?,
            model_path: path.to_path_buf(),
            config: RetrievalConfig {
                alpha: model.alpha(),
                anchor_count: model.anchor_count(),
                ..RetrievalConfig::default()
            },
            seed: 0,
        };
        return Ok(LoadedModel {
            id: r.model.clone(),
            entry,
            dataset,
            labels,
            model,
        });
    }
    let data_dir = r.data_dir.clone().unwrap_or_else(default_data_dir);
    let registry = ModelRegistry::open(&data_dir)?;
    let Some(entry) = registry.get(&r.model) else {
        bail!("{} is neither a model file nor a model id in {}", r.model, data_dir.display());
    };
    Ok(LoadedModel::load(&r.model, entry)?)
}

fn evaluate(a: EvaluateArgs) -> anyhow::Result<()> {
    let (ds, labels): (FeatureDataset, LabelMatrix) = match &a.dataset {
        Some(p) => {
            let (ds, labels) = load_dataset(p, DatasetFormat::from_path(p))?;
            let labels = labels.context("evaluation needs a dataset with label columns")?;
            (ds, labels)
        }
        None => BridgeBenchmark::default().generate(a.seed)?,
    };
    let methods = parse_methods(&a.methods)?;
    if a.models == 0 {
        bail!("--models must be at least 1");
    }
    let cfg = a.model.config();
    let seeds: Vec<u64> = (0..a.models as u64).map(|i| a.seed.wrapping_add(i)).collect();
    let models: Vec<EmrModel> = seeds
        .par_iter()
        .map(|&s| build_emr_model(&ds, &cfg, s))
        .collect::<crate::Result<_>>()?;
    let batch = QueryPairBatch::sample(&labels, a.pairs, a.seed)?;
    let profile = a.profile.as_ref().map(|_| ProfileOptions {
        n_fronts: a.profile_fronts,
        grid_size: a.profile_grid,
    });
    let mut report = run_query_pair_experiment(&ds, &labels, &models, &batch, &methods, a.k, profile)?;
    report.meta.model_seeds = seeds;
    if let Some(p) = &a.json {
        write_file(p, &serde_json::to_string_pretty(&report)?)?;
    }
    if let (Some(p), Some(profiles)) = (&a.profile, &report.front_profiles) {
        write_file(p, &profiles.to_csv())?;
    }
    emit(&report.to_csv_wide())
}

/// Splits `pfm,scalarized:0.3,0.7,mq_avg` into three methods.
pub fn parse_methods(list: &str) -> anyhow::Result<Vec<Method>> {
    let mut names: Vec<String> = Vec::new();
    for tok in list.split(',').map(str::trim) {
        match names.last_mut() {
            Some(last) if last.starts_with("scalarized:") && tok.parse::<f64>().is_ok() => {
                last.push(',');
                last.push_str(tok);
            }
            _ => names.push(tok.to_owned()),
        }
    }
    Ok(names.iter().map(|n| n.parse()).collect::<crate::Result<_>>()?)
}

/// Parses `uniform`, `exp:RATE` or `bump[:W,M1,M2,S1,S2]`.
pub fn parse_density(spec: &str, dim: usize) -> anyhow::Result<SeparableDensity> {
    let (kind, params) = spec.split_once(':').unwrap_or((spec, ""));
    let nums = || -> anyhow::Result<Vec<f64>> {
        params
            .split(',')
            .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number {p:?}")))
            .collect()
    };
    let axis = match kind {
        "uniform" => AxisDensity::Uniform,
        "exp" => match nums()?.as_slice() {
            [rate] => AxisDensity::TruncatedExponential { rate: *rate },
            _ => bail!("exp takes one rate, e.g. exp:2.0"),
        },
        "bump" if params.is_empty() => AxisDensity::TwoBump {
            weight: 0.5,
            means: [0.2, 0.8],
            sds: [0.08, 0.08],
        },
        "bump" => match nums()?.as_slice() {
            [w, m1, m2, s1, s2] => AxisDensity::TwoBump {
                weight: *w,
                means: [*m1, *m2],
                sds: [*s1, *s2],
            },
            _ => bail!("bump takes W,M1,M2,S1,S2"),
        },
        other => bail!("unknown density {other:?}"),
    };
    Ok(SeparableDensity::iid(axis, dim)?)
}

fn continuum(a: ContinuumArgs) -> anyhow::Result<()> {
    let d = &a.density;
    let f = parse_density(&d.density, d.dim)?;
    let table = continuum_comparison(&f, &a.n, &evaluation_grid(d.dim), a.runs, d.seed)?;
    match d.format {
        OutputArg::Csv => emit(&table.to_csv())?,
        OutputArg::Json => print_json(&json!({
            "density": f,
            "table": table,
            "non_increasing": table.is_non_increasing(),
        }))?,
    }
    Ok(())
}

fn probe(a: ProbeArgs) -> anyhow::Result<()> {
    let d = &a.density;
    let f = parse_density(&d.density, d.dim)?;
    let report = quasiconcavity_probe(&f, a.n, &a.levels, d.seed)?;
    if let Some(p) = &a.gnuplot {
        write_file(p, &report.to_gnuplot())?;
    }
    match d.format {
        OutputArg::Csv => emit(&report.to_csv())?,
        OutputArg::Json => print_json(&json!({"density": f, "seed": d.seed, "report": report}))?,
    }
    Ok(())
}
