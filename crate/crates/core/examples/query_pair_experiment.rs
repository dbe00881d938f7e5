//! Mean nDCG@k of Pareto-front retrieval and the fused baselines over
//! random viable query pairs and several anchor seeds.

use paretoir::data::RetrievalConfig;
use paretoir::emr::build_emr_model;
use paretoir::engine::Method;
use paretoir::eval::{run_query_pair_experiment, BridgeBenchmark, QueryPairBatch};

fn main() -> paretoir::Result<()> {
    let (ds, labels) = BridgeBenchmark::default().generate(0)?;
    let cfg = RetrievalConfig::default();
    let models = (0..5)
        .map(|s| build_emr_model(&ds, &cfg, s))
        .collect::<paretoir::Result<Vec<_>>>()?;
    let batch = QueryPairBatch::sample(&labels, 100, 0)?;
    let methods = [Method::Pfm, Method::MqAvg, Method::MqMax];
    let report = run_query_pair_experiment(&ds, &labels, &models, &batch, &methods, 20, None)?;

    for k in [1, 5, 10, 20] {
        let row: Vec<String> = report
            .methods
            .iter()
            .map(|m| format!("{m}={:.3}", report.ndcg(m, k)))
            .collect();
        println!("nDCG@{k:<2} {}", row.join("  "));
    }
    Ok(())
}
