//! Where along a front the relevant items sit: mean relevance against the
//! normalised first coordinate, for the first three fronts.

use paretoir::data::RetrievalConfig;
use paretoir::emr::build_emr_model;
use paretoir::engine::Method;
use paretoir::eval::{run_query_pair_experiment, BridgeBenchmark, ProfileOptions, QueryPairBatch};

fn main() -> paretoir::Result<()> {
    let (ds, labels) = BridgeBenchmark::default().generate(0)?;
    let cfg = RetrievalConfig::default();
    let models = (0..5)
        .map(|s| build_emr_model(&ds, &cfg, s))
        .collect::<paretoir::Result<Vec<_>>>()?;
    let batch = QueryPairBatch::sample(&labels, 100, 0)?;
    let opts = ProfileOptions {
        n_fronts: 3,
        grid_size: 21,
    };
    let report = run_query_pair_experiment(&ds, &labels, &models, &batch, &[Method::Pfm], 20, Some(opts))?;
    let profiles = report.front_profiles.expect("profile was requested");

    for f in 0..3 {
        println!(
            "front {}: tails {:.3} / {:.3}, middle {:.3}",
            f + 1,
            profiles.band_mean(f, 0.0, 1.0 / 3.0),
            profiles.band_mean(f, 2.0 / 3.0, 1.0),
            profiles.band_mean(f, 1.0 / 3.0, 2.0 / 3.0)
        );
    }
    print!("{}", profiles.to_csv());
    Ok(())
}
