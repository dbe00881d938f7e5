//! Anchor-graph (efficient) manifold ranking next to the dense classic
//! ranker on the same data.

use paretoir::data::RetrievalConfig;
use paretoir::emr::{build_emr_model, classic_mr_iterate, classic_mr_rank};
use paretoir::eval::BridgeBenchmark;

fn top(scores: &[f64], skip: usize, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).filter(|&i| i != skip).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

fn main() -> paretoir::Result<()> {
    let bench = BridgeBenchmark {
        cluster_size: 60,
        bridge_size: 20,
        distractor_size: 60,
        ..BridgeBenchmark::default()
    };
    let (ds, _) = bench.generate(2)?;
    let q = ds.index_of("a0").expect("benchmark has a0");

    let model = build_emr_model(&ds, &RetrievalConfig::default(), 11)?;
    let emr = model.rank_query(q)?;
    let closed = classic_mr_rank(&ds, q, 4.0, 0.99)?;
    let iterated = classic_mr_iterate(&ds, q, 4.0, 0.9, 1e-12, 10_000)?;

    let ids = |v: Vec<usize>| v.into_iter().map(|i| ds.id(i).to_owned()).collect::<Vec<_>>().join(" ");
    println!("emr     {}", ids(top(&emr.scores, q, 10)));
    println!("classic {}", ids(top(&closed.scores, q, 10)));
    let exact = classic_mr_rank(&ds, q, 4.0, 0.9)?;
    let gap = exact
        .scores
        .iter()
        .zip(&iterated.scores)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("iteration vs closed form at alpha 0.9: max |diff| = {gap:.2e}");
    Ok(())
}
