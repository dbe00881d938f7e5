//! Two-query retrieval on the synthetic bridge benchmark: Pareto-front
//! retrieval against the averaged and max-fused baselines.

use paretoir::data::{QuerySet, RetrievalConfig};
use paretoir::emr::build_emr_model;
use paretoir::engine::{retrieve, Method};
use paretoir::eval::BridgeBenchmark;

fn main() -> paretoir::Result<()> {
    let (ds, labels) = BridgeBenchmark::default().generate(1)?;
    let model = build_emr_model(&ds, &RetrievalConfig::default(), 7)?;
    let a = ds.index_of("a0").expect("benchmark has a0");
    let b = ds.index_of("b0").expect("benchmark has b0");
    let qs = QuerySet::new(vec![a, b]);

    for method in [Method::Pfm, Method::MqAvg, Method::MqMax] {
        let res = retrieve(&ds, &model, &qs, &method, 10)?;
        let bridges = res
            .items
            .iter()
            .filter(|it| labels.row(it.item_index)[..2] == [true, true])
            .count();
        let ids: Vec<&str> = res.items.iter().map(|it| ds.id(it.item_index)).collect();
        println!("{:<8} bridge items {bridges:>2}/10  {}", method.name(), ids.join(" "));
    }
    Ok(())
}
