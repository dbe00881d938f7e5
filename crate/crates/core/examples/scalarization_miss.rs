//! On a front bowed away from the origin, linear scalarization only ever
//! ranks the two end points first. Pareto-front retrieval returns the whole
//! front.

use paretoir::data::QuerySet;
use paretoir::emr::RankingVector;
use paretoir::engine::{retrieve_from_rankings, scalarization_top1, Method};

fn main() -> paretoir::Result<()> {
    // Items 0 and 1 are the queries; the rest sit on a quarter circle of
    // dissimilarities, with a shrunken copy behind it as front 2.
    let mut d1 = vec![0.0, 1.0];
    let mut d2 = vec![1.0, 0.0];
    for scale in [1.0, 1.2] {
        for i in 0..=10 {
            let t = std::f64::consts::FRAC_PI_2 * i as f64 / 10.0;
            d1.push(scale * t.cos());
            d2.push(scale * t.sin());
        }
    }
    let rankings = [d1, d2].map(|d| RankingVector {
        scores: d.iter().map(|v| 1.0 - v).collect(),
        query_index: None,
    });
    let qs = QuerySet::new(vec![0, 1]);

    let reached = scalarization_top1(&rankings, &qs, 100)?;
    let pfm = retrieve_from_rankings(&rankings, &qs, &Method::Pfm, 11)?;
    let front1: Vec<usize> = pfm.items.iter().filter(|it| it.front == Some(1)).map(|it| it.item_index).collect();
    let missed: Vec<usize> = front1.iter().copied().filter(|i| !reached.contains(i)).collect();
    println!("front 1 items        {front1:?}");
    println!("scalarization top-1  {reached:?}");
    println!("never reached        {missed:?}");
    Ok(())
}
