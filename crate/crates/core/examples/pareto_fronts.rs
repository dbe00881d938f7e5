//! Non-dominated sorting, the longest-chain view of front depth, and the
//! middle-out order used to read a front.

use paretoir::pareto::{
    longest_chain_depths, middle_out_order, non_dominated_sort, points_from_rows, DepthIndex,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> paretoir::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.random(), rng.random()]).collect();
    let points = points_from_rows(&rows)?;

    let layering = non_dominated_sort(&points)?;
    let chains = longest_chain_depths(&points)?;
    assert_eq!(layering.front_of, chains);
    println!("{} points, {} fronts", points.len(), layering.depth());

    for (k, front) in layering.fronts.iter().enumerate().take(3) {
        let order = middle_out_order(front, &points);
        let coords: Vec<String> = order
            .iter()
            .map(|&p| format!("({:.2},{:.2})", points[p].coords[0], points[p].coords[1]))
            .collect();
        println!("front {}: {}", k + 1, coords.join(" "));
    }

    let index = DepthIndex::new(points.clone())?;
    for x in [[0.25, 0.25], [0.5, 0.5], [1.0, 1.0]] {
        println!("depth at {x:?} = {}", index.depth_at(&x)?);
    }
    Ok(())
}
