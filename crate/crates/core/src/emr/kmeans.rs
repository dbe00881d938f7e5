//! Seeded k-means++ / Lloyd clustering used to place anchors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::FeatureDataset;

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Returns `k` centers, row-major `k × m`. Deterministic for a given seed.
pub fn kmeans(ds: &FeatureDataset, k: usize, iterations: usize, seed: u64) -> Vec<f64> {
    let n = ds.len();
    let m = ds.dim();
    assert!(k >= 1 && k <= n, "k must be in [1, n]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut centers = Vec::with_capacity(k * m);
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    centers.extend_from_slice(ds.row(first));
    let mut nearest: Vec<f64> = ds.rows().map(|x| squared_distance(x, ds.row(first))).collect();

    for _ in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in nearest.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            // Every remaining item coincides with a center.
            chosen.iter().position(|c| !c).expect("k <= n")
        };
        chosen[pick] = true;
        let c = ds.row(pick);
        centers.extend_from_slice(c);
        for (w, x) in nearest.iter_mut().zip(ds.rows()) {
            *w = w.min(squared_distance(x, c));
        }
    }

    let mut assignment = vec![usize::MAX; n];
    let mut sums = vec![0.0; k * m];
    let mut counts = vec![0usize; k];
    for _ in 0..iterations {
        let mut changed = false;
        for (i, x) in ds.rows().enumerate() {
            let best = (0..k)
                .map(|c| (squared_distance(x, &centers[c * m..(c + 1) * m]), c))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .map(|(_, c)| c)
                .unwrap();
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        sums.fill(0.0);
        counts.fill(0);
        for (i, x) in ds.rows().enumerate() {
            let c = assignment[i];
            counts[c] += 1;
            for (s, v) in sums[c * m..(c + 1) * m].iter_mut().zip(x) {
                *s += v;
            }
        }
        for c in 0..k {
            // Empty clusters keep their previous center.
            if counts[c] > 0 {
                for j in 0..m {
                    centers[c * m + j] = sums[c * m + j] / counts[c] as f64;
                }
            }
        }
    }
    centers
}
