use nalgebra::{DMatrix, DVector};
use paretoir::data::{FeatureDataset, RetrievalConfig};
use paretoir::emr::{build_emr_model, classic_mr_iterate, classic_mr_rank, emr_rank, EmrModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_dataset(n: usize, m: usize, seed: u64) -> FeatureDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let centre = (i % 3) as f64 * 2.0;
            (0..m).map(|_| centre + rng.random::<f64>()).collect()
        })
        .collect();
    FeatureDataset::from_rows(&rows).unwrap()
}

fn model(n: usize, seed: u64) -> (FeatureDataset, EmrModel) {
    let ds = random_dataset(n, 4, seed);
    let cfg = RetrievalConfig {
        anchor_count: 24,
        nearest_anchors: 4,
        ..RetrievalConfig::default()
    };
    let m = build_emr_model(&ds, &cfg, seed).unwrap();
    (ds, m)
}

/// Solves `(I − α D^{-1/2} ZᵀZ D^{-1/2}) r = y` densely, rebuilding `Z`
/// from the stored anchor weights and the degrees from scratch.
fn dense_oracle(m: &EmrModel, y: &[f64]) -> Vec<f64> {
    let n = m.len();
    let mut z = DMatrix::<f64>::zeros(m.anchor_count(), n);
    for i in 0..n {
        for (a, w) in m.weights().column(i) {
            z[(a, i)] = w;
        }
    }
    let w = z.transpose() * &z;
    let inv_sqrt: Vec<f64> = (0..n).map(|i| 1.0 / w.row(i).sum().sqrt()).collect();
    let s = DMatrix::from_fn(n, n, |i, j| w[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
    let system = DMatrix::<f64>::identity(n, n) - s * m.alpha();
    let r = system.lu().solve(&DVector::from_column_slice(y)).unwrap();
    r.iter().copied().collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn unit(n: usize, q: usize) -> Vec<f64> {
    let mut y = vec![0.0; n];
    y[q] = 1.0;
    y
}

#[test]
fn efficient_ranking_matches_dense_solve() {
    for (n, seed) in [(60, 1), (200, 2), (450, 3)] {
        let (_, m) = model(n, seed);
        for q in [0, n / 2, n - 1] {
            let y = unit(n, q);
            let got = emr_rank(&m, &y).unwrap().scores;
            let want = dense_oracle(&m, &y);
            let scale = want.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            assert!(max_abs_diff(&got, &want) / scale < 1e-10, "n={n} q={q}");
        }
    }
}

#[test]
fn ranking_is_linear_in_the_query_vector() {
    let (_, m) = model(150, 5);
    let ra = emr_rank(&m, &unit(150, 3)).unwrap().scores;
    let rb = emr_rank(&m, &unit(150, 77)).unwrap().scores;
    let mut y = unit(150, 3);
    y[77] = 1.0;
    let rab = emr_rank(&m, &y).unwrap().scores;
    let sum: Vec<f64> = ra.iter().zip(&rb).map(|(a, b)| a + b).collect();
    assert!(max_abs_diff(&rab, &sum) < 1e-10);

    let scaled = emr_rank(&m, &unit(150, 3).iter().map(|v| v * 2.5).collect::<Vec<_>>()).unwrap().scores;
    let want: Vec<f64> = ra.iter().map(|v| v * 2.5).collect();
    assert!(max_abs_diff(&scaled, &want) < 1e-10);

    let zero = emr_rank(&m, &vec![0.0; 150]).unwrap().scores;
    assert!(zero.iter().all(|&v| v == 0.0));
}

#[test]
fn small_alpha_returns_the_query_vector() {
    let ds = random_dataset(80, 3, 9);
    let cfg = RetrievalConfig {
        alpha: 1e-6,
        anchor_count: 16,
        nearest_anchors: 3,
        ..RetrievalConfig::default()
    };
    let m = build_emr_model(&ds, &cfg, 1).unwrap();
    let y = unit(80, 10);
    assert!(max_abs_diff(&emr_rank(&m, &y).unwrap().scores, &y) < 1e-4);
}

#[test]
fn classic_iteration_matches_closed_form() {
    for (n, alpha) in [(200, 0.9), (500, 0.8)] {
        let ds = random_dataset(n, 3, n as u64);
        let closed = classic_mr_rank(&ds, 4, 0.6, alpha).unwrap().scores;
        let iter = classic_mr_iterate(&ds, 4, 0.6, alpha, 1e-13, 100_000).unwrap().scores;
        assert!(max_abs_diff(&closed, &iter) < 1e-8, "n={n}");
    }
}

/// Instances where the query is outscored in its own closed-form ranking.
fn outscored(alpha: f64) -> Vec<(u64, usize, usize, usize, f64)> {
    let mut flagged = Vec::new();
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = rng.random_range(8..40);
        let ds = random_dataset(n, 2, seed);
        let q = rng.random_range(0..n);
        let r = classic_mr_rank(&ds, q, 0.5, alpha).unwrap().scores;
        let best = (0..n).max_by(|&a, &b| r[a].total_cmp(&r[b])).unwrap();
        if best != q {
            let again = classic_mr_iterate(&ds, q, 0.5, alpha, 1e-14, 1_000_000).unwrap().scores;
            assert!(again[best] > again[q], "seed {seed}: closed form and iteration disagree");
            flagged.push((seed, n, q, best, r[best] - r[q]));
        }
    }
    flagged
}

/// With `α ≤ 1/2` the query always wins: every off-diagonal entry of
/// `Σ αᵏSᵏ` is at most `α/(1−α) ≤ 1` while the diagonal exceeds 1. Near
/// `α = 1` the ranking tends to the leading eigenvector `D^{1/2}1`, so
/// high-degree items can overtake the query; those cases are printed.
#[test]
fn query_scores_highest_for_moderate_alpha() {
    assert!(outscored(0.5).is_empty());
    for alpha in [0.9, 0.99] {
        let flagged = outscored(alpha);
        for (seed, n, q, best, gap) in flagged.iter().take(5) {
            println!("alpha {alpha}: seed {seed}, n {n}, query {q} outscored by {best} (by {gap:.3e})");
        }
        println!("alpha {alpha}: {} of 100 instances flagged", flagged.len());
    }
}
