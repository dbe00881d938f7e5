use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::density::{sample_density, SeparableDensity};
use crate::error::{Error, Result};
use crate::pareto::ChainDepthField;
use crate::pareto::weakly_below;

/// `n^{-1/d} h_n(x)` for a row-major sample with `dim` columns.
pub fn scaled_depth_at(points: &[f64], dim: usize, x: &[f64]) -> Result<f64> {
    if x.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            actual: x.len(),
        });
    }
    Ok(ChainDepthField::new(points.to_vec(), dim)?.scaled_depth_at(x))
}

/// The 9^d interior lattice `{0.1, …, 0.9}^d` followed by `(1, …, 1)`.
pub fn evaluation_grid(d: usize) -> Vec<Vec<f64>> {
    let ticks: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    let mut grid: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..d {
        grid = grid
            .into_iter()
            .flat_map(|p| {
                ticks.iter().map(move |&t| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
    }
    grid.push(vec![1.0; d]);
    grid
}

/// Scaled depths of one Monte Carlo sample at fixed evaluation points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthField {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub points: Vec<Vec<f64>>,
    pub scaled: Vec<f64>,
}

impl DepthField {
    pub fn sample(f: &SeparableDensity, n: usize, seed: u64, points: &[Vec<f64>]) -> Result<Self> {
        let d = f.dim();
        if let Some(p) = points.iter().find(|p| p.len() != d) {
            return Err(Error::Dimension {
                expected: d,
                actual: p.len(),
            });
        }
        let field = ChainDepthField::new(sample_density(f, n, seed)?, d)?;
        Ok(Self {
            n,
            d,
            seed,
            points: points.to_vec(),
            scaled: points.iter().map(|x| field.scaled_depth_at(x)).collect(),
        })
    }

    /// True when `x ≤ z` implies `scaled(x) ≤ scaled(z)` over all pairs.
    pub fn is_monotone(&self) -> bool {
        self.points.iter().zip(&self.scaled).all(|(x, sx)| {
            self.points
                .iter()
                .zip(&self.scaled)
                .all(|(z, sz)| !weakly_below(x, z) || sx <= sz)
        })
    }
}

/// Mean scaled depth over `runs` independent samples (seeds `seed..seed+runs`).
pub fn mean_scaled_depth(
    f: &SeparableDensity,
    n: usize,
    points: &[Vec<f64>],
    runs: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if runs == 0 {
        return Err(Error::Config("runs must be at least 1".into()));
    }
    let fields: Vec<DepthField> = (0..runs as u64)
        .into_par_iter()
        .map(|r| DepthField::sample(f, n, seed.wrapping_add(r), points))
        .collect::<Result<_>>()?;
    Ok((0..points.len())
        .map(|i| fields.iter().map(|fd| fd.scaled[i]).sum::<f64>() / runs as f64)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumRow {
    pub n: usize,
    /// First of the `runs` consecutive seeds averaged for this `n`.
    pub seed: u64,
    pub runs: usize,
    /// Mean scaled depth at `(1, …, 1)`.
    pub scaled_at_one: f64,
    pub max_relative_error: f64,
    /// Grid point attaining the maximum error.
    pub worst_point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumTable {
    pub d: usize,
    /// Constant calibrated at `(1, …, 1)` from the largest `n`.
    pub c_hat: f64,
    pub rows: Vec<ContinuumRow>,
}

impl ContinuumTable {
    pub fn is_non_increasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].max_relative_error <= w[0].max_relative_error)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,seed,runs,scaled_at_one,c_hat,max_relative_error,worst_point\n");
        for r in &self.rows {
            let worst: Vec<String> = r.worst_point.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.n,
                r.seed,
                r.runs,
                r.scaled_at_one,
                self.c_hat,
                r.max_relative_error,
                worst.join(" ")
            ));
        }
        out
    }
}

/// Compares the mean of `n^{-1/d} h_n` over `runs` samples with `ĉ F^{1/d}`
/// across `grid`, for each `n` in ascending order.
///
/// The `i`-th smallest `n` uses seeds `seed + i·runs ..`. Grid points with
/// `F(x) = 0` are skipped.
pub fn continuum_comparison(
    f: &SeparableDensity,
    n_schedule: &[usize],
    grid: &[Vec<f64>],
    runs: usize,
    seed: u64,
) -> Result<ContinuumTable> {
    let d = f.dim();
    if n_schedule.is_empty() {
        return Err(Error::Config("n schedule is empty".into()));
    }
    let mut schedule = n_schedule.to_vec();
    schedule.sort_unstable();
    schedule.dedup();
    let one = vec![1.0; d];
    let mut points = grid.to_vec();
    points.push(one.clone());
    let seeds: Vec<u64> = (0..schedule.len())
        .map(|i| seed.wrapping_add((i * runs) as u64))
        .collect();
    let means: Vec<Vec<f64>> = schedule
        .par_iter()
        .zip(&seeds)
        .map(|(&n, &s)| mean_scaled_depth(f, n, &points, runs, s))
        .collect::<Result<_>>()?;
    let at_one = points.len() - 1;
    let c_hat = means.last().expect("schedule is non-empty")[at_one] / f.cdf(&one).powf(1.0 / d as f64);
    if !(c_hat > 0.0) {
        return Err(Error::Numerical("calibrated constant is not positive".into()));
    }
    let rows = schedule
        .iter()
        .zip(&seeds)
        .zip(&means)
        .map(|((&n, &s), m)| {
            let mut worst = (0.0, one.clone());
            for (x, &v) in grid.iter().zip(m) {
                let limit = c_hat * f.cdf(x).powf(1.0 / d as f64);
                if limit > 0.0 {
                    let err = (v / limit - 1.0).abs();
                    if err > worst.0 {
                        worst = (err, x.clone());
                    }
                }
            }
            ContinuumRow {
                n,
                seed: s,
                runs,
                scaled_at_one: m[at_one],
                max_relative_error: worst.0,
                worst_point: worst.1,
            }
        })
        .collect();
    Ok(ContinuumTable { d, c_hat, rows })
}
