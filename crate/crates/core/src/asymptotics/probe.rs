use serde::{Deserialize, Serialize};

use super::density::{sample_density, SeparableDensity};
use crate::error::{Error, Result};
use crate::pareto::ChainDepthField;

/// Grid cells per axis used by [`quasiconcavity_probe`].
pub const DEFAULT_RESOLUTION: usize = 64;

/// Empirical level curve of the scaled depth and its convexity defect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    /// Requested level as a fraction of the largest scaled depth on the grid.
    pub fraction: f64,
    /// Absolute scaled-depth level.
    pub level: f64,
    /// `(x1, φ(x1))` with `φ(x1)` the smallest grid `x2` reaching the level.
    pub curve: Vec<(f64, f64)>,
    /// Fraction of curve points strictly above the lower convex hull.
    pub defect: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub n: usize,
    pub resolution: usize,
    pub max_scaled_depth: f64,
    pub levels: Vec<LevelReport>,
}

impl ProbeReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fraction,level,curve_points,defect,note\n");
        for l in &self.levels {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                l.fraction,
                l.level,
                l.curve.len(),
                l.defect.map(|d| d.to_string()).unwrap_or_default(),
                l.note.as_deref().unwrap_or("")
            ));
        }
        out
    }

    /// Gnuplot data: one block per level, separated by two blank lines.
    pub fn to_gnuplot(&self) -> String {
        let mut out = String::new();
        for l in &self.levels {
            out.push_str(&format!("# level {} (fraction {})\n", l.level, l.fraction));
            for (x, y) in &l.curve {
                out.push_str(&format!("{x} {y}\n"));
            }
            out.push_str("\n\n");
        }
        out
    }
}

/// Scaled depth at the corners `((i+1)/G, (j+1)/G)`, indexed `[i * G + j]`.
///
/// A point lies below corner `(i, j)` iff its cell (by `⌈x G⌉ − 1`) is
/// componentwise `≤ (i, j)`, so a 2D prefix maximum gives every corner in
/// `O(n + G²)`.
pub fn grid_scaled_depths(field: &ChainDepthField, coords: &[f64], resolution: usize) -> Vec<f64> {
    let g = resolution;
    let cell = |v: f64| ((v * g as f64).ceil() as isize - 1).clamp(0, g as isize - 1) as usize;
    let mut best = vec![0usize; g * g];
    for (p, &d) in coords.chunks_exact(2).zip(field.point_depths()) {
        if p[0] > 1.0 || p[1] > 1.0 {
            continue;
        }
        let k = cell(p[0]) * g + cell(p[1]);
        best[k] = best[k].max(d);
    }
    for i in 0..g {
        for j in 0..g {
            let mut v = best[i * g + j];
            if i > 0 {
                v = v.max(best[(i - 1) * g + j]);
            }
            if j > 0 {
                v = v.max(best[i * g + j - 1]);
            }
            best[i * g + j] = v;
        }
    }
    let scale = (field.len() as f64).powf(-0.5);
    best.into_iter().map(|d| d as f64 * scale).collect()
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Lower convex hull of points sorted by `x` (monotone chain).
fn lower_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull
}

fn hull_height(hull: &[(f64, f64)], x: f64) -> f64 {
    let k = hull.partition_point(|p| p.0 < x);
    if k == 0 {
        return hull[0].1;
    }
    if k == hull.len() {
        return hull[k - 1].1;
    }
    let (a, b) = (hull[k - 1], hull[k]);
    a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
}

/// Fraction of curve points more than `tol` above the curve's lower hull.
pub fn convexity_defect(curve: &[(f64, f64)], tol: f64) -> f64 {
    if curve.len() < 3 {
        return 0.0;
    }
    let hull = lower_hull(curve);
    let above = curve
        .iter()
        .filter(|&&(x, y)| y - hull_height(&hull, x) > tol)
        .count();
    above as f64 / curve.len() as f64
}

/// Probes the super-level sets of the scaled depth of a planar sample.
///
/// Levels are fractions of the largest scaled depth on the grid. A level
/// whose set contains no grid corner is reported with a note and no defect.
/// Curve points deviating from convexity by at most two grid steps count as
/// convex.
pub fn probe_points(coords: &[f64], levels: &[f64], resolution: usize) -> Result<ProbeReport> {
    if coords.is_empty() || coords.len() % 2 != 0 {
        return Err(Error::Dimension {
            expected: 2,
            actual: coords.len(),
        });
    }
    if resolution < 2 {
        return Err(Error::Config("probe resolution must be at least 2".into()));
    }
    let g = resolution;
    let field = ChainDepthField::new(coords.to_vec(), 2)?;
    let depths = grid_scaled_depths(&field, coords, g);
    let max = depths.iter().copied().fold(0.0, f64::max);
    let step = 1.0 / g as f64;
    let levels = levels
        .iter()
        .map(|&fraction| {
            let level = fraction * max;
            let curve: Vec<(f64, f64)> = (0..g)
                .filter_map(|i| {
                    (0..g)
                        .find(|&j| depths[i * g + j] >= level)
                        .map(|j| ((i + 1) as f64 * step, (j + 1) as f64 * step))
                })
                .collect();
            if curve.is_empty() || !(max > 0.0) {
                LevelReport {
                    fraction,
                    level,
                    curve,
                    defect: None,
                    note: Some("empty level set".into()),
                }
            } else {
                let defect = convexity_defect(&curve, 2.0 * step);
                LevelReport {
                    fraction,
                    level,
                    curve,
                    defect: Some(defect),
                    note: None,
                }
            }
        })
        .collect();
    Ok(ProbeReport {
        n: field.len(),
        resolution: g,
        max_scaled_depth: max,
        levels,
    })
}

/// Samples `n` points from a planar density and probes the given levels.
pub fn quasiconcavity_probe(
    f: &SeparableDensity,
    n: usize,
    levels: &[f64],
    seed: u64,
) -> Result<ProbeReport> {
    if f.dim() != 2 {
        return Err(Error::Config(format!(
            "convexity probe is planar, density has {} axes",
            f.dim()
        )));
    }
    probe_points(&sample_density(f, n, seed)?, levels, DEFAULT_RESOLUTION)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hull_of_convex_curve_has_no_defect() {
        let curve: Vec<(f64, f64)> = (1..=20).map(|i| (i as f64 / 20.0, 0.05 / (i as f64 / 20.0))).collect();
        assert_eq!(convexity_defect(&curve, 1e-12), 0.0);
        let bump: Vec<(f64, f64)> = (0..=10).map(|i| (i as f64, if i == 5 { 10.0 } else { 0.0 })).collect();
        assert!((convexity_defect(&bump, 0.5) - 1.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn grid_depths_match_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let coords: Vec<f64> = (0..600).map(|_| rng.random::<f64>()).collect();
        let field = ChainDepthField::new(coords.clone(), 2).unwrap();
        let g = 13;
        let fast = grid_scaled_depths(&field, &coords, g);
        for i in 0..g {
            for j in 0..g {
                let x = [(i + 1) as f64 / g as f64, (j + 1) as f64 / g as f64];
                assert_eq!(fast[i * g + j], field.scaled_depth_at(&x), "corner {i},{j}");
            }
        }
    }

    #[test]
    fn probe_requires_planar_density() {
        assert!(quasiconcavity_probe(&SeparableDensity::uniform(3), 100, &[0.5], 0).is_err());
    }

    #[test]
    fn unreachable_level_is_noted() {
        let r = quasiconcavity_probe(&SeparableDensity::uniform(2), 500, &[0.5, 1.5], 0).unwrap();
        assert!(r.levels[0].defect.is_some());
        assert!(r.levels[1].defect.is_none() && r.levels[1].note.is_some());
    }
}
