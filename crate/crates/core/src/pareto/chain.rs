use super::{check_uniform, weakly_below, ParetoPoint};
use crate::error::{Error, Result};

/// For each point, the length of the longest chain `x¹ ≤ … ≤ xˡ` in the set
/// that ends at that point (componentwise `≤`).
///
/// Identical points at different positions may follow each other in a chain,
/// in position order.
pub fn longest_chain_depths(points: &[ParetoPoint]) -> Result<Vec<usize>> {
    let t = check_uniform(points)?;
    let flat: Vec<f64> = points.iter().flat_map(|p| p.coords.iter().copied()).collect();
    Ok(chain_depths(&flat, t))
}

fn lex_order(coords: &[f64], dim: usize) -> Vec<usize> {
    let n = coords.len() / dim;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&coords[a * dim..(a + 1) * dim], &coords[b * dim..(b + 1) * dim]);
        pa.iter()
            .zip(pb)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

fn chain_depths(coords: &[f64], dim: usize) -> Vec<usize> {
    let n = coords.len() / dim;
    let order = lex_order(coords, dim);
    let mut depth = vec![0usize; n];
    match dim {
        1 => {
            for (rank, &i) in order.iter().enumerate() {
                depth[i] = rank + 1;
            }
        }
        2 => {
            // Longest non-decreasing subsequence of the second coordinate.
            let mut tails: Vec<f64> = Vec::new();
            for &i in &order {
                let y = coords[i * 2 + 1];
                let pos = tails.partition_point(|&v| v <= y);
                if pos == tails.len() {
                    tails.push(y);
                } else {
                    tails[pos] = y;
                }
                depth[i] = pos + 1;
            }
        }
        _ => {
            for (k, &i) in order.iter().enumerate() {
                let x = &coords[i * dim..(i + 1) * dim];
                let best = order[..k]
                    .iter()
                    .filter(|&&j| weakly_below(&coords[j * dim..(j + 1) * dim], x))
                    .map(|&j| depth[j])
                    .max()
                    .unwrap_or(0);
                depth[i] = best + 1;
            }
        }
    }
    depth
}

/// Chain depths precomputed over a large sample, for evaluating the depth
/// function `max{chain length ending ≤ x}` at many locations.
#[derive(Debug, Clone)]
pub struct ChainDepthField {
    coords: Vec<f64>,
    dim: usize,
    depth: Vec<usize>,
}

impl ChainDepthField {
    /// `coords` is row-major with `dim` columns.
    pub fn new(coords: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::Dimension {
                expected: dim,
                actual: coords.len(),
            });
        }
        let depth = chain_depths(&coords, dim);
        Ok(Self { coords, dim, depth })
    }

    pub fn len(&self) -> usize {
        self.depth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depth.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Chain depth of each sample point.
    pub fn point_depths(&self) -> &[usize] {
        &self.depth
    }

    /// Longest chain with maximal element `≤ x`; 0 if no sample lies below `x`.
    pub fn depth_at(&self, x: &[f64]) -> usize {
        assert_eq!(x.len(), self.dim, "evaluation point has wrong dimension");
        self.coords
            .chunks_exact(self.dim)
            .zip(&self.depth)
            .filter(|(p, _)| weakly_below(p, x))
            .map(|(_, &d)| d)
            .max()
            .unwrap_or(0)
    }

    /// `n^{-1/d}` times [`ChainDepthField::depth_at`].
    pub fn scaled_depth_at(&self, x: &[f64]) -> f64 {
        self.depth_at(x) as f64 * (self.len() as f64).powf(-1.0 / self.dim as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pareto::points_from_rows;
    use crate::pareto::tests::random_points;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Exhaustive longest chain by DFS over the comparability DAG.
    fn brute_force(points: &[ParetoPoint]) -> Vec<usize> {
        fn longest(i: usize, pts: &[ParetoPoint], memo: &mut Vec<Option<usize>>) -> usize {
            if let Some(v) = memo[i] {
                return v;
            }
            let mut best = 1;
            for j in 0..pts.len() {
                if j != i
                    && weakly_below(&pts[j].coords, &pts[i].coords)
                    && pts[j].coords != pts[i].coords
                {
                    best = best.max(1 + longest(j, pts, memo));
                }
            }
            memo[i] = Some(best);
            best
        }
        let mut memo = vec![None; points.len()];
        (0..points.len()).map(|i| longest(i, points, &mut memo)).collect()
    }

    #[test]
    fn hand_enumerated_example() {
        let pts = points_from_rows(&[vec![0.1, 0.1], vec![0.2, 0.2], vec![0.3, 0.15]]).unwrap();
        assert_eq!(longest_chain_depths(&pts).unwrap(), vec![1, 2, 2]);
    }

    #[test]
    fn increasing_sequence() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, i as f64 * 2.0, 1.0]).collect();
        let pts = points_from_rows(&rows).unwrap();
        assert_eq!(longest_chain_depths(&pts).unwrap(), (1..=8).collect::<Vec<_>>());
    }

    #[test]
    fn dp_matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for t in 1..=4 {
            let pts = random_points(120, t, &mut rng);
            assert_eq!(longest_chain_depths(&pts).unwrap(), brute_force(&pts), "T = {t}");
        }
    }

    #[test]
    fn field_queries() {
        let field = ChainDepthField::new(vec![0.1, 0.1, 0.2, 0.2, 0.3, 0.15], 2).unwrap();
        assert_eq!(field.depth_at(&[0.05, 0.5]), 0);
        assert_eq!(field.depth_at(&[1.0, 1.0]), 2);
        assert!((field.scaled_depth_at(&[1.0, 1.0]) - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!(ChainDepthField::new(vec![1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn one_dimensional_depth_counts_points_below() {
        let xs = vec![0.5, 0.1, 0.9, 0.3, 0.3];
        let field = ChainDepthField::new(xs.clone(), 1).unwrap();
        for x in [0.0, 0.2, 0.3, 0.6, 1.0] {
            let count = xs.iter().filter(|&&v| v <= x).count();
            assert_eq!(field.depth_at(&[x]), count);
        }
    }
}
