//! Non-dominated sorting into Pareto fronts, longest chains, and the order
//! in which items of one front are handed out.
//!
//! Dominance is strict: `p` dominates `q` when `p ≤ q` in every coordinate
//! and `p < q` in at least one. Identical points therefore never dominate
//! each other and always share a front.

mod chain;
mod order;

pub use chain::{longest_chain_depths, ChainDepthField};
pub use order::middle_out_order;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One item's dissimilarities to each of `T` queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub coords: Vec<f64>,
    pub item_index: usize,
}

impl ParetoPoint {
    pub fn new(coords: Vec<f64>, item_index: usize) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Integrity("pareto point needs at least one coordinate".into()));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integrity(format!("non-finite coordinate for item {item_index}")));
        }
        Ok(Self { coords, item_index })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Builds points `0..n` from coordinate rows.
pub fn points_from_rows(rows: &[Vec<f64>]) -> Result<Vec<ParetoPoint>> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| ParetoPoint::new(r.clone(), i))
        .collect()
}

#[inline]
pub fn dominates_coords(p: &[f64], q: &[f64]) -> bool {
    let mut strict = false;
    for (a, b) in p.iter().zip(q) {
        if a > b {
            return false;
        }
        strict |= a < b;
    }
    strict
}

/// `p ≤ x` componentwise.
#[inline]
pub fn weakly_below(p: &[f64], x: &[f64]) -> bool {
    p.iter().zip(x).all(|(a, b)| a <= b)
}

/// Strict Pareto dominance (smaller is better).
pub fn dominates(p: &ParetoPoint, q: &ParetoPoint) -> Result<bool> {
    if p.dim() != q.dim() {
        return Err(Error::Dimension {
            expected: p.dim(),
            actual: q.dim(),
        });
    }
    Ok(dominates_coords(&p.coords, &q.coords))
}

/// Front membership for every point. Indices refer to positions in the
/// slice that was sorted; fronts are 1-based and listed in ascending
/// position order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParetoLayering {
    pub front_of: Vec<usize>,
    pub fronts: Vec<Vec<usize>>,
}

impl ParetoLayering {
    fn from_front_of(front_of: Vec<usize>) -> Self {
        let depth = front_of.iter().copied().max().unwrap_or(0);
        let mut fronts = vec![Vec::new(); depth];
        for (i, &f) in front_of.iter().enumerate() {
            fronts[f - 1].push(i);
        }
        Self { front_of, fronts }
    }

    pub fn depth(&self) -> usize {
        self.fronts.len()
    }

    pub fn front(&self, k: usize) -> &[usize] {
        &self.fronts[k - 1]
    }
}

fn check_uniform(points: &[ParetoPoint]) -> Result<usize> {
    let first = points
        .first()
        .ok_or_else(|| Error::Integrity("cannot sort an empty point set".into()))?;
    let t = first.dim();
    if let Some(p) = points.iter().find(|p| p.dim() != t) {
        return Err(Error::Dimension {
            expected: t,
            actual: p.dim(),
        });
    }
    Ok(t)
}

/// Partitions `points` into successive Pareto fronts.
///
/// Two objectives use an `O(n log n)` sweep; everything else uses the
/// pairwise [`pairwise_sort`].
pub fn non_dominated_sort(points: &[ParetoPoint]) -> Result<ParetoLayering> {
    match check_uniform(points)? {
        1 => Ok(sort_one_objective(points)),
        2 => Ok(sort_two_objectives(points)),
        _ => Ok(pairwise_sort(points)),
    }
}

/// `O(n² T)` reference: count dominators, peel off the points whose count
/// reaches zero, one front at a time.
pub fn pairwise_sort(points: &[ParetoPoint]) -> ParetoLayering {
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominated: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&points[i].coords, &points[j].coords);
            if dominates_coords(a, b) {
                dominated[i].push(j);
                dominated_by[j] += 1;
            } else if dominates_coords(b, a) {
                dominated[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut front_of = vec![0usize; n];
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    let mut k = 1;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            front_of[i] = k;
            for &j in &dominated[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        current = next;
        k += 1;
    }
    ParetoLayering::from_front_of(front_of)
}

fn sort_one_objective(points: &[ParetoPoint]) -> ParetoLayering {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].coords[0].total_cmp(&points[b].coords[0]));
    let mut front_of = vec![0; points.len()];
    let mut k = 0;
    let mut last = f64::NAN;
    for &i in &order {
        let v = points[i].coords[0];
        if v != last {
            k += 1;
            last = v;
        }
        front_of[i] = k;
    }
    ParetoLayering::from_front_of(front_of)
}

/// Lexicographic sweep: after sorting by `(d1, d2)`, every earlier point with
/// `d2 ≤` the current one dominates it (identical points aside), and the
/// smallest `d2` seen in each front is non-decreasing in the front index, so
/// the target front is found by binary search.
pub fn sort_two_objectives(points: &[ParetoPoint]) -> ParetoLayering {
    let mut order: Vec<usize> = (0..points.len()).collect();
    let key = |i: usize| (points[i].coords[0], points[i].coords[1]);
    order.sort_by(|&a, &b| {
        let (a0, a1) = key(a);
        let (b0, b1) = key(b);
        a0.total_cmp(&b0).then(a1.total_cmp(&b1))
    });
    let mut front_of = vec![0usize; points.len()];
    let mut front_min: Vec<f64> = Vec::new();
    let mut idx = 0;
    while idx < order.len() {
        let (d1, d2) = key(order[idx]);
        let mut end = idx + 1;
        while end < order.len() && key(order[end]) == (d1, d2) {
            end += 1;
        }
        let f = front_min.partition_point(|&m| m <= d2);
        if f == front_min.len() {
            front_min.push(d2);
        } else {
            front_min[f] = d2;
        }
        for &i in &order[idx..end] {
            front_of[i] = f + 1;
        }
        idx = end;
    }
    ParetoLayering::from_front_of(front_of)
}

/// Point set with its layering, answering depth queries at arbitrary
/// locations.
#[derive(Debug, Clone)]
pub struct DepthIndex {
    points: Vec<ParetoPoint>,
    layering: ParetoLayering,
}

impl DepthIndex {
    pub fn new(points: Vec<ParetoPoint>) -> Result<Self> {
        let layering = non_dominated_sort(&points)?;
        Ok(Self { points, layering })
    }

    pub fn layering(&self) -> &ParetoLayering {
        &self.layering
    }

    /// Largest front index with a member `≤ x`; 0 when nothing lies below `x`.
    pub fn depth_at(&self, x: &[f64]) -> Result<usize> {
        let t = self.points[0].dim();
        if x.len() != t {
            return Err(Error::Dimension {
                expected: t,
                actual: x.len(),
            });
        }
        Ok(self
            .points
            .iter()
            .zip(&self.layering.front_of)
            .filter(|(p, _)| weakly_below(&p.coords, x))
            .map(|(_, &f)| f)
            .max()
            .unwrap_or(0))
    }
}

/// Pareto depth function evaluated at `x`.
pub fn depth_at(points: &[ParetoPoint], x: &[f64]) -> Result<usize> {
    DepthIndex::new(points.to_vec())?.depth_at(x)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(c: &[f64]) -> ParetoPoint {
        ParetoPoint::new(c.to_vec(), 0).unwrap()
    }

    /// Repeatedly strips the non-dominated points.
    pub(crate) fn scan_and_remove(points: &[ParetoPoint]) -> Vec<usize> {
        let mut front_of = vec![0; points.len()];
        let mut remaining: Vec<usize> = (0..points.len()).collect();
        let mut k = 1;
        while !remaining.is_empty() {
            let front: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&i| {
                    !remaining
                        .iter()
                        .any(|&j| dominates_coords(&points[j].coords, &points[i].coords))
                })
                .collect();
            for &i in &front {
                front_of[i] = k;
            }
            remaining.retain(|i| !front.contains(i));
            k += 1;
        }
        front_of
    }

    pub(crate) fn random_points(n: usize, t: usize, rng: &mut ChaCha8Rng) -> Vec<ParetoPoint> {
        (0..n)
            .map(|i| ParetoPoint::new((0..t).map(|_| rng.random()).collect(), i).unwrap())
            .collect()
    }

    #[test]
    fn dominance_cases() {
        assert!(dominates(&pt(&[0.1, 0.2]), &pt(&[0.3, 0.4])).unwrap());
        assert!(!dominates(&pt(&[0.1, 0.2]), &pt(&[0.1, 0.2])).unwrap());
        assert!(!dominates(&pt(&[0.1, 0.5]), &pt(&[0.2, 0.3])).unwrap());
        assert!(dominates(&pt(&[0.1, 0.2]), &pt(&[0.1, 0.3])).unwrap());
        assert!(dominates(&pt(&[0.1]), &pt(&[0.1, 0.3])).is_err());
    }

    #[test]
    fn anti_diagonal_is_one_front() {
        let k = 10.0;
        let pts = points_from_rows(&(0..=10).map(|i| vec![i as f64, k - i as f64]).collect::<Vec<_>>())
            .unwrap();
        for layering in [non_dominated_sort(&pts).unwrap(), pairwise_sort(&pts)] {
            assert_eq!(layering.depth(), 1);
            assert_eq!(layering.fronts[0].len(), 11);
        }
    }

    #[test]
    fn chain_is_total_order() {
        let pts = points_from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]).unwrap();
        let l = non_dominated_sort(&pts).unwrap();
        assert_eq!(l.fronts, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn matches_scan_and_remove_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let pts = random_points(200, 2, &mut rng);
        let l = non_dominated_sort(&pts).unwrap();
        assert_eq!(l.front_of, scan_and_remove(&pts));
        for t in [1, 3, 4] {
            let pts = random_points(150, t, &mut rng);
            assert_eq!(non_dominated_sort(&pts).unwrap().front_of, scan_and_remove(&pts));
        }
    }

    #[test]
    fn duplicates_share_a_front() {
        let rows = vec![
            vec![0.5, 0.5],
            vec![0.5, 0.5],
            vec![0.2, 0.9],
            vec![0.6, 0.6],
            vec![0.6, 0.6],
            vec![0.5, 0.7],
        ];
        let pts = points_from_rows(&rows).unwrap();
        let fast = sort_two_objectives(&pts);
        assert_eq!(fast, pairwise_sort(&pts));
        assert_eq!(fast.front_of, vec![1, 1, 1, 2, 2, 2]);
    }

    #[test]
    fn sort_rejects_bad_input() {
        assert!(non_dominated_sort(&[]).is_err());
        let mixed = vec![pt(&[1.0, 2.0]), pt(&[1.0])];
        assert!(non_dominated_sort(&mixed).is_err());
        assert!(ParetoPoint::new(vec![f64::NAN], 0).is_err());
    }

    #[test]
    fn depth_function() {
        let pts = points_from_rows(&[vec![0.1, 0.1], vec![0.2, 0.2], vec![0.3, 0.15]]).unwrap();
        let idx = DepthIndex::new(pts.clone()).unwrap();
        assert_eq!(idx.depth_at(&[0.0, 0.0]).unwrap(), 0);
        assert_eq!(idx.depth_at(&[1.0, 1.0]).unwrap(), 2);
        assert_eq!(idx.depth_at(&[0.3, 0.15]).unwrap(), 2);
        assert_eq!(idx.depth_at(&[0.25, 0.12]).unwrap(), 1);
        assert!(idx.depth_at(&[1.0]).is_err());
        assert_eq!(depth_at(&pts, &[0.2, 0.2]).unwrap(), 2);
    }

    #[test]
    fn depth_at_unit_corner_counts_all_fronts() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts = random_points(300, 3, &mut rng);
        let idx = DepthIndex::new(pts).unwrap();
        assert_eq!(idx.depth_at(&[1.0; 3]).unwrap(), idx.layering().depth());
    }
}
