//! Dense manifold ranking on a Gaussian-weighted graph that is grown edge by
//! edge in ascending distance order until it becomes connected.

use nalgebra::{DMatrix, DVector};

use super::kmeans::squared_distance;
use super::RankingVector;
use crate::data::FeatureDataset;
use crate::error::{Error, Result};

/// Largest dataset the dense ranker accepts.
pub const DENSE_CAP: usize = 2000;

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// The connected graph and its symmetric normalisation `S = D^{-1/2} W D^{-1/2}`.
#[derive(Debug, Clone)]
pub struct ClassicGraph {
    /// `(i, j, distance)` with `i < j`, in insertion order.
    edges: Vec<(usize, usize, f64)>,
    adjacency: Vec<Vec<(usize, f64)>>,
    normalized: DMatrix<f64>,
}

impl ClassicGraph {
    pub fn build(ds: &FeatureDataset, sigma: f64) -> Result<Self> {
        let n = ds.len();
        if n > DENSE_CAP {
            return Err(Error::TooLarge { n, cap: DENSE_CAP });
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
        }
        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((i, j, squared_distance(ds.row(i), ds.row(j)).sqrt()));
            }
        }
        pairs.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));

        let mut sets = DisjointSets::new(n);
        let mut components = n;
        let mut edges = Vec::new();
        for (i, j, d) in pairs {
            if components <= 1 {
                break;
            }
            if sets.union(i, j) {
                components -= 1;
            }
            edges.push((i, j, d));
        }

        let mut adjacency = vec![Vec::new(); n];
        let mut degree = vec![0.0; n];
        for &(i, j, d) in &edges {
            let w = (-d * d / (2.0 * sigma * sigma)).exp();
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
            degree[i] += w;
            degree[j] += w;
        }
        if n > 1 {
            if let Some(item) = degree.iter().position(|&d| d <= 0.0) {
                return Err(Error::Numerical(format!(
                    "item {item} has zero total edge weight; increase sigma"
                )));
            }
        }
        let inv_sqrt: Vec<f64> = degree
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
            .collect();
        for (i, row) in adjacency.iter_mut().enumerate() {
            for (j, w) in row.iter_mut() {
                *w *= inv_sqrt[i] * inv_sqrt[*j];
            }
            row.sort_by_key(|p| p.0);
        }
        let mut normalized = DMatrix::zeros(n, n);
        for (i, row) in adjacency.iter().enumerate() {
            for &(j, s) in row {
                normalized[(i, j)] = s;
            }
        }
        Ok(Self {
            edges,
            adjacency,
            normalized,
        })
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Edges in the order they were added, as `(i, j, distance)`.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Dense `S = D^{-1/2} W D^{-1/2}`.
    pub fn normalized_affinity(&self) -> &DMatrix<f64> {
        &self.normalized
    }

    /// Closed form `(I − αS)⁻¹ y`.
    pub fn rank(&self, y: &[f64], alpha: f64) -> Result<Vec<f64>> {
        let n = self.len();
        check_len(y, n)?;
        let system = DMatrix::<f64>::identity(n, n) - &self.normalized * alpha;
        let sol = system
            .lu()
            .solve(&DVector::from_column_slice(y))
            .ok_or_else(|| Error::Numerical("I - alpha S is singular".into()))?;
        Ok(sol.iter().copied().collect())
    }

    /// Runs `r(t+1) = αS r(t) + (1−α) y` from `r(0) = y` until the sup-norm
    /// step falls below `tol`. The fixed point of that recursion is
    /// `(1−α)(I − αS)⁻¹ y`; the result is divided by `1 − α` so it is
    /// directly comparable with [`ClassicGraph::rank`].
    pub fn iterate(&self, y: &[f64], alpha: f64, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
        let n = self.len();
        check_len(y, n)?;
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::Config(format!("alpha must lie in [0, 1), got {alpha}")));
        }
        let mut r = y.to_vec();
        let mut next = vec![0.0; n];
        let mut residual = f64::INFINITY;
        for _ in 0..max_iter {
            residual = 0.0;
            for (i, row) in self.adjacency.iter().enumerate() {
                let sr: f64 = row.iter().map(|&(j, s)| s * r[j]).sum();
                next[i] = alpha * sr + (1.0 - alpha) * y[i];
                residual = f64::max(residual, (next[i] - r[i]).abs());
            }
            std::mem::swap(&mut r, &mut next);
            if residual < tol {
                let scale = 1.0 / (1.0 - alpha);
                return Ok(r.into_iter().map(|v| v * scale).collect());
            }
        }
        Err(Error::NonConvergence {
            iterations: max_iter,
            residual,
        })
    }
}

fn check_len(y: &[f64], n: usize) -> Result<()> {
    if y.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: y.len(),
        });
    }
    Ok(())
}

fn indicator(n: usize, query: usize) -> Result<Vec<f64>> {
    if query >= n {
        return Err(Error::Query(format!("query index {query} out of range for {n} items")));
    }
    let mut y = vec![0.0; n];
    y[query] = 1.0;
    Ok(y)
}

/// Exact manifold ranking for one query via a dense solve.
pub fn classic_mr_rank(
    ds: &FeatureDataset,
    query: usize,
    sigma: f64,
    alpha: f64,
) -> Result<RankingVector> {
    let graph = ClassicGraph::build(ds, sigma)?;
    let y = indicator(ds.len(), query)?;
    Ok(RankingVector {
        scores: graph.rank(&y, alpha)?,
        query_index: Some(query),
    })
}

/// Iterative manifold ranking for one query.
pub fn classic_mr_iterate(
    ds: &FeatureDataset,
    query: usize,
    sigma: f64,
    alpha: f64,
    tol: f64,
    max_iter: usize,
) -> Result<RankingVector> {
    let graph = ClassicGraph::build(ds, sigma)?;
    let y = indicator(ds.len(), query)?;
    Ok(RankingVector {
        scores: graph.iterate(&y, alpha, tol, max_iter)?,
        query_index: Some(query),
    })
}
