//! Undirected weighted communication graph.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{category, Error, Result, Violation};

const SYMMETRY_TOL: f64 = 1e-12;

/// Connectivity threshold on `λ₂`.
pub const LAMBDA2_TOL: f64 = 1e-9;

/// Named topologies with a uniform edge weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Cycle,
    Complete,
    Path,
}

/// Symmetric, nonnegative weight matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Adjacency {
    weights: DMatrix<f64>,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl Adjacency {
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        let v = validate_weights(&weights);
        if !v.is_empty() {
            return Err(Error::Validation(v));
        }
        let n = weights.nrows();
        let neighbors = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i && weights[(i, j)] > 0.0)
                    .map(|j| (j, weights[(i, j)]))
                    .collect()
            })
            .collect();
        Ok(Self { weights, neighbors })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::validation(category::GRAPH, "weight matrix must be square"));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn topology(kind: Topology, n: usize, weight: f64) -> Result<Self> {
        let mut w = DMatrix::zeros(n, n);
        let mut link = |i: usize, j: usize| {
            if i != j {
                w[(i, j)] = weight;
                w[(j, i)] = weight;
            }
        };
        match kind {
            Topology::Cycle => {
                for i in 0..n {
                    if n > 1 {
                        link(i, (i + 1) % n);
                    }
                }
            }
            Topology::Complete => {
                for i in 0..n {
                    for j in i + 1..n {
                        link(i, j);
                    }
                }
            }
            Topology::Path => {
                for i in 0..n.saturating_sub(1) {
                    link(i, i + 1);
                }
            }
        }
        Self::new(w)
    }

    pub fn edgeless(n: usize) -> Self {
        Self::new(DMatrix::zeros(n, n)).expect("zero matrix is a valid adjacency")
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    /// Positive-weight neighbors of `i`.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[i]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| (0..self.n()).map(|j| self.weights[(i, j)]).collect())
            .collect()
    }
}

fn validate_weights(w: &DMatrix<f64>) -> Vec<Violation> {
    let mut out = Vec::new();
    if w.nrows() != w.ncols() {
        out.push(Violation::new(category::GRAPH, "weight matrix must be square"));
        return out;
    }
    if w.nrows() == 0 {
        out.push(Violation::new(category::GRAPH, "graph needs at least one node"));
    }
    let n = w.nrows();
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        out.push(Violation::new(category::GRAPH, "edge weights must be finite and nonnegative"));
    }
    if (0..n).any(|i| w[(i, i)] != 0.0) {
        out.push(Violation::new(category::GRAPH, "weight matrix diagonal must be zero"));
    }
    let asym = (0..n).any(|i| (0..n).any(|j| (w[(i, j)] - w[(j, i)]).abs() > SYMMETRY_TOL));
    if asym {
        out.push(Violation::new(category::GRAPH, "graph must be undirected (symmetric weights)"));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianView {
    pub laplacian: DMatrix<f64>,
    /// Second-smallest eigenvalue; 0 for a single node.
    pub lambda2: f64,
}

/// `L = D − A` and its algebraic connectivity.
pub fn build_laplacian(adj: &Adjacency) -> LaplacianView {
    let n = adj.n();
    let a = adj.weights();
    let mut l = -a.clone();
    for i in 0..n {
        l[(i, i)] = a.row(i).sum();
    }
    let lambda2 = if n < 2 {
        0.0
    } else {
        let mut ev: Vec<f64> = SymmetricEigen::new(l.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev[1].max(0.0)
    };
    LaplacianView {
        laplacian: l,
        lambda2,
    }
}

/// Breadth-first reachability from node 0 over positive-weight edges.
pub fn is_connected(adj: &Adjacency) -> bool {
    let n = adj.n();
    if n <= 1 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for &(j, _) in adj.neighbors(i) {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Rejects graphs that cannot be used for distributed runs.
pub fn require_connected(adj: &Adjacency) -> Result<()> {
    if is_connected(adj) {
        Ok(())
    } else {
        Err(Error::validation(
            category::DISCONNECTED_GRAPH,
            "communication graph is not connected (graph must be undirected and connected)",
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_edge() {
        let a = Adjacency::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let v = build_laplacian(&a);
        assert_eq!(v.laplacian, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        assert!((v.lambda2 - 2.0).abs() < 1e-12);
        assert!(is_connected(&a));
        let e = Adjacency::edgeless(2);
        assert_eq!(build_laplacian(&e).lambda2, 0.0);
        assert!(!is_connected(&e));
    }

    #[test]
    fn five_cycle() {
        let rows = vec![
            vec![0.0, 0.5, 0.0, 0.0, 0.5],
            vec![0.5, 0.0, 0.5, 0.0, 0.0],
            vec![0.0, 0.5, 0.0, 0.5, 0.0],
            vec![0.0, 0.0, 0.5, 0.0, 0.5],
            vec![0.5, 0.0, 0.0, 0.5, 0.0],
        ];
        let a = Adjacency::from_rows(&rows).unwrap();
        assert_eq!(a, Adjacency::topology(Topology::Cycle, 5, 0.5).unwrap());
        let v = build_laplacian(&a);
        assert!((v.lambda2 - (1.0 - (2.0 * PI / 5.0).cos())).abs() < 1e-12);
        assert!(is_connected(&a));
    }

    #[test]
    fn single_node() {
        let a = Adjacency::edgeless(1);
        assert!(is_connected(&a));
        assert!(require_connected(&a).is_ok());
    }

    #[test]
    fn rejects_bad_weights() {
        let asym = Adjacency::from_rows(&[vec![0.0, 1.0], vec![0.5, 0.0]]).unwrap_err();
        assert_eq!(asym.category(), category::GRAPH);
        assert!(Adjacency::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(Adjacency::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(Adjacency::from_rows(&[vec![0.0, 1.0]]).is_err());
        let e = require_connected(&Adjacency::edgeless(3)).unwrap_err();
        assert_eq!(e.category(), category::DISCONNECTED_GRAPH);
    }

    #[test]
    fn named_topologies() {
        // path P_n: λ₂ = 2w(1 − cos(π/n)); complete K_n: λ₂ = n·w
        let p = build_laplacian(&Adjacency::topology(Topology::Path, 4, 1.0).unwrap());
        assert!((p.lambda2 - 2.0 * (1.0 - (PI / 4.0).cos())).abs() < 1e-12);
        let k = build_laplacian(&Adjacency::topology(Topology::Complete, 6, 0.5).unwrap());
        assert!((k.lambda2 - 3.0).abs() < 1e-12);
    }
}
