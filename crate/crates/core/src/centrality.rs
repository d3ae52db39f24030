//! Eigenvector centrality by power iteration.

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityVector {
    pub scores: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
}

impl CentralityVector {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Vertex indices sorted by descending score, ties by ascending index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        order.sort_by(|&a, &b| self.compare(a, b));
        order
    }

    /// Total order used everywhere vertices are ranked: higher score first,
    /// then lower index.
    pub fn compare(&self, a: usize, b: usize) -> std::cmp::Ordering {
        self.scores[b]
            .total_cmp(&self.scores[a])
            .then(a.cmp(&b))
    }
}

/// Dominant eigenvector of the adjacency matrix, L2-normalized.
///
/// Iterates `x <- (A + I) x / |(A + I) x|` from the uniform vector. The shift
/// leaves the eigenvectors unchanged but keeps bipartite graphs (paths, stars,
/// even cycles) from oscillating between the `+lambda` and `-lambda`
/// eigenvectors. An iterate is accepted once the L1 change to the next one is
/// below `n * tol` and its eigen-residual `|A x - (x'A x) x|` is below `tol`.
pub fn eigenvector_centrality(g: &Graph, tol: f64, max_iter: usize) -> Result<CentralityVector> {
    let n = g.num_vertices();
    if n == 0 {
        return Err(Error::argument("centrality of an empty graph"));
    }
    if !(tol > 0.0) {
        return Err(Error::argument(format!("tolerance {tol} must be positive")));
    }
    let uniform = 1.0 / (n as f64).sqrt();
    let mut x = vec![uniform; n];
    if g.num_edges() == 0 {
        return Ok(CentralityVector {
            scores: x,
            iterations_used: 0,
            converged: true,
        });
    }

    let mut next = vec![0.0; n];
    for iteration in 1..=max_iter {
        for (v, slot) in next.iter_mut().enumerate() {
            *slot = x[v] + g.neighbors(v).iter().map(|&u| x[u]).sum::<f64>();
        }
        // next - x is A x here.
        let rayleigh: f64 = next.iter().zip(&x).map(|(y, xv)| (y - xv) * xv).sum();
        let residual = next
            .iter()
            .zip(&x)
            .map(|(y, xv)| (y - xv - rayleigh * xv).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm = next.iter().map(|s| s * s).sum::<f64>().sqrt();
        next.iter_mut().for_each(|s| *s /= norm);
        let change: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        if change < n as f64 * tol && residual < tol {
            return Ok(CentralityVector {
                scores: x,
                iterations_used: iteration,
                converged: true,
            });
        }
        std::mem::swap(&mut x, &mut next);
    }
    Ok(CentralityVector {
        scores: x,
        iterations_used: max_iter,
        converged: false,
    })
}

pub fn eigenvector_centrality_default(g: &Graph) -> CentralityVector {
    eigenvector_centrality(g, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER)
        .expect("non-empty graph and positive tolerance")
}
