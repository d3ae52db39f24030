//! Kernel baselines and evaluation: Gram matrices with a PSD check, a
//! one-vs-rest logistic classifier on normalized feature maps, stratified
//! folds and the cross-validation harness shared with the network.

mod cv;
mod logreg;

use crate::error::{Error, Result};
use crate::features::{FeatureKind, SparseRow};

pub use cv::{
    cross_validate, stratified_kfold, CvReport, CvResult, DeepMapPipeline, FoldPipeline, FoldPlan,
    KernelPipeline,
};
pub use logreg::{logistic_loss_and_gradient, logreg_predict, logreg_train, LogRegConfig, LogisticModel};

/// Sparse real vector, indices ascending.
pub type SparseVec = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub n: usize,
    /// Row-major `n x n`.
    pub values: Vec<f64>,
    pub kind: Option<FeatureKind>,
}

impl GramMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::argument(format!("{} values for a {n}x{n} matrix", values.len())));
        }
        Ok(GramMatrix { n, values, kind: None })
    }
}

fn finish(n: usize, exact: Vec<u128>) -> GramMatrix {
    GramMatrix {
        n,
        values: exact.into_iter().map(|x| x as f64).collect(),
        kind: None,
    }
}

/// Gram matrix of dense count vectors, accumulated exactly in `u128`.
pub fn gram_matrix(vectors: &[Vec<u64>]) -> Result<GramMatrix> {
    let n = vectors.len();
    if let Some(first) = vectors.first() {
        if let Some((i, v)) = vectors.iter().enumerate().find(|(_, v)| v.len() != first.len()) {
            return Err(Error::integrity(format!(
                "vector {i} has dimension {}, expected {}",
                v.len(),
                first.len()
            )));
        }
    }
    let mut exact = vec![0u128; n * n];
    for i in 0..n {
        for j in i..n {
            let dot = vectors[i]
                .iter()
                .zip(&vectors[j])
                .map(|(&a, &b)| u128::from(a) * u128::from(b))
                .sum();
            exact[i * n + j] = dot;
            exact[j * n + i] = dot;
        }
    }
    Ok(finish(n, exact))
}

/// Gram matrix of sparse count vectors in a space of `dimension` columns.
pub fn gram_matrix_sparse(vectors: &[SparseRow], dimension: usize) -> Result<GramMatrix> {
    if let Some(i) = vectors
        .iter()
        .position(|v| v.iter().any(|&(c, _)| c >= dimension))
    {
        return Err(Error::integrity(format!("vector {i} has a column >= {dimension}")));
    }
    let n = vectors.len();
    let mut exact = vec![0u128; n * n];
    for i in 0..n {
        for j in i..n {
            let (a, b) = (&vectors[i], &vectors[j]);
            let (mut x, mut y, mut dot) = (0, 0, 0u128);
            while x < a.len() && y < b.len() {
                match a[x].0.cmp(&b[y].0) {
                    std::cmp::Ordering::Less => x += 1,
                    std::cmp::Ordering::Greater => y += 1,
                    std::cmp::Ordering::Equal => {
                        dot += u128::from(a[x].1) * u128::from(b[y].1);
                        x += 1;
                        y += 1;
                    }
                }
            }
            exact[i * n + j] = dot;
            exact[j * n + i] = dot;
        }
    }
    Ok(finish(n, exact))
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
/// ascending. Stops once the off-diagonal Frobenius norm is below
/// `tol * ||K||_F`, which bounds the absolute eigenvalue error.
pub fn eigenvalues(k: &GramMatrix, tol: f64) -> Result<Vec<f64>> {
    let n = k.n;
    for i in 0..n {
        for j in (i + 1)..n {
            if (k.get(i, j) - k.get(j, i)).abs() > 1e-9 {
                return Err(Error::argument(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    let mut a = k.values.clone();
    let frobenius = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let off = |a: &[f64]| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    for _sweep in 0..100 {
        if off(&a) <= tol * frobenius {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let (rp, rq) = (a[r * n + p], a[r * n + q]);
                    a[r * n + p] = c * rp - s * rq;
                    a[r * n + q] = s * rp + c * rq;
                }
                for r in 0..n {
                    let (pr, qr) = (a[p * n + r], a[q * n + r]);
                    a[p * n + r] = c * pr - s * qr;
                    a[q * n + r] = s * pr + c * qr;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

pub fn min_eigenvalue(k: &GramMatrix, tol: f64) -> Result<f64> {
    Ok(eigenvalues(k, tol)?.first().copied().unwrap_or(0.0))
}

/// Unit-L2 scaling; zero vectors stay zero.
pub fn normalize_features(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    vectors
        .iter()
        .map(|v| {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                v.clone()
            } else {
                v.iter().map(|x| x / norm).collect()
            }
        })
        .collect()
}

pub fn normalize_sparse(v: &SparseRow) -> SparseVec {
    let norm = v.iter().map(|&(_, x)| (x as f64) * (x as f64)).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Vec::new();
    }
    v.iter().map(|&(c, x)| (c, x as f64 / norm)).collect()
}
