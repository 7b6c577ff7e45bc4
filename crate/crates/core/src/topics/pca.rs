use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::EmbeddingMatrix;
use crate::nn::Matrix;
use crate::{Error, Result};

/// Mean-centered projection onto the leading principal directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub mean: Vec<f64>,
    /// d × r, orthonormal columns.
    pub components: Matrix,
    /// All d covariance eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
}

impl Projection {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn reduced_dim(&self) -> usize {
        self.components.cols()
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        let r = self.reduced_dim();
        let mut out = vec![0.0; r];
        for (j, (&x, &m)) in row.iter().zip(&self.mean).enumerate() {
            let c = x - m;
            for (k, o) in out.iter_mut().enumerate() {
                *o += c * self.components.get(j, k);
            }
        }
        out
    }

    pub fn transform(&self, data: &Matrix) -> Matrix {
        let rows: Vec<Vec<f64>> = (0..data.rows()).map(|i| self.transform_row(data.row(i))).collect();
        Matrix::from_rows(&rows).unwrap_or_else(|_| Matrix::zeros(0, self.reduced_dim()))
    }

    pub fn reconstruct_row(&self, reduced: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|j| self.mean[j] + (0..self.reduced_dim()).map(|k| self.components.get(j, k) * reduced[k]).sum::<f64>())
            .collect()
    }

    /// Mean squared reconstruction error per row.
    pub fn reconstruction_error(&self, data: &Matrix) -> f64 {
        let n = data.rows().max(1) as f64;
        (0..data.rows())
            .map(|i| {
                let back = self.reconstruct_row(&self.transform_row(data.row(i)));
                back.iter().zip(data.row(i)).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
            })
            .sum::<f64>()
            / n
    }
}

pub fn embeddings_to_matrix(e: &EmbeddingMatrix) -> Matrix {
    Matrix::new(e.n_rows, e.dim, e.data.iter().map(|&x| x as f64).collect()).expect("consistent embedding shape")
}

/// PCA with population covariance. Component signs are fixed so the
/// largest-magnitude loading of each direction is positive.
pub fn fit_pca(data: &Matrix, r: usize) -> Result<Projection> {
    let (n, d) = data.shape();
    if r == 0 || r > n.min(d) {
        return Err(Error::InvalidArgument(format!(
            "reduced dimension {r} outside 1..={}",
            n.min(d)
        )));
    }
    let mut mean = vec![0.0; d];
    for i in 0..n {
        for (m, x) in mean.iter_mut().zip(data.row(i)) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut cov = DMatrix::<f64>::zeros(d, d);
    for i in 0..n {
        let c: Vec<f64> = data.row(i).iter().zip(&mean).map(|(x, m)| x - m).collect();
        for a in 0..d {
            for b in a..d {
                cov[(a, b)] += c[a] * c[b];
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let v = cov[(a, b)] / n as f64;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let total: f64 = eigenvalues.iter().sum();

    let mut components = Matrix::zeros(d, r);
    for (k, &src) in order.iter().take(r).enumerate() {
        let col = eig.eigenvectors.column(src);
        let pivot = col.iter().fold(0.0f64, |best, &x| if x.abs() > best.abs() { x } else { best });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for j in 0..d {
            components.set(j, k, sign * col[j]);
        }
    }
    let explained_variance_ratio = eigenvalues
        .iter()
        .take(r)
        .map(|l| if total > 0.0 { l / total } else { 0.0 })
        .collect();
    Ok(Projection {
        mean,
        components,
        eigenvalues,
        explained_variance_ratio,
    })
}

/// Reduces embeddings to `r` dimensions, returning the projected rows.
pub fn reduce(embeddings: &EmbeddingMatrix, r: usize) -> Result<(Matrix, Projection)> {
    let data = embeddings_to_matrix(embeddings);
    let proj = fit_pca(&data, r)?;
    Ok((proj.transform(&data), proj))
}
