use serde::{Deserialize, Serialize};

use crate::nn::Matrix;
use crate::rng::{streams, RngStream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Matrix,
    pub inertia: f64,
    /// Inertia after each assignment step, including the final one.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid (lowest index on ties) and its squared distance.
pub fn nearest(point: &[f64], centroids: &Matrix) -> (usize, f64) {
    (0..centroids.rows()).fold((0, f64::INFINITY), |best, c| {
        let d = sq_dist(point, centroids.row(c));
        if d < best.1 {
            (c, d)
        } else {
            best
        }
    })
}

fn plus_plus_init(points: &Matrix, k: usize, rng: &mut RngStream) -> Matrix {
    let n = points.rows();
    let mut chosen = vec![rng.below(n)];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points.row(i), points.row(chosen[0]))).collect();
    while chosen.len() < k {
        let next = match rng.weighted_index(&d2) {
            Some(i) => i,
            // every point coincides with a chosen centroid
            None => (0..n).find(|i| !chosen.contains(i)).unwrap_or(0),
        };
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(i), points.row(next)));
        }
    }
    Matrix::from_rows(&chosen.iter().map(|&i| points.row(i).to_vec()).collect::<Vec<_>>()).expect("uniform rows")
}

/// Lloyd's algorithm with k-means++ seeding. Empty clusters are re-seeded at
/// the point farthest from its current centroid.
pub fn kmeans(points: &Matrix, cfg: &KMeansConfig) -> Result<KMeansResult> {
    let (n, dim) = points.shape();
    if cfg.k == 0 || cfg.k > n {
        return Err(Error::InvalidArgument(format!("k = {} with {n} points", cfg.k)));
    }
    let mut rng = RngStream::new(cfg.seed, streams::KMEANS);
    let mut centroids = plus_plus_init(points, cfg.k, &mut rng);
    let mut assignments = vec![0; n];
    let mut dists = vec![0.0; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    loop {
        for i in 0..n {
            let (c, d) = nearest(points.row(i), &centroids);
            assignments[i] = c;
            dists[i] = d;
        }
        history.push(dists.iter().sum());
        if iterations == cfg.max_iter {
            break;
        }
        iterations += 1;

        let mut sums = Matrix::zeros(cfg.k, dim);
        let mut counts = vec![0usize; cfg.k];
        for i in 0..n {
            counts[assignments[i]] += 1;
            for (s, x) in sums.row_mut(assignments[i]).iter_mut().zip(points.row(i)) {
                *s += x;
            }
        }
        let mut shift = 0.0f64;
        for c in 0..cfg.k {
            let new: Vec<f64> = if counts[c] > 0 {
                sums.row(c).iter().map(|s| s / counts[c] as f64).collect()
            } else {
                let far = (0..n).max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a))).unwrap();
                dists[far] = 0.0;
                points.row(far).to_vec()
            };
            shift = shift.max(sq_dist(&new, centroids.row(c)).sqrt());
            centroids.row_mut(c).copy_from_slice(&new);
        }
        if shift < cfg.tol {
            for i in 0..n {
                let (c, d) = nearest(points.row(i), &centroids);
                assignments[i] = c;
                dists[i] = d;
            }
            history.push(dists.iter().sum());
            break;
        }
    }
    Ok(KMeansResult {
        inertia: *history.last().unwrap(),
        assignments,
        centroids,
        inertia_history: history,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k: usize, seed: u64) -> KMeansConfig {
        KMeansConfig {
            k,
            seed,
            max_iter: 100,
            tol: 1e-9,
        }
    }

    #[test]
    fn separated_pairs() {
        let pts = Matrix::from_rows(&[vec![0., 0.], vec![0., 1.], vec![10., 10.], vec![10., 11.]]).unwrap();
        let r = kmeans(&pts, &cfg(2, 3)).unwrap();
        let mut cs: Vec<Vec<f64>> = (0..2).map(|c| r.centroids.row(c).to_vec()).collect();
        cs.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(cs, vec![vec![0., 0.5], vec![10., 10.5]]);
        assert!((r.inertia - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k_equal_n_has_zero_inertia() {
        let mut rng = RngStream::new(4, 0);
        let pts = Matrix::from_fn(12, 3, |_, _| rng.normal());
        assert_eq!(kmeans(&pts, &cfg(12, 1)).unwrap().inertia, 0.0);
        assert!(kmeans(&pts, &cfg(13, 1)).is_err());
    }

    #[test]
    fn seeded_runs_match_and_inertia_is_monotone() {
        let mut rng = RngStream::new(5, 0);
        let pts = Matrix::from_fn(300, 4, |i, _| (i % 5) as f64 * 2.0 + rng.normal());
        let a = kmeans(&pts, &cfg(7, 9)).unwrap();
        let b = kmeans(&pts, &cfg(7, 9)).unwrap();
        assert_eq!(a, b);
        for w in a.inertia_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-9 * w[0].abs(), "{w:?}");
        }
    }
}
