use serde::{Deserialize, Serialize};

use super::RatingMatrix;

/// Per-user z-score labels.
///
/// `positives` and `disliked` are sorted item indices; items with z exactly 0
/// belong to neither pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledInteractions {
    /// `(item, z)` pairs aligned with the matrix rows.
    pub zscores: Vec<Vec<(usize, f64)>>,
    pub positives: Vec<Vec<usize>>,
    pub disliked: Vec<Vec<usize>>,
}

impl LabeledInteractions {
    pub fn is_positive(&self, user: usize, item: usize) -> bool {
        self.positives[user].binary_search(&item).is_ok()
    }

    pub fn is_disliked(&self, user: usize, item: usize) -> bool {
        self.disliked[user].binary_search(&item).is_ok()
    }
}

// Relative tolerance for treating a spread or deviation as exactly zero.
const DEGENERATE_TOL: f64 = 1e-12;

/// z = (r - mean_u) / std_u with the population standard deviation.
///
/// A constant rater (std 0) has every observed item marked positive.
pub fn zscore_label(matrix: &RatingMatrix) -> LabeledInteractions {
    let mut zscores = Vec::with_capacity(matrix.n_users);
    let mut positives = Vec::with_capacity(matrix.n_users);
    let mut disliked = Vec::with_capacity(matrix.n_users);
    for row in &matrix.rows {
        let n = row.len() as f64;
        let mean = row.iter().map(|e| e.rating).sum::<f64>() / n.max(1.0);
        let var = row.iter().map(|e| (e.rating - mean).powi(2)).sum::<f64>() / n.max(1.0);
        let std = var.sqrt();
        let scale = DEGENERATE_TOL * mean.abs().max(1.0);

        let mut zs = Vec::with_capacity(row.len());
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        if std <= scale {
            for e in row {
                zs.push((e.item, 0.0));
                pos.push(e.item);
            }
        } else {
            for e in row {
                let dev = e.rating - mean;
                let z = if dev.abs() <= scale { 0.0 } else { dev / std };
                zs.push((e.item, z));
                if z > 0.0 {
                    pos.push(e.item);
                } else if z < 0.0 {
                    neg.push(e.item);
                }
            }
        }
        zscores.push(zs);
        positives.push(pos);
        disliked.push(neg);
    }
    LabeledInteractions {
        zscores,
        positives,
        disliked,
    }
}
