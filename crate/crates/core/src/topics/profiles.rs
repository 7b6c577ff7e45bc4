use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::RatingMatrix;
use crate::{Error, Result};

/// How aggregated profile vectors are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileNorm {
    /// Topic distributions: renormalize to sum to one.
    Simplex,
    /// Raw embeddings: scale to unit Euclidean length.
    L2,
}

/// User and item profiles over a fixed interaction set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profiles {
    pub dim: usize,
    pub users: Vec<Vec<f64>>,
    pub items: Vec<Vec<f64>>,
    /// Owners with no review in the interaction set (given the corpus mean).
    pub user_fallback: Vec<bool>,
    pub item_fallback: Vec<bool>,
}

fn normalize(v: &mut [f64], norm: ProfileNorm) {
    let s = match norm {
        ProfileNorm::Simplex => v.iter().sum::<f64>(),
        ProfileNorm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
    };
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

/// Averages review vectors per user and per item.
///
/// Only reviews whose `(user, item)` pair is present in `matrix` contribute,
/// so passing a fold's train matrix keeps held-out reviews out of the
/// profiles. Owners without reviews receive the normalized corpus mean.
pub fn aggregate_profiles(
    vectors: &[Vec<f64>],
    owners: &[(usize, usize)],
    matrix: &RatingMatrix,
    norm: ProfileNorm,
) -> Result<Profiles> {
    if vectors.len() != owners.len() {
        return Err(Error::Shape(format!("{} vectors for {} reviews", vectors.len(), owners.len())));
    }
    let dim = vectors.first().map_or(0, Vec::len);
    if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::Shape("profile vectors must share a positive width".into()));
    }
    let mut users = vec![vec![0.0; dim]; matrix.n_users];
    let mut items = vec![vec![0.0; dim]; matrix.n_items];
    let mut user_n = vec![0usize; matrix.n_users];
    let mut item_n = vec![0usize; matrix.n_items];
    let mut corpus = vec![0.0; dim];
    let mut used = 0usize;
    for (v, &(u, i)) in vectors.iter().zip(owners) {
        if u >= matrix.n_users || i >= matrix.n_items {
            return Err(Error::InvalidArgument(format!("review owner ({u}, {i}) outside the catalog")));
        }
        if !matrix.contains(u, i) {
            continue;
        }
        used += 1;
        user_n[u] += 1;
        item_n[i] += 1;
        for k in 0..dim {
            users[u][k] += v[k];
            items[i][k] += v[k];
            corpus[k] += v[k];
        }
    }
    if used > 0 {
        corpus.iter_mut().for_each(|x| *x /= used as f64);
    }
    normalize(&mut corpus, norm);

    let finish = |acc: &mut Vec<Vec<f64>>, counts: &[usize]| -> Vec<bool> {
        acc.iter_mut()
            .zip(counts)
            .map(|(v, &n)| {
                if n == 0 {
                    v.copy_from_slice(&corpus);
                    true
                } else {
                    v.iter_mut().for_each(|x| *x /= n as f64);
                    normalize(v, norm);
                    false
                }
            })
            .collect()
    };
    let user_fallback = finish(&mut users, &user_n);
    let item_fallback = finish(&mut items, &item_n);
    Ok(Profiles {
        dim,
        users,
        items,
        user_fallback,
        item_fallback,
    })
}

/// `owner_index,p_1..p_K` CSV.
pub fn write_profiles_csv(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let dim = rows.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["owner_index".to_string()];
    header.extend((1..=dim).map(|k| format!("p_{k}")));
    w.write_record(&header)?;
    for (i, r) in rows.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(r.iter().map(|x| format!("{x:e}")));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_profiles_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for (expected, rec) in r.records().enumerate() {
        let rec = rec?;
        let idx: usize = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| Error::format(path, "bad owner index"))?;
        if idx != expected {
            return Err(Error::format(path, "owner indices must be contiguous"));
        }
        let vals = rec
            .iter()
            .skip(1)
            .map(|s| s.parse::<f64>().map_err(|_| Error::format(path, format!("bad value {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(vals);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Entry;

    fn matrix(rows: &[&[usize]], n_items: usize) -> RatingMatrix {
        RatingMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&item| Entry { item, rating: 1.0, timestamp: 0 }).collect())
                .collect(),
            n_items,
        )
    }

    #[test]
    fn mean_of_one_hots_and_single_review_items() {
        let m = matrix(&[&[0, 1]], 3);
        let vecs = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let p = aggregate_profiles(&vecs, &[(0, 0), (0, 1)], &m, ProfileNorm::Simplex).unwrap();
        assert_eq!(p.users[0], vec![0.5, 0.5, 0.0]);
        assert_eq!(p.items[1], vec![0.0, 1.0, 0.0]);
        assert!(p.item_fallback[2]);
        assert_eq!(p.items[2], vec![0.5, 0.5, 0.0]);
    }

    #[test]
    fn reviews_outside_matrix_are_ignored() {
        let m = matrix(&[&[0], &[]], 2);
        let vecs = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let p = aggregate_profiles(&vecs, &[(0, 0), (1, 1)], &m, ProfileNorm::Simplex).unwrap();
        assert!(p.user_fallback[1]);
        assert_eq!(p.users[1], vec![1.0, 0.0]);
        for v in p.users.iter().chain(&p.items) {
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn l2_profiles_have_unit_norm() {
        let m = matrix(&[&[0, 1]], 2);
        let vecs = vec![vec![3.0, 4.0], vec![1.0, 0.0]];
        let p = aggregate_profiles(&vecs, &[(0, 0), (0, 1)], &m, ProfileNorm::L2).unwrap();
        let n: f64 = p.users[0].iter().map(|x| x * x).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let rows = vec![vec![0.25, 0.75], vec![1.0 / 3.0, 2.0 / 3.0]];
        write_profiles_csv(&path, &rows).unwrap();
        assert_eq!(read_profiles_csv(&path).unwrap(), rows);
    }
}
