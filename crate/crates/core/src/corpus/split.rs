use serde::{Deserialize, Serialize};

use super::{Entry, RatingMatrix};
use crate::rng::{streams, RngStream};
use crate::{Error, Result};

/// Size of the most-recent tier sampled from by folds after the first.
pub const DEFAULT_TIER: usize = 3;

/// One leave-one-out fold.
///
/// `test_item[u]` and `valid_item[u]` are `None` for users excluded from the
/// split (fewer than three interactions); their train row is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub fold_id: usize,
    pub seed: u64,
    pub test_item: Vec<Option<usize>>,
    pub valid_item: Vec<Option<usize>>,
    pub train: RatingMatrix,
}

impl FoldSplit {
    pub fn eligible_users(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.test_item.len()).filter(|&u| self.test_item[u].is_some())
    }

    pub fn n_eligible(&self) -> usize {
        self.test_item.iter().filter(|t| t.is_some()).count()
    }

    pub fn manifest(&self) -> SplitManifestFold {
        SplitManifestFold {
            fold_id: self.fold_id,
            seed: self.seed,
            users: self
                .eligible_users()
                .map(|u| SplitUser {
                    user: u,
                    test: self.test_item[u].unwrap(),
                    valid: self.valid_item[u].unwrap(),
                })
                .collect(),
        }
    }

    /// Rebuilds a fold from its manifest entry and the full matrix.
    pub fn from_manifest(fold: &SplitManifestFold, matrix: &RatingMatrix) -> Result<Self> {
        let mut test_item = vec![None; matrix.n_users];
        let mut valid_item = vec![None; matrix.n_users];
        for su in &fold.users {
            if su.user >= matrix.n_users || !matrix.contains(su.user, su.test) || !matrix.contains(su.user, su.valid) {
                return Err(Error::InvalidArgument(format!(
                    "split manifest fold {} references an interaction absent from the corpus (user {})",
                    fold.fold_id, su.user
                )));
            }
            test_item[su.user] = Some(su.test);
            valid_item[su.user] = Some(su.valid);
        }
        let rows = (0..matrix.n_users)
            .map(|u| match (test_item[u], valid_item[u]) {
                (Some(t), Some(v)) => matrix.rows[u].iter().copied().filter(|e| e.item != t && e.item != v).collect(),
                _ => Vec::new(),
            })
            .collect();
        Ok(FoldSplit {
            fold_id: fold.fold_id,
            seed: fold.seed,
            test_item,
            valid_item,
            train: RatingMatrix::from_rows(rows, matrix.n_items),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitUser {
    pub user: usize,
    pub test: usize,
    pub valid: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifestFold {
    pub fold_id: usize,
    pub seed: u64,
    pub users: Vec<SplitUser>,
}

/// JSON split manifest written next to the canonical corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub tier: usize,
    pub excluded_users: Vec<usize>,
    pub folds: Vec<SplitManifestFold>,
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub folds: Vec<FoldSplit>,
    pub excluded_users: Vec<usize>,
}

impl SplitResult {
    pub fn manifest(&self, seed: u64, tier: usize) -> SplitManifest {
        SplitManifest {
            seed,
            tier,
            excluded_users: self.excluded_users.clone(),
            folds: self.folds.iter().map(FoldSplit::manifest).collect(),
        }
    }
}

/// Leave-one-out splits by recency.
///
/// Fold 0 holds out each user's most recent interaction for test and the
/// second most recent for validation (timestamp ties broken by larger item
/// index). Later folds draw test and validation items from the user's `tier`
/// most recent interactions with a stream keyed by `(seed, fold, user)`.
pub fn loo_split(matrix: &RatingMatrix, n_folds: usize, seed: u64, tier: usize) -> Result<SplitResult> {
    if n_folds == 0 {
        return Err(Error::InvalidArgument("n_folds must be >= 1".into()));
    }
    if tier < 2 {
        return Err(Error::InvalidArgument("recency tier must be >= 2".into()));
    }
    let excluded_users: Vec<usize> = (0..matrix.n_users).filter(|&u| matrix.rows[u].len() < 3).collect();

    let recency: Vec<Vec<Entry>> = matrix
        .rows
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.sort_by(|a, b| b.timestamp.cmp(&a.timestamp).then(b.item.cmp(&a.item)));
            r
        })
        .collect();

    let folds = (0..n_folds)
        .map(|fold_id| {
            let mut test_item = vec![None; matrix.n_users];
            let mut valid_item = vec![None; matrix.n_users];
            let mut rows = Vec::with_capacity(matrix.n_users);
            for (u, recent) in recency.iter().enumerate() {
                if recent.len() < 3 {
                    rows.push(Vec::new());
                    continue;
                }
                let (t, v) = if fold_id == 0 {
                    (recent[0].item, recent[1].item)
                } else {
                    let width = tier.min(recent.len() - 1);
                    let mut rng = RngStream::keyed(seed, streams::SPLIT, &[fold_id as u64, u as u64]);
                    let pick = rng.sample_without_replacement(width, 2);
                    (recent[pick[0]].item, recent[pick[1]].item)
                };
                test_item[u] = Some(t);
                valid_item[u] = Some(v);
                rows.push(matrix.rows[u].iter().copied().filter(|e| e.item != t && e.item != v).collect());
            }
            FoldSplit {
                fold_id,
                seed,
                test_item,
                valid_item,
                train: RatingMatrix::from_rows(rows, matrix.n_items),
            }
        })
        .collect();
    Ok(SplitResult { folds, excluded_users })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix_from(rows: &[&[(usize, i64)]], n_items: usize) -> RatingMatrix {
        RatingMatrix::from_rows(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|&(item, timestamp)| Entry {
                            item,
                            rating: 3.0,
                            timestamp,
                        })
                        .collect()
                })
                .collect(),
            n_items,
        )
    }

    #[test]
    fn recency_rule_on_fold_zero() {
        // items a=0,b=1,c=2 at timestamps 1,2,3
        let m = matrix_from(&[&[(0, 1), (1, 2), (2, 3)]], 3);
        let s = loo_split(&m, 1, 0, DEFAULT_TIER).unwrap();
        let f = &s.folds[0];
        assert_eq!(f.test_item[0], Some(2));
        assert_eq!(f.valid_item[0], Some(1));
        assert_eq!(f.train.rows[0].iter().map(|e| e.item).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn short_users_are_excluded() {
        let m = matrix_from(&[&[(0, 1), (1, 2)], &[(0, 1), (1, 2), (2, 3)]], 3);
        let s = loo_split(&m, 2, 9, DEFAULT_TIER).unwrap();
        assert_eq!(s.excluded_users, vec![0]);
        for f in &s.folds {
            assert_eq!(f.test_item[0], None);
            assert!(f.train.rows[0].is_empty());
            assert_eq!(f.n_eligible(), 1);
        }
    }

    #[test]
    fn deterministic_and_disjoint() {
        let rows: Vec<Vec<(usize, i64)>> = (0..40)
            .map(|u| (0..12).map(|j| ((u * 7 + j * 3) % 50, (j * 13 % 12) as i64)).collect())
            .collect();
        let refs: Vec<&[(usize, i64)]> = rows.iter().map(Vec::as_slice).collect();
        let m = matrix_from(&refs, 50);
        let a = loo_split(&m, 5, 11, DEFAULT_TIER).unwrap();
        let b = loo_split(&m, 5, 11, DEFAULT_TIER).unwrap();
        assert_eq!(
            serde_json::to_vec(&a.manifest(11, 3)).unwrap(),
            serde_json::to_vec(&b.manifest(11, 3)).unwrap()
        );
        for f in &a.folds {
            for u in f.eligible_users() {
                let (t, v) = (f.test_item[u].unwrap(), f.valid_item[u].unwrap());
                assert_ne!(t, v);
                assert!(!f.train.contains(u, t) && !f.train.contains(u, v));
                assert_eq!(f.train.rows[u].len() + 2, m.rows[u].len());
            }
            let rebuilt = FoldSplit::from_manifest(&f.manifest(), &m).unwrap();
            assert_eq!(&rebuilt, f);
        }
        // later folds differ from fold 0 for at least one user
        assert!(a.folds[1..].iter().any(|f| f.test_item != a.folds[0].test_item));
    }

    #[test]
    fn zero_folds_rejected() {
        let m = matrix_from(&[&[(0, 1), (1, 2), (2, 3)]], 3);
        assert!(loo_split(&m, 0, 0, DEFAULT_TIER).is_err());
    }
}
