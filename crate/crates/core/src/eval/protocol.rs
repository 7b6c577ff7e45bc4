use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::metrics::{rank_of_positive, MetricVector};
use crate::hashing::sha256_hex;
use crate::nn::Matrix;
use crate::rng::{streams, RngStream};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub k: usize,
    pub n_negatives: usize,
    pub seed: u64,
    /// Users scored per call of the scoring function.
    pub chunk: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            k: 10,
            n_negatives: 99,
            seed: 0,
            chunk: 256,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n_negatives == 0 || self.chunk == 0 {
            return Err(Error::Config("k, n_negatives and chunk must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    /// Positive first, then negatives in draw order.
    pub items: Vec<usize>,
    pub positive: usize,
    /// Fewer eligible negatives than requested; all of them were taken.
    pub degraded: bool,
}

impl CandidateSet {
    pub fn hash(&self) -> String {
        let mut sorted = self.items.clone();
        sorted.sort_unstable();
        let bytes: Vec<u8> = sorted.iter().flat_map(|&i| (i as u64).to_le_bytes()).collect();
        sha256_hex(&bytes)[..16].to_string()
    }
}

/// Positive plus `n_negatives` items drawn uniformly without replacement
/// from the items outside `interacted` (sorted), seeded per `(fold, user)`.
pub fn sample_candidates(
    user: usize,
    fold: usize,
    positive: usize,
    interacted: &[usize],
    n_items: usize,
    cfg: &EvalConfig,
    stream: u64,
) -> Result<CandidateSet> {
    if positive >= n_items {
        return Err(Error::InvalidArgument(format!("positive item {positive} outside catalog of {n_items}")));
    }
    let eligible: Vec<usize> = (0..n_items)
        .filter(|&i| i != positive && interacted.binary_search(&i).is_err())
        .collect();
    let mut rng = RngStream::keyed(cfg.seed, stream, &[fold as u64, user as u64]);
    let picks = rng.sample_without_replacement(eligible.len(), cfg.n_negatives);
    let mut items = Vec::with_capacity(picks.len() + 1);
    items.push(positive);
    items.extend(picks.iter().map(|&p| eligible[p]));
    Ok(CandidateSet {
        items,
        positive,
        degraded: eligible.len() < cfg.n_negatives,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRankResult {
    pub user: usize,
    pub rank: usize,
    pub n_candidates: usize,
    pub candidate_hash: String,
}

/// One user to evaluate: the held-out positive and every item the user
/// interacted with in any split (sorted).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalTarget {
    pub user: usize,
    pub positive: usize,
    pub interacted: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldEvaluation {
    pub metrics: MetricVector,
    pub n_users: usize,
    pub degraded_users: usize,
    pub ranks: Vec<UserRankResult>,
    /// rank → number of users.
    pub histogram: BTreeMap<usize, usize>,
}

/// Scores every target with `score` (rows aligned with the user slice it is
/// given) and aggregates ranks into HR@K, nDCG@K and MRR.
pub fn evaluate_users<F>(
    targets: &[EvalTarget],
    n_items: usize,
    fold: usize,
    cfg: &EvalConfig,
    stream: u64,
    mut score: F,
) -> Result<FoldEvaluation>
where
    F: FnMut(&[usize]) -> Result<Matrix>,
{
    cfg.validate()?;
    if targets.is_empty() {
        return Err(Error::InvalidArgument("no users to evaluate".into()));
    }
    let mut ranks = Vec::with_capacity(targets.len());
    let mut degraded = 0;
    for chunk in targets.chunks(cfg.chunk) {
        let users: Vec<usize> = chunk.iter().map(|t| t.user).collect();
        let scores = score(&users)?;
        if scores.rows() != chunk.len() || scores.cols() != n_items {
            return Err(Error::Shape(format!(
                "scorer returned {:?} for {} users over {} items",
                scores.shape(),
                chunk.len(),
                n_items
            )));
        }
        for (row, t) in chunk.iter().enumerate() {
            let cands = sample_candidates(t.user, fold, t.positive, &t.interacted, n_items, cfg, stream)?;
            degraded += cands.degraded as usize;
            let rank = rank_of_positive(scores.row(row), &cands.items, t.positive)?;
            ranks.push(UserRankResult {
                user: t.user,
                rank,
                n_candidates: cands.items.len(),
                candidate_hash: cands.hash(),
            });
        }
    }
    let plain: Vec<usize> = ranks.iter().map(|r| r.rank).collect();
    let mut histogram = BTreeMap::new();
    for &r in &plain {
        *histogram.entry(r).or_insert(0) += 1;
    }
    Ok(FoldEvaluation {
        metrics: MetricVector::from_ranks(&plain, cfg.k)?,
        n_users: plain.len(),
        degraded_users: degraded,
        ranks,
        histogram,
    })
}

/// Stream used for test-set candidates.
pub const TEST_STREAM: u64 = streams::EVAL;
