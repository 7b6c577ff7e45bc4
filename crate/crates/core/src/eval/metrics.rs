use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub hr: f64,
    pub ndcg: f64,
    pub mrr: f64,
}

impl MetricVector {
    pub fn from_ranks(ranks: &[usize], k: usize) -> Result<Self> {
        Ok(MetricVector {
            hr: hr_at_k(ranks, k)?,
            ndcg: ndcg_at_k(ranks, k)?,
            mrr: mrr(ranks)?,
        })
    }
}

/// Pessimistic rank: every candidate scoring at least as high as the
/// positive is placed ahead of it.
pub fn rank_of_positive(scores: &[f64], candidates: &[usize], positive: usize) -> Result<usize> {
    if !candidates.contains(&positive) {
        return Err(Error::InvalidArgument(format!("positive item {positive} is not a candidate")));
    }
    let s = *scores
        .get(positive)
        .ok_or_else(|| Error::Shape(format!("no score for item {positive}")))?;
    let mut rank = 1;
    for &c in candidates {
        if c == positive {
            continue;
        }
        let sc = *scores.get(c).ok_or_else(|| Error::Shape(format!("no score for item {c}")))?;
        if sc >= s {
            rank += 1;
        }
    }
    Ok(rank)
}

fn non_empty(ranks: &[usize]) -> Result<()> {
    if ranks.is_empty() {
        return Err(Error::InvalidArgument("metric over an empty rank list".into()));
    }
    if ranks.contains(&0) {
        return Err(Error::InvalidArgument("ranks start at 1".into()));
    }
    Ok(())
}

pub fn hr_at_k(ranks: &[usize], k: usize) -> Result<f64> {
    non_empty(ranks)?;
    Ok(ranks.iter().filter(|&&r| r <= k).count() as f64 / ranks.len() as f64)
}

pub fn ndcg_at_k(ranks: &[usize], k: usize) -> Result<f64> {
    non_empty(ranks)?;
    let total: f64 = ranks
        .iter()
        .filter(|&&r| r <= k)
        .map(|&r| 1.0 / ((r + 1) as f64).log2())
        .sum();
    Ok(total / ranks.len() as f64)
}

/// Mean reciprocal rank without cutoff.
pub fn mrr(ranks: &[usize]) -> Result<f64> {
    non_empty(ranks)?;
    Ok(ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / ranks.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        let cands: Vec<usize> = (0..5).collect();
        assert_eq!(rank_of_positive(&[0.9, 0.1, 0.2, 0.3, 0.4], &cands, 0).unwrap(), 1);
        assert_eq!(rank_of_positive(&[0.5, 0.5, 0.5, 0.5, 0.1], &cands, 0).unwrap(), 4);
        assert_eq!(rank_of_positive(&[0.0, 0.1, 0.2, 0.3, 0.4], &cands, 0).unwrap(), 5);
        assert!(rank_of_positive(&[0.0; 5], &[1, 2], 0).is_err());
    }

    #[test]
    fn metric_examples() {
        assert!((hr_at_k(&[1, 5, 20], 10).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(hr_at_k(&[1, 1], 10).unwrap(), 1.0);
        assert_eq!(hr_at_k(&[3, 7], 7).unwrap(), 1.0);
        assert_eq!(ndcg_at_k(&[1], 10).unwrap(), 1.0);
        assert_eq!(ndcg_at_k(&[3], 10).unwrap(), 0.5);
        assert_eq!(ndcg_at_k(&[1, 3], 10).unwrap(), 0.75);
        assert!((mrr(&[1, 2, 4]).unwrap() - 1.75 / 3.0).abs() < 1e-15);
        assert_eq!(mrr(&[1, 1]).unwrap(), 1.0);
        assert_eq!(mrr(&[100]).unwrap(), 0.01);
        assert!(hr_at_k(&[], 10).is_err());
        assert!(mrr(&[]).is_err());
    }

    #[test]
    fn monotone_in_k() {
        let ranks = [1, 2, 3, 5, 8, 13, 21, 40, 99];
        for k in 1..20 {
            assert!(hr_at_k(&ranks, k + 1).unwrap() >= hr_at_k(&ranks, k).unwrap());
            assert!(ndcg_at_k(&ranks, k + 1).unwrap() >= ndcg_at_k(&ranks, k).unwrap());
        }
    }
}
