use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use crate::{Error, Result};

/// Ranks scores from 1 (highest) to k, averaging the ranks of tied scores.
pub fn rank_block(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.len() < 2 {
        return Err(Error::InvalidArgument("ranking needs at least two models".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("block score".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share the mean of ranks i+1..=j+1
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &m in &order[i..=j] {
            ranks[m] = avg;
        }
        i = j + 1;
    }
    Ok(ranks)
}

/// N blocks × k models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub models: Vec<String>,
    pub blocks: Vec<String>,
    pub ranks: Vec<Vec<f64>>,
}

impl RankTable {
    /// Ranks each block's scores (rows aligned with `blocks`, columns with `models`).
    pub fn from_scores(models: Vec<String>, blocks: Vec<String>, scores: &[Vec<f64>]) -> Result<RankTable> {
        if blocks.len() != scores.len() {
            return Err(Error::Shape(format!("{} block names for {} score rows", blocks.len(), scores.len())));
        }
        let mut ranks = Vec::with_capacity(scores.len());
        for (b, row) in blocks.iter().zip(scores) {
            if row.len() != models.len() {
                return Err(Error::InvalidArgument(format!(
                    "block {b} scores {} models, expected {}",
                    row.len(),
                    models.len()
                )));
            }
            ranks.push(rank_block(row)?);
        }
        Ok(RankTable { models, blocks, ranks })
    }

    pub fn n_blocks(&self) -> usize {
        self.ranks.len()
    }

    pub fn k(&self) -> usize {
        self.models.len()
    }

    pub fn average_ranks(&self) -> Vec<f64> {
        let n = self.n_blocks() as f64;
        (0..self.k())
            .map(|j| self.ranks.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect()
    }
}

/// Survival function of the chi-square distribution.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(df / 2.0, x / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// Divisor applied for ties (1 when there are none).
    pub tie_correction: f64,
    pub n_blocks: usize,
    pub k: usize,
}

/// Friedman χ² with the tie correction `1 − Σ(t³ − t) / (N k (k² − 1))`.
pub fn friedman(table: &RankTable) -> Result<FriedmanResult> {
    let (n, k) = (table.n_blocks(), table.k());
    if n < 2 || k < 3 {
        return Err(Error::InvalidArgument(format!("Friedman needs N >= 2 and k >= 3, got N = {n}, k = {k}")));
    }
    let (nf, kf) = (n as f64, k as f64);
    let centre = (kf + 1.0) / 2.0;
    let spread: f64 = table.average_ranks().iter().map(|r| (r - centre).powi(2)).sum();
    let mut ties = 0.0;
    for row in &table.ranks {
        let mut sorted = row.clone();
        sorted.sort_by(f64::total_cmp);
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            ties += t * t * t - t;
            i = j + 1;
        }
    }
    let correction = 1.0 - ties / (nf * kf * (kf * kf - 1.0));
    let (statistic, p_value) = if correction <= 1e-12 {
        (0.0, 1.0)
    } else {
        let chi = 12.0 * nf / (kf * (kf + 1.0)) * spread / correction;
        (chi, chi_square_sf(chi, kf - 1.0))
    };
    Ok(FriedmanResult {
        statistic,
        df: k - 1,
        p_value,
        tie_correction: correction,
        n_blocks: n,
        k,
    })
}

/// Studentized range quantiles divided by √2 for k = 2..=20.
const Q_05: [f64; 19] = [
    1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.94832, 3.030878, 3.10173, 3.163684, 3.218654, 3.268004,
    3.312739, 3.353618, 3.39123, 3.426041, 3.458425, 3.488685, 3.517073, 3.543799,
];
const Q_10: [f64; 19] = [
    1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732, 2.779884, 2.854606, 2.919889, 2.977768, 3.029694,
    3.076733, 3.119693, 3.159199, 3.195743, 3.229723, 3.261461, 3.291224, 3.319233,
];

pub fn nemenyi_q(k: usize, alpha: f64) -> Result<f64> {
    let table = if (alpha - 0.05).abs() < 1e-12 {
        &Q_05
    } else if (alpha - 0.10).abs() < 1e-12 {
        &Q_10
    } else {
        return Err(Error::InvalidArgument(format!("no Nemenyi constants for alpha = {alpha}")));
    };
    if !(2..=20).contains(&k) {
        return Err(Error::InvalidArgument(format!("no Nemenyi constants for k = {k}")));
    }
    Ok(table[k - 2])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub a: String,
    pub b: String,
    pub rank_difference: f64,
    pub significant: bool,
    /// Two-sided normal-approximation p of the rank difference (approximate).
    pub p_approx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NemenyiResult {
    pub alpha: f64,
    pub q_alpha: f64,
    pub critical_difference: f64,
    pub models: Vec<String>,
    pub average_ranks: Vec<f64>,
    pub pairs: Vec<PairComparison>,
}

/// `CD = q_α·√(k(k+1)/(6N))`; pairs whose average ranks differ by at least CD are significant.
pub fn nemenyi(table: &RankTable, alpha: f64) -> Result<NemenyiResult> {
    let (n, k) = (table.n_blocks(), table.k());
    if n == 0 {
        return Err(Error::InvalidArgument("Nemenyi over an empty table".into()));
    }
    let q = nemenyi_q(k, alpha)?;
    let se = ((k * (k + 1)) as f64 / (6.0 * n as f64)).sqrt();
    let cd = q * se;
    let avg = table.average_ranks();
    let mut pairs = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let diff = (avg[i] - avg[j]).abs();
            pairs.push(PairComparison {
                a: table.models[i].clone(),
                b: table.models[j].clone(),
                rank_difference: diff,
                significant: diff >= cd && diff > 0.0,
                p_approx: erfc(diff / se / std::f64::consts::SQRT_2),
            });
        }
    }
    Ok(NemenyiResult {
        alpha,
        q_alpha: q,
        critical_difference: cd,
        models: table.models.clone(),
        average_ranks: avg,
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalRank {
    pub model: String,
    pub average_rank: f64,
    /// Shares its average rank with another model (order then lexicographic).
    pub tied: bool,
}

/// Models by ascending average rank, ties broken by name and flagged.
pub fn global_average_rank(table: &RankTable) -> Vec<GlobalRank> {
    let avg = table.average_ranks();
    let mut out: Vec<GlobalRank> = table
        .models
        .iter()
        .zip(&avg)
        .map(|(m, &r)| GlobalRank {
            model: m.clone(),
            average_rank: r,
            tied: avg.iter().filter(|&&o| o == r).count() > 1,
        })
        .collect();
    out.sort_by(|a, b| a.average_rank.total_cmp(&b.average_rank).then_with(|| a.model.cmp(&b.model)));
    out
}
