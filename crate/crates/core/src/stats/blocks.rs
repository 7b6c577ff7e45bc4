use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::diagram::{cd_diagram, CdDiagram};
use super::hypervolume::hypervolume;
use super::ranking::{friedman, global_average_rank, nemenyi, FriedmanResult, GlobalRank, NemenyiResult, RankTable};
use crate::eval::ResultRow;
use crate::{Error, Result};

/// How result rows are grouped into ranking blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockMode {
    /// dataset × fold, each model scored by the hypervolume of its
    /// (HR@10, nDCG@10, MRR) points against the origin.
    Hypervolume,
    /// dataset × fold × metric, each model scored by the metric (mean over seeds).
    PerMetric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Blocks {
    pub models: Vec<String>,
    pub names: Vec<String>,
    /// Rows aligned with `names`, columns with `models`.
    pub scores: Vec<Vec<f64>>,
}

// (dataset, fold) -> model -> metric triples.
type Grouped = BTreeMap<(String, usize), BTreeMap<String, Vec<[f64; 3]>>>;

pub fn build_blocks(rows: &[ResultRow], mode: BlockMode) -> Result<Blocks> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no result rows".into()));
    }
    let models: Vec<String> = rows.iter().map(|r| r.model.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let mut grouped: Grouped = BTreeMap::new();
    for r in rows {
        for v in [r.hr10, r.ndcg10, r.mrr] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument(format!("{} fold {}: metric {v} is not a finite non-negative score", r.model, r.fold)));
            }
        }
        grouped
            .entry((r.dataset.clone(), r.fold))
            .or_default()
            .entry(r.model.clone())
            .or_default()
            .push([r.hr10, r.ndcg10, r.mrr]);
    }
    let mut names = Vec::new();
    let mut scores = Vec::new();
    for ((dataset, fold), per_model) in &grouped {
        let missing: Vec<&String> = models.iter().filter(|m| !per_model.contains_key(*m)).collect();
        if !missing.is_empty() {
            return Err(Error::InvalidArgument(format!("block {dataset}/fold{fold} lacks models {missing:?}")));
        }
        match mode {
            BlockMode::Hypervolume => {
                names.push(format!("{dataset}/fold{fold}"));
                let row = models
                    .iter()
                    .map(|m| {
                        let pts: Vec<Vec<f64>> = per_model[m].iter().map(|p| p.to_vec()).collect();
                        hypervolume(&pts, &[0.0; 3])
                    })
                    .collect::<Result<Vec<_>>>()?;
                scores.push(row);
            }
            BlockMode::PerMetric => {
                for (mi, metric) in ["hr@10", "ndcg@10", "mrr"].iter().enumerate() {
                    names.push(format!("{dataset}/fold{fold}/{metric}"));
                    scores.push(
                        models
                            .iter()
                            .map(|m| {
                                let v = &per_model[m];
                                v.iter().map(|p| p[mi]).sum::<f64>() / v.len() as f64
                            })
                            .collect(),
                    );
                }
            }
        }
    }
    Ok(Blocks { models, names, scores })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub mode: BlockMode,
    pub models: Vec<String>,
    pub blocks: Vec<String>,
    pub block_scores: Vec<Vec<f64>>,
    pub friedman: Option<FriedmanResult>,
    pub friedman_significant: Option<bool>,
    pub nemenyi: NemenyiResult,
    pub global_ranking: Vec<GlobalRank>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub table: RankTable,
    pub report: StatsReport,
    pub diagram: CdDiagram,
}

/// Blocks, ranks, Friedman, Nemenyi and the CD diagram for a results table.
pub fn compare(rows: &[ResultRow], mode: BlockMode, alpha: f64) -> Result<Comparison> {
    let blocks = build_blocks(rows, mode)?;
    let table = RankTable::from_scores(blocks.models.clone(), blocks.names.clone(), &blocks.scores)?;
    let mut notes = Vec::new();
    let fr = if table.k() >= 3 && table.n_blocks() >= 2 {
        Some(friedman(&table)?)
    } else {
        notes.push(format!(
            "Friedman test skipped: needs k >= 3 and N >= 2 (k = {}, N = {})",
            table.k(),
            table.n_blocks()
        ));
        None
    };
    let significant = fr.as_ref().map(|f| f.p_value < alpha);
    if significant == Some(false) {
        notes.push("Friedman test not significant; Nemenyi comparisons reported for completeness".into());
    }
    let nm = nemenyi(&table, alpha)?;
    notes.push("pairwise p_approx values use a normal approximation".into());
    let global = global_average_rank(&table);
    if global.iter().any(|g| g.tied) {
        notes.push("tied average ranks are ordered by model name".into());
    }
    let diagram = cd_diagram(&nm);
    Ok(Comparison {
        report: StatsReport {
            mode,
            models: table.models.clone(),
            blocks: table.blocks.clone(),
            block_scores: blocks.scores,
            friedman: fr,
            friedman_significant: significant,
            nemenyi: nm,
            global_ranking: global,
            notes,
        },
        table,
        diagram,
    })
}

/// `block,<model…>` rank matrix.
pub fn write_ranks_csv(path: &Path, table: &RankTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
    let mut header = vec!["block".to_string()];
    header.extend(table.models.iter().cloned());
    w.write_record(&header)?;
    for (b, row) in table.blocks.iter().zip(&table.ranks) {
        let mut rec = vec![b.clone()];
        rec.extend(row.iter().map(|r| r.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Model × block rank grid with the average rank, ordered best first.
pub fn write_rank_heatmap_csv(path: &Path, table: &RankTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
    let mut header = vec!["model".to_string(), "average_rank".to_string()];
    header.extend(table.blocks.iter().cloned());
    w.write_record(&header)?;
    for g in global_average_rank(table) {
        let j = table.models.iter().position(|m| *m == g.model).unwrap();
        let mut rec = vec![g.model.clone(), g.average_rank.to_string()];
        rec.extend(table.ranks.iter().map(|row| row[j].to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
