use std::collections::BTreeMap;
use std::fmt::Write;

use ghcf_core::eval::{read_results_csv, ResultRow};
use ghcf_core::stats::StatsReport;
use ghcf_core::Error;
use log::info;

use super::{ensure_dir, write_text};
use crate::layout::Stage;
use crate::manifest::RunManifest;
use crate::pipeline::Pipeline;

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Markdown tables: mean ± sample std over folds per dataset (best in bold),
/// then the statistical comparison.
pub fn render_report(rows: &[ResultRow], stats: &StatsReport, config_hash: &str) -> String {
    let mut s = String::new();
    let mut datasets: BTreeMap<&str, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        datasets.entry(r.dataset.as_str()).or_default().push(r);
    }
    let _ = writeln!(s, "# Recommendation results\n");
    for (dataset, rows) in &datasets {
        let mut models: Vec<&str> = Vec::new();
        for r in rows {
            if !models.contains(&r.model.as_str()) {
                models.push(&r.model);
            }
        }
        let folds = rows.iter().filter(|r| r.model == models[0]).count();
        let _ = writeln!(s, "## {dataset}\n");
        let _ = writeln!(s, "Mean ± standard deviation over {folds} folds.\n");
        let _ = writeln!(s, "| Model | HR@10 | nDCG@10 | MRR |");
        let _ = writeln!(s, "|---|---|---|---|");
        let cells: Vec<Vec<(f64, f64)>> = models
            .iter()
            .map(|m| {
                let mine: Vec<&&ResultRow> = rows.iter().filter(|r| r.model == *m).collect();
                [
                    mean_std(&mine.iter().map(|r| r.hr10).collect::<Vec<_>>()),
                    mean_std(&mine.iter().map(|r| r.ndcg10).collect::<Vec<_>>()),
                    mean_std(&mine.iter().map(|r| r.mrr).collect::<Vec<_>>()),
                ]
                .to_vec()
            })
            .collect();
        let best: Vec<f64> = (0..3)
            .map(|c| cells.iter().map(|row| row[c].0).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        for (m, row) in models.iter().zip(&cells) {
            let _ = write!(s, "| {m} |");
            for (c, &(mean, sd)) in row.iter().enumerate() {
                let cell = format!("{mean:.4} ± {sd:.4}");
                if mean == best[c] {
                    let _ = write!(s, " **{cell}** |");
                } else {
                    let _ = write!(s, " {cell} |");
                }
            }
            let _ = writeln!(s);
        }
        let _ = writeln!(s);
    }

    let _ = writeln!(s, "## Statistical comparison\n");
    let mode = match stats.mode {
        ghcf_core::stats::BlockMode::Hypervolume => "hypervolume of (HR@10, nDCG@10, MRR) per dataset and fold",
        ghcf_core::stats::BlockMode::PerMetric => "each metric per dataset and fold",
    };
    let _ = writeln!(s, "{} blocks, scored by {mode}.\n", stats.blocks.len());
    match (&stats.friedman, stats.friedman_significant) {
        (Some(f), Some(sig)) => {
            let _ = writeln!(
                s,
                "Friedman χ² = {:.4} (df = {}), p = {:.4e}: {} at α = {}.\n",
                f.statistic,
                f.df,
                f.p_value,
                if sig { "significant" } else { "not significant" },
                stats.nemenyi.alpha
            );
        }
        _ => {
            let _ = writeln!(s, "Friedman test not run.\n");
        }
    }
    let _ = writeln!(
        s,
        "Nemenyi critical difference: {:.4} (q = {:.4}).\n",
        stats.nemenyi.critical_difference, stats.nemenyi.q_alpha
    );
    let _ = writeln!(s, "| Rank | Model | Average rank |");
    let _ = writeln!(s, "|---|---|---|");
    for (i, g) in stats.global_ranking.iter().enumerate() {
        let tie = if g.tied { " (tied)" } else { "" };
        let _ = writeln!(s, "| {} | {} | {:.3}{tie} |", i + 1, g.model, g.average_rank);
    }
    let _ = writeln!(s);
    let sig: Vec<String> = stats
        .nemenyi
        .pairs
        .iter()
        .filter(|p| p.significant)
        .map(|p| format!("{} vs {} (Δ = {:.3})", p.a, p.b, p.rank_difference))
        .collect();
    if sig.is_empty() {
        let _ = writeln!(s, "No pair differs by at least the critical difference.\n");
    } else {
        let _ = writeln!(s, "Pairs differing by at least the critical difference: {}.\n", sig.join(", "));
    }
    let _ = writeln!(s, "![Critical difference diagram](../stats/cd_diagram.svg)\n");
    for note in &stats.notes {
        let _ = writeln!(s, "- {note}");
    }
    if !stats.notes.is_empty() {
        let _ = writeln!(s);
    }
    let _ = writeln!(s, "Config hash: `{config_hash}`");
    s
}

pub fn cmd_report(p: &Pipeline) -> anyhow::Result<RunManifest> {
    let l = &p.layout;
    let eval = p.require_eval()?;
    let compare = p.require_compare(&eval)?;
    let rows = read_results_csv(&l.results_csv())?;
    let path = l.stats_report();
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let stats: StatsReport = serde_json::from_str(&text).map_err(Error::from)?;
    let hash = p.report_hash(&compare.config_hash)?;
    ensure_dir(&l.stage_dir(Stage::Report))?;
    write_text(&l.report_md(), &render_report(&rows, &stats, &hash))?;
    let mut m = RunManifest::new(Stage::Report, &p.cfg.dataset, hash, p.cfg.seed).upstream(Stage::Compare, &compare.config_hash);
    m.record(l, &l.report_md())?;
    m.models = compare.models.clone();
    m.folds = compare.folds.clone();
    m.write(l, Stage::Report)?;
    info!("report: {}", l.report_md().display());
    Ok(m)
}
