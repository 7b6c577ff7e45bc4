use ghcf_core::eval::read_results_csv;
use ghcf_core::stats::{compare, write_rank_heatmap_csv, write_ranks_csv};
use log::info;
use serde_json::json;

use super::{ensure_dir, write_json, write_text};
use crate::layout::Stage;
use crate::manifest::RunManifest;
use crate::pipeline::Pipeline;

/// Ranks the models per block, runs Friedman and Nemenyi, and draws the CD diagram.
pub fn cmd_compare(p: &Pipeline) -> anyhow::Result<RunManifest> {
    let l = &p.layout;
    let eval = p.require_eval()?;
    let rows = read_results_csv(&l.results_csv())?;
    let c = compare(&rows, p.cfg.compare.mode, p.cfg.compare.alpha)?;

    ensure_dir(&l.stage_dir(Stage::Compare))?;
    write_ranks_csv(&l.ranks_csv(), &c.table)?;
    write_json(&l.stats_report(), &c.report)?;
    write_json(&l.cd_diagram_json(), &c.diagram)?;
    write_text(&l.cd_diagram_svg(), &c.diagram.to_svg())?;
    write_rank_heatmap_csv(&l.rank_heatmap(), &c.table)?;

    let mut m = RunManifest::new(Stage::Compare, &p.cfg.dataset, p.compare_hash(&eval.config_hash)?, p.cfg.seed)
        .upstream(Stage::Eval, &eval.config_hash);
    for path in [l.ranks_csv(), l.stats_report(), l.cd_diagram_json(), l.cd_diagram_svg(), l.rank_heatmap()] {
        m.record(l, &path)?;
    }
    m.models = c.report.models.clone();
    m.folds = eval.folds.clone();
    m.summary = json!({
        "blocks": c.table.n_blocks(),
        "friedman_p": c.report.friedman.as_ref().map(|f| f.p_value),
        "critical_difference": c.report.nemenyi.critical_difference,
    });
    m.write(l, Stage::Compare)?;
    let best = &c.report.global_ranking[0];
    info!(
        "compare: {} blocks, best average rank {} ({:.3}), CD {:.3}",
        c.table.n_blocks(),
        best.model,
        best.average_rank,
        c.report.nemenyi.critical_difference
    );
    Ok(m)
}
