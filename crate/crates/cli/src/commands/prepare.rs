use ghcf_core::corpus::{
    clean_corpus, filter_min_interactions, ingest, loo_split, write_jsonl, Catalog, CleanRules, FieldMap, InputFormat,
};
use ghcf_core::Error;
use log::info;
use serde_json::json;

use super::{ensure_dir, write_json};
use crate::config::Source;
use crate::layout::Stage;
use crate::manifest::RunManifest;
use crate::pipeline::Pipeline;

/// Ingest, clean, filter and split into the canonical corpus.
///
/// Cleaning runs before the min-interaction filter, so users who lose
/// flagged reviews can fall below the threshold.
pub fn cmd_prepare(p: &Pipeline) -> anyhow::Result<RunManifest> {
    let l = &p.layout;
    let cfg = &p.cfg.prepare;
    let digest = p.source_digest()?;
    let report = match &p.cfg.source {
        Source::Synthetic => ingest(&l.raw_interactions(), InputFormat::Jsonl, &FieldMap::default(), b',')?,
        Source::File {
            path,
            format,
            fields,
            delimiter,
            ..
        } => ingest(path, *format, fields, *delimiter as u8)?,
    };
    let ingested = report.interactions.len();
    let (interactions, flagged) = if cfg.clean {
        let rules = CleanRules::compile(&cfg.rules)?;
        clean_corpus(report.interactions, &rules)
    } else {
        (report.interactions, 0)
    };
    let filtered = filter_min_interactions(&interactions, cfg.min_interactions)?;
    let split = loo_split(&filtered.matrix, cfg.n_folds, p.cfg.seed, cfg.tier)?;
    if split.folds.iter().all(|f| f.n_eligible() == 0) {
        return Err(Error::EmptyCorpus.into());
    }

    ensure_dir(&l.stage_dir(Stage::Prepare))?;
    write_jsonl(&l.corpus_interactions(), &filtered.retained)?;
    Catalog::write_csv(&filtered.catalog.users, &l.users_csv())?;
    Catalog::write_csv(&filtered.catalog.items, &l.items_csv())?;
    write_json(&l.splits_json(), &split.manifest(p.cfg.seed, cfg.tier))?;

    let mut m = RunManifest::new(Stage::Prepare, &p.cfg.dataset, p.prepare_hash(&digest)?, p.cfg.seed);
    if matches!(p.cfg.source, Source::Synthetic) {
        m = m.upstream(Stage::Synth, &digest);
    }
    for path in [l.corpus_interactions(), l.users_csv(), l.items_csv(), l.splits_json()] {
        m.record(l, &path)?;
    }
    m.folds = (0..cfg.n_folds).collect();
    m.summary = json!({
        "order": ["ingest", "clean", "min_interaction_filter", "split"],
        "ingested": ingested,
        "skipped_rows": report.skipped,
        "flagged_reviews_dropped": flagged,
        "duplicates_resolved": filtered.duplicates_resolved,
        "removed_users": filtered.removed_users,
        "users": filtered.catalog.n_users(),
        "items": filtered.catalog.n_items(),
        "interactions": filtered.retained.len(),
        "excluded_from_split": split.excluded_users.len(),
    });
    m.write(l, Stage::Prepare)?;
    info!(
        "prepare: {} users, {} items, {} interactions, {} folds",
        filtered.catalog.n_users(),
        filtered.catalog.n_items(),
        filtered.retained.len(),
        cfg.n_folds
    );
    Ok(m)
}
