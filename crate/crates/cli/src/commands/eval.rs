use std::collections::HashMap;

use ghcf_core::eval::{read_results_csv, write_results_csv, ResultRow};
use ghcf_core::hashing::config_hash;
use ghcf_core::models::{load_checkpoint, FoldData, ModelKind, Signal, SignalTable, CHECKPOINT_FILE};
use ghcf_core::Error;
use log::{info, warn};
use rayon::prelude::*;
use serde_json::json;

use super::ensure_dir;
use super::train::signal_tables;
use crate::error::{MissingArtifact, PartialFailure};
use crate::layout::Stage;
use crate::manifest::RunManifest;
use crate::pipeline::{load_corpus, Corpus, Job, Pipeline, Selection};

fn eval_job(
    p: &Pipeline,
    corpus: &Corpus,
    tables: &HashMap<(usize, Signal), SignalTable>,
    job: Job,
    inputs_hash: &str,
) -> anyhow::Result<ResultRow> {
    let dir = p.layout.run_dir(job.kind, job.fold);
    let (model, manifest) = load_checkpoint(&dir)?;
    let expected = config_hash(&p.cfg.model_for(job.kind, corpus.filtered.catalog.n_items())?)?;
    if manifest.config_hash != expected {
        return Err(Error::HashMismatch {
            what: format!("{job} checkpoint config"),
            expected,
            found: manifest.config_hash,
        }
        .into());
    }
    if manifest.inputs_hash != inputs_hash || manifest.fold != job.fold {
        return Err(Error::HashMismatch {
            what: format!("{job} checkpoint inputs"),
            expected: inputs_hash.into(),
            found: manifest.inputs_hash,
        }
        .into());
    }
    let data = FoldData::new(&corpus.folds[job.fold], tables.get(&(job.fold, job.kind.signal)));
    let ev = model.evaluate(&data, &p.cfg.eval, false)?;
    info!(
        "eval {job}: HR@10 {:.4} nDCG@10 {:.4} MRR {:.4} over {} users",
        ev.metrics.hr, ev.metrics.ndcg, ev.metrics.mrr, ev.n_users
    );
    if ev.degraded_users > 0 {
        warn!("eval {job}: {} users had fewer than {} negatives available", ev.degraded_users, p.cfg.eval.n_negatives);
    }
    Ok(ResultRow {
        model: job.kind.name(),
        variant: job.kind.variant.name().into(),
        dataset: p.cfg.dataset.clone(),
        fold: job.fold,
        hr10: ev.metrics.hr,
        ndcg10: ev.metrics.ndcg,
        mrr: ev.metrics.mrr,
        n_users: ev.n_users,
        seed: p.cfg.seed,
    })
}

fn canonical_order(r: &ResultRow) -> (usize, usize) {
    let k = ModelKind::ALL.iter().position(|k| k.name() == r.model).unwrap_or(usize::MAX);
    (k, r.fold)
}

/// Scores the held-out test items of the selected jobs and writes the results table.
///
/// Rows from earlier runs under the same eval hash are kept unless re-evaluated.
pub fn cmd_eval(p: &Pipeline, sel: &Selection) -> anyhow::Result<RunManifest> {
    let l = &p.layout;
    // Reject a bad selection before looking at artifacts.
    p.plan(sel, p.cfg.prepare.n_folds)?;
    let (train, prepare, topics) = p.require_train()?;
    let topics_hash = topics.as_ref().map(|t| t.config_hash.as_str());
    let corpus = load_corpus(l)?;
    let plan = p.plan(sel, corpus.folds.len())?;
    for job in &plan.jobs {
        let ckpt = l.run_dir(job.kind, job.fold).join(CHECKPOINT_FILE);
        if !train.artifacts.contains_key(&l.relative(&ckpt)) {
            return Err(MissingArtifact { path: ckpt, produced_by: "train" }.into());
        }
    }
    let tables = signal_tables(p, &corpus, &plan.jobs)?;
    let hashes = plan
        .jobs
        .iter()
        .map(|&j| p.job_inputs_hash(j, &prepare.config_hash, topics_hash))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let pool = p.thread_pool()?;
    let outcomes: Vec<anyhow::Result<ResultRow>> = pool.install(|| {
        plan.jobs
            .par_iter()
            .zip(&hashes)
            .map(|(&job, h)| eval_job(p, &corpus, &tables, job, h))
            .collect()
    });

    let eval_hash = p.eval_hash(&train.config_hash)?;
    let previous = match RunManifest::read(l, Stage::Eval) {
        Ok(prev) if prev.config_hash == eval_hash && l.results_csv().exists() => Some((prev, read_results_csv(&l.results_csv())?)),
        _ => None,
    };
    let (mut m, mut rows) = match previous {
        Some((m, rows)) => (m, rows),
        None => {
            let mut m = RunManifest::new(Stage::Eval, &p.cfg.dataset, eval_hash, p.cfg.seed).upstream(Stage::Train, &train.config_hash);
            m.summary = json!({});
            (m, Vec::new())
        }
    };
    let mut failed = Vec::new();
    let mut first_error = None;
    for (job, outcome) in plan.jobs.iter().zip(outcomes) {
        rows.retain(|r| !(r.model == job.kind.name() && r.fold == job.fold));
        match outcome {
            Ok(row) => {
                rows.push(row);
                m.summary[job.to_string()] = json!({ "status": "ok" });
            }
            Err(e) => {
                warn!("eval {job} failed: {e:#}");
                m.summary[job.to_string()] = json!({ "status": "failed", "error": format!("{e:#}") });
                failed.push((job.to_string(), format!("{e:#}")));
                first_error.get_or_insert(e);
            }
        }
    }
    // When nothing succeeded the first error keeps its own class (e.g. a stale checkpoint).
    if failed.len() == plan.jobs.len() {
        if let Some(e) = first_error {
            return Err(e);
        }
    }
    rows.sort_by_key(canonical_order);
    m.models = Vec::new();
    m.folds = Vec::new();
    for r in &rows {
        if !m.models.contains(&r.model) {
            m.models.push(r.model.clone());
        }
        if !m.folds.contains(&r.fold) {
            m.folds.push(r.fold);
        }
    }
    m.folds.sort_unstable();
    ensure_dir(&l.stage_dir(Stage::Eval))?;
    m.artifacts.clear();
    if !rows.is_empty() {
        write_results_csv(&l.results_csv(), &rows)?;
        m.record(l, &l.results_csv())?;
    }
    m.write(l, Stage::Eval)?;
    if !failed.is_empty() {
        return Err(PartialFailure {
            stage: "eval",
            failed,
            total: plan.jobs.len(),
        }
        .into());
    }
    Ok(m)
}
