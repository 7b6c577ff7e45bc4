use std::collections::HashMap;

use ghcf_core::models::{save_checkpoint, train, write_train_log, FoldData, Signal, SignalTable, CHECKPOINT_FILE, PARAMS_FILE};
use log::{info, warn};
use rayon::prelude::*;
use serde_json::json;

use crate::error::PartialFailure;
use crate::layout::Stage;
use crate::manifest::RunManifest;
use crate::pipeline::{load_corpus, load_profiles, Corpus, Job, Pipeline, Selection};

pub const TRAIN_LOG_FILE: &str = "train_log.csv";

/// Signal tables for every (fold, signal) the jobs need.
pub(crate) fn signal_tables(p: &Pipeline, corpus: &Corpus, jobs: &[Job]) -> anyhow::Result<HashMap<(usize, Signal), SignalTable>> {
    let mut tables = HashMap::new();
    for job in jobs {
        let key = (job.fold, job.kind.signal);
        if job.kind.signal == Signal::None || tables.contains_key(&key) {
            continue;
        }
        let profiles = load_profiles(&p.layout, job.fold, job.kind.signal)?;
        tables.insert(key, SignalTable::build(&profiles, &corpus.folds[job.fold].train)?);
    }
    Ok(tables)
}

struct Trained {
    best_epoch: usize,
    val_hr10: f64,
    steps: u64,
}

fn run_job(
    p: &Pipeline,
    corpus: &Corpus,
    tables: &HashMap<(usize, Signal), SignalTable>,
    job: Job,
    inputs_hash: &str,
) -> anyhow::Result<Trained> {
    let cfg = p.cfg.model_for(job.kind, corpus.filtered.catalog.n_items())?;
    let data = FoldData::new(&corpus.folds[job.fold], tables.get(&(job.fold, job.kind.signal)));
    let outcome = train(&cfg, &data, &p.cfg.eval)?;
    let dir = p.layout.run_dir(job.kind, job.fold);
    save_checkpoint(&dir, &outcome, job.fold, inputs_hash)?;
    write_train_log(&dir.join(TRAIN_LOG_FILE), &outcome.log)?;
    info!(
        "train {job}: best epoch {} val HR@10 {:.4} ({} steps)",
        outcome.best_epoch, outcome.best_val_hr10, outcome.steps
    );
    Ok(Trained {
        best_epoch: outcome.best_epoch,
        val_hr10: outcome.best_val_hr10,
        steps: outcome.steps,
    })
}

/// Trains the selected (variant, fold) jobs, up to `jobs` at a time.
///
/// Checkpoints of other jobs trained under the same train hash stay in the
/// manifest, so variants and folds can be trained separately.
pub fn cmd_train(p: &Pipeline, sel: &Selection) -> anyhow::Result<RunManifest> {
    let l = &p.layout;
    // Reject a bad selection before looking at artifacts.
    p.plan(sel, p.cfg.prepare.n_folds)?;
    let (prepare, topics) = p.train_inputs()?;
    let topics_hash = topics.as_ref().map(|t| t.config_hash.as_str());
    let train_hash = p.train_hash(&prepare.config_hash, topics_hash)?;
    let corpus = load_corpus(l)?;
    let plan = p.plan(sel, corpus.folds.len())?;
    let tables = signal_tables(p, &corpus, &plan.jobs)?;
    let hashes = plan
        .jobs
        .iter()
        .map(|&j| p.job_inputs_hash(j, &prepare.config_hash, topics_hash))
        .collect::<anyhow::Result<Vec<_>>>()?;

    let pool = p.thread_pool()?;
    let outcomes: Vec<anyhow::Result<Trained>> = pool.install(|| {
        plan.jobs
            .par_iter()
            .zip(&hashes)
            .map(|(&job, h)| run_job(p, &corpus, &tables, job, h))
            .collect()
    });

    let mut m = match RunManifest::read(l, Stage::Train) {
        Ok(prev) if prev.config_hash == train_hash => prev,
        _ => {
            let mut m = RunManifest::new(Stage::Train, &p.cfg.dataset, train_hash, p.cfg.seed)
                .upstream(Stage::Prepare, &prepare.config_hash);
            if let Some(t) = topics_hash {
                m = m.upstream(Stage::Topics, t);
            }
            m.summary = json!({});
            m
        }
    };
    let mut failed = Vec::new();
    let mut first_error = None;
    for (job, outcome) in plan.jobs.iter().zip(outcomes) {
        let dir = l.run_dir(job.kind, job.fold);
        let files = [dir.join(CHECKPOINT_FILE), dir.join(PARAMS_FILE), dir.join(TRAIN_LOG_FILE)];
        let status = match outcome {
            Ok(t) => {
                for f in &files {
                    m.record(l, f)?;
                }
                json!({ "status": "ok", "best_epoch": t.best_epoch, "val_hr10": t.val_hr10, "steps": t.steps })
            }
            Err(e) => {
                warn!("train {job} failed: {e:#}");
                for f in &files {
                    m.artifacts.remove(&l.relative(f));
                }
                failed.push((job.to_string(), format!("{e:#}")));
                let status = json!({ "status": "failed", "error": format!("{e:#}") });
                first_error.get_or_insert(e);
                status
            }
        };
        m.summary[job.to_string()] = status;
        if !m.models.contains(&job.kind.name()) {
            m.models.push(job.kind.name());
        }
        if !m.folds.contains(&job.fold) {
            m.folds.push(job.fold);
        }
    }
    m.folds.sort_unstable();
    m.write(l, Stage::Train)?;
    if failed.len() == plan.jobs.len() {
        if let Some(e) = first_error {
            return Err(e);
        }
    }
    if !failed.is_empty() {
        return Err(PartialFailure {
            stage: "train",
            failed,
            total: plan.jobs.len(),
        }
        .into());
    }
    Ok(m)
}
