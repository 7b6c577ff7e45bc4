//! Shared context for the stage commands: stage hashes, upstream checks,
//! job planning and artifact loading.
//!
//! A stage's config hash covers its own config section plus the hashes of
//! the stages it consumes, so editing an upstream section invalidates every
//! downstream stage. Before computing, a stage re-derives the expected hash
//! chain from the current config and verifies each upstream manifest and
//! its files against it.

use std::path::PathBuf;

use anyhow::Context;
use ghcf_core::corpus::{
    filter_min_interactions, ingest, Catalog, FieldMap, FoldSplit, Filtered, InputFormat, SplitManifest,
};
use ghcf_core::hashing::{config_hash, file_sha256};
use ghcf_core::models::{ModelKind, Signal};
use ghcf_core::topics::{read_profiles_csv, Profiles};
use ghcf_core::Error;
use serde_json::json;

use crate::config::{PipelineConfig, Source};
use crate::layout::{Layout, Stage};
use crate::manifest::RunManifest;

/// Restricts train/eval to one fold and/or one variant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Selection {
    pub fold: Option<usize>,
    pub variant: Option<String>,
}

impl Selection {
    pub fn all() -> Self {
        Selection::default()
    }
}

/// One (variant, fold) unit of training or evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Job {
    pub kind: ModelKind,
    pub fold: usize,
}

impl std::fmt::Display for Job {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/fold{}", self.kind, self.fold)
    }
}

/// The jobs a stage runs and how many may run at once.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub dataset: String,
    pub jobs: Vec<Job>,
    pub parallelism: usize,
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    pub cfg: PipelineConfig,
    pub layout: Layout,
}

fn hash(value: serde_json::Value) -> anyhow::Result<String> {
    Ok(config_hash(&value)?)
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig) -> Self {
        let layout = Layout::new(cfg.data_dir.clone());
        Pipeline { cfg, layout }
    }

    pub fn synth_hash(&self) -> anyhow::Result<String> {
        hash(json!({ "stage": "synth", "seed": self.cfg.seed, "synth": self.cfg.synth }))
    }

    /// Identity of the raw input: the synth hash, or the input file's sha256.
    pub fn source_digest(&self) -> anyhow::Result<String> {
        match &self.cfg.source {
            Source::Synthetic => Ok(RunManifest::require(&self.layout, Stage::Synth, &self.synth_hash()?)?.config_hash),
            Source::File { path, .. } => Ok(file_sha256(path)?),
        }
    }

    pub fn prepare_hash(&self, source_digest: &str) -> anyhow::Result<String> {
        hash(json!({
            "stage": "prepare",
            "dataset": self.cfg.dataset,
            "seed": self.cfg.seed,
            "source": self.cfg.source,
            "input": source_digest,
            "prepare": self.cfg.prepare,
        }))
    }

    pub fn require_prepare(&self) -> anyhow::Result<RunManifest> {
        let digest = self.source_digest()?;
        RunManifest::require(&self.layout, Stage::Prepare, &self.prepare_hash(&digest)?)
    }

    pub fn embedding_paths(&self) -> (PathBuf, PathBuf) {
        match &self.cfg.source {
            Source::Synthetic => (self.layout.raw_embeddings(), self.layout.raw_embedding_index()),
            Source::File {
                embeddings,
                embedding_index,
                ..
            } => (embeddings.clone(), embedding_index.clone()),
        }
    }

    pub fn embeddings_digest(&self) -> anyhow::Result<String> {
        let (m, i) = self.embedding_paths();
        Ok(format!("{}:{}", file_sha256(&m)?, file_sha256(&i)?))
    }

    pub fn topics_hash(&self, prepare_hash: &str, embeddings_digest: &str) -> anyhow::Result<String> {
        hash(json!({
            "stage": "topics",
            "seed": self.cfg.seed,
            "topics": self.cfg.topics,
            "prepare": prepare_hash,
            "embeddings": embeddings_digest,
        }))
    }

    pub fn require_topics(&self, prepare: &RunManifest) -> anyhow::Result<RunManifest> {
        let expected = self.topics_hash(&prepare.config_hash, &self.embeddings_digest()?)?;
        RunManifest::require(&self.layout, Stage::Topics, &expected)
    }

    pub fn needs_topics(&self) -> anyhow::Result<bool> {
        Ok(self.cfg.kinds()?.iter().any(|k| k.signal != Signal::None))
    }

    /// Verified prepare and (when any variant uses a signal) topics manifests.
    pub fn train_inputs(&self) -> anyhow::Result<(RunManifest, Option<RunManifest>)> {
        let prepare = self.require_prepare()?;
        let topics = if self.needs_topics()? {
            Some(self.require_topics(&prepare)?)
        } else {
            None
        };
        Ok((prepare, topics))
    }

    pub fn train_hash(&self, prepare_hash: &str, topics_hash: Option<&str>) -> anyhow::Result<String> {
        hash(json!({
            "stage": "train",
            "model": self.cfg.model,
            "validation": self.cfg.eval,
            "prepare": prepare_hash,
            "topics": topics_hash,
        }))
    }

    /// Hash of the upstream data a single job consumes; AE_BPR never sees the topics stage.
    pub fn job_inputs_hash(&self, job: Job, prepare_hash: &str, topics_hash: Option<&str>) -> anyhow::Result<String> {
        let topics = if job.kind.signal == Signal::None { None } else { topics_hash };
        hash(json!({ "prepare": prepare_hash, "topics": topics, "fold": job.fold, "signal": job.kind.signal }))
    }

    pub fn require_train(&self) -> anyhow::Result<(RunManifest, RunManifest, Option<RunManifest>)> {
        let (prepare, topics) = self.train_inputs()?;
        let expected = self.train_hash(&prepare.config_hash, topics.as_ref().map(|t| t.config_hash.as_str()))?;
        let train = RunManifest::require(&self.layout, Stage::Train, &expected)?;
        Ok((train, prepare, topics))
    }

    pub fn eval_hash(&self, train_hash: &str) -> anyhow::Result<String> {
        hash(json!({ "stage": "eval", "dataset": self.cfg.dataset, "eval": self.cfg.eval, "train": train_hash }))
    }

    pub fn require_eval(&self) -> anyhow::Result<RunManifest> {
        let (train, _, _) = self.require_train()?;
        RunManifest::require(&self.layout, Stage::Eval, &self.eval_hash(&train.config_hash)?)
    }

    pub fn compare_hash(&self, eval_hash: &str) -> anyhow::Result<String> {
        hash(json!({ "stage": "compare", "compare": self.cfg.compare, "eval": eval_hash }))
    }

    pub fn require_compare(&self, eval: &RunManifest) -> anyhow::Result<RunManifest> {
        RunManifest::require(&self.layout, Stage::Compare, &self.compare_hash(&eval.config_hash)?)
    }

    pub fn report_hash(&self, compare_hash: &str) -> anyhow::Result<String> {
        hash(json!({ "stage": "report", "compare": compare_hash }))
    }

    /// Jobs in canonical order (variants as in the five-model table, then folds).
    pub fn plan(&self, sel: &Selection, n_folds: usize) -> anyhow::Result<ExperimentPlan> {
        let mut kinds = self.cfg.kinds()?;
        if let Some(v) = &sel.variant {
            let k = ModelKind::parse(v).map_err(|_| Error::Config(format!("unknown variant {v:?}")))?;
            if !kinds.contains(&k) {
                return Err(Error::Config(format!("variant {k} is not in the configured variants")).into());
            }
            kinds = vec![k];
        }
        let folds: Vec<usize> = match sel.fold {
            Some(f) if f >= n_folds => {
                return Err(Error::Config(format!("fold {f} does not exist (n_folds = {n_folds})")).into())
            }
            Some(f) => vec![f],
            None => (0..n_folds).collect(),
        };
        let jobs = kinds.iter().flat_map(|&kind| folds.iter().map(move |&fold| Job { kind, fold })).collect();
        Ok(ExperimentPlan {
            dataset: self.cfg.dataset.clone(),
            jobs,
            parallelism: self.cfg.jobs,
        })
    }

    pub fn thread_pool(&self) -> anyhow::Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.jobs)
            .build()
            .context("building the job thread pool")
    }
}

/// The prepared corpus with its folds rebuilt from the split manifest.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub filtered: Filtered,
    pub folds: Vec<FoldSplit>,
    pub split: SplitManifest,
}

pub fn load_corpus(layout: &Layout) -> anyhow::Result<Corpus> {
    let path = layout.corpus_interactions();
    let report = ingest(&path, InputFormat::Jsonl, &FieldMap::default(), b',')?;
    // Every retained user already meets the threshold, so k = 1 rebuilds the same index.
    let filtered = filter_min_interactions(&report.interactions, 1)?;
    let users = Catalog::read_csv(&layout.users_csv())?;
    let items = Catalog::read_csv(&layout.items_csv())?;
    if users != filtered.catalog.users || items != filtered.catalog.items {
        return Err(Error::format(layout.users_csv(), "catalog does not match the canonical corpus").into());
    }
    let split_path = layout.splits_json();
    let text = std::fs::read_to_string(&split_path).map_err(|e| Error::io(&split_path, e))?;
    let split: SplitManifest = serde_json::from_str(&text).map_err(Error::from)?;
    let folds = split
        .folds
        .iter()
        .map(|f| FoldSplit::from_manifest(f, &filtered.matrix))
        .collect::<ghcf_core::Result<Vec<_>>>()?;
    Ok(Corpus { filtered, folds, split })
}

pub fn load_profiles(layout: &Layout, fold: usize, signal: Signal) -> anyhow::Result<Profiles> {
    let (u, i) = layout.profiles(fold, signal);
    let users = read_profiles_csv(&u)?;
    let items = read_profiles_csv(&i)?;
    let dim = items.first().map_or(0, Vec::len);
    if users.iter().chain(&items).any(|r| r.len() != dim) {
        return Err(Error::format(&u, "profile rows have inconsistent widths").into());
    }
    Ok(Profiles {
        dim,
        user_fallback: vec![false; users.len()],
        item_fallback: vec![false; items.len()],
        users,
        items,
    })
}
