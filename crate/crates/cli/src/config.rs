//! Pipeline configuration.
//!
//! Values are layered: built-in defaults, then the JSON config file, then
//! environment overrides (`GHCF_DATA_DIR`, `GHCF_SEED`, `GHCF_JOBS`), then
//! command-line flags.

use std::path::{Path, PathBuf};

use ghcf_core::corpus::{FieldMap, InputFormat, RuleSpec, SynthSpec, DEFAULT_TIER};
use ghcf_core::eval::EvalConfig;
use ghcf_core::models::{ModelConfig, ModelKind};
use ghcf_core::stats::BlockMode;
use ghcf_core::topics::TopicConfig;
use ghcf_core::{Error, Result};
use serde::{Deserialize, Serialize};

/// Where raw interactions and review embeddings come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    /// Corpus written by `ghcf synth` under `<data_dir>/raw`.
    Synthetic,
    File {
        path: PathBuf,
        format: InputFormat,
        #[serde(default)]
        fields: FieldMap,
        #[serde(default = "default_delimiter")]
        delimiter: char,
        embeddings: PathBuf,
        embedding_index: PathBuf,
    },
}

fn default_delimiter() -> char {
    ','
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrepareConfig {
    pub clean: bool,
    pub rules: RuleSpec,
    pub min_interactions: usize,
    pub n_folds: usize,
    /// Later folds draw held-out items from each user's `tier` most recent interactions.
    pub tier: usize,
}

impl Default for PrepareConfig {
    fn default() -> Self {
        PrepareConfig {
            clean: true,
            rules: RuleSpec::default(),
            min_interactions: 10,
            n_folds: 5,
            tier: DEFAULT_TIER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub alpha: f64,
    pub mode: BlockMode,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            alpha: 0.05,
            mode: BlockMode::Hypervolume,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub dataset: String,
    pub data_dir: PathBuf,
    /// Global seed; it also replaces `model.seed` and `eval.seed`.
    pub seed: u64,
    pub jobs: usize,
    pub source: Source,
    pub synth: SynthSpec,
    pub prepare: PrepareConfig,
    pub topics: TopicConfig,
    /// Shared settings; each variant adjusts its variant, signal and CL weight.
    pub model: ModelConfig,
    pub variants: Vec<String>,
    pub eval: EvalConfig,
    pub compare: CompareConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            dataset: "synthetic".into(),
            data_dir: PathBuf::from("data"),
            seed: 1,
            jobs: 1,
            source: Source::Synthetic,
            synth: SynthSpec::default(),
            prepare: PrepareConfig::default(),
            topics: TopicConfig::default(),
            model: ModelConfig::default(),
            variants: ModelKind::ALL.iter().map(|k| k.name()).collect(),
            eval: EvalConfig::default(),
            compare: CompareConfig::default(),
        }
    }
}

/// Values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub data_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

impl Overrides {
    pub fn from_env() -> Result<Overrides> {
        Overrides::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Overrides> {
        let parse = |key: &str| -> Result<Option<u64>> {
            get(key)
                .map(|v| v.trim().parse::<u64>().map_err(|_| Error::Config(format!("{key}={v:?} is not a non-negative integer"))))
                .transpose()
        };
        Ok(Overrides {
            data_dir: get("GHCF_DATA_DIR").filter(|v| !v.is_empty()).map(PathBuf::from),
            seed: parse("GHCF_SEED")?,
            jobs: parse("GHCF_JOBS")?.map(|j| j as usize),
        })
    }

    /// `other` wins where it is set.
    pub fn then(self, other: Overrides) -> Overrides {
        Overrides {
            data_dir: other.data_dir.or(self.data_dir),
            seed: other.seed.or(self.seed),
            jobs: other.jobs.or(self.jobs),
        }
    }
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Defaults or the given file, then `overrides`, then validation.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<PipelineConfig> {
        let mut cfg = match path {
            Some(p) => PipelineConfig::from_file(p)?,
            None => PipelineConfig::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(d) = &o.data_dir {
            self.data_dir = d.clone();
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(j) = o.jobs {
            self.jobs = j;
        }
        self.model.seed = self.seed;
        self.eval.seed = self.seed;
    }

    pub fn validate(&self) -> Result<()> {
        if self.dataset.is_empty() || self.dataset.contains(['/', '\\']) {
            return Err(Error::Config(format!("dataset id {:?} must be a non-empty name without path separators", self.dataset)));
        }
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be >= 1".into()));
        }
        if self.prepare.n_folds == 0 || self.prepare.min_interactions == 0 {
            return Err(Error::Config("prepare.n_folds and prepare.min_interactions must be >= 1".into()));
        }
        if let Source::File { delimiter, .. } = &self.source {
            if !delimiter.is_ascii() {
                return Err(Error::Config(format!("delimiter {delimiter:?} must be a single ASCII character")));
            }
        }
        self.eval.validate()?;
        if self.eval.k != 10 {
            return Err(Error::Config(format!("the results table records @10 metrics; eval.k is {}", self.eval.k)));
        }
        if !(self.compare.alpha > 0.0 && self.compare.alpha < 1.0) {
            return Err(Error::Config(format!("compare.alpha {} must lie in (0, 1)", self.compare.alpha)));
        }
        let kinds = self.kinds()?;
        if kinds.is_empty() {
            return Err(Error::Config("no variants configured".into()));
        }
        for k in kinds {
            // n_items is unknown until the corpus exists; any positive width validates the rest.
            self.model.for_kind(k).resolve(1)?;
        }
        Ok(())
    }

    /// Configured variants in canonical order, without duplicates.
    pub fn kinds(&self) -> Result<Vec<ModelKind>> {
        let mut kinds = self
            .variants
            .iter()
            .map(|v| ModelKind::parse(v).map_err(|_| Error::Config(format!("unknown variant {v:?}"))))
            .collect::<Result<Vec<_>>>()?;
        kinds.sort_by_key(|k| ModelKind::ALL.iter().position(|a| a == k));
        kinds.dedup();
        Ok(kinds)
    }

    /// Model configuration for one variant at the corpus width.
    pub fn model_for(&self, kind: ModelKind, n_items: usize) -> Result<ModelConfig> {
        self.model.for_kind(kind).resolve(n_items)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_file_env_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"seed": 3, "jobs": 2, "data_dir": "from_file"}"#).unwrap();
        let env = Overrides::from_lookup(|k| match k {
            "GHCF_SEED" => Some("4".into()),
            "GHCF_DATA_DIR" => Some("from_env".into()),
            _ => None,
        })
        .unwrap();
        let flags = Overrides {
            seed: Some(5),
            ..Overrides::default()
        };
        let cfg = PipelineConfig::load(Some(&path), &env.clone().then(flags)).unwrap();
        assert_eq!((cfg.seed, cfg.jobs), (5, 2));
        assert_eq!(cfg.data_dir, PathBuf::from("from_env"));
        assert_eq!((cfg.model.seed, cfg.eval.seed), (5, 5));
        let cfg = PipelineConfig::load(Some(&path), &env).unwrap();
        assert_eq!(cfg.seed, 4);
    }

    #[test]
    fn rejects_bad_values() {
        let bad_env = Overrides::from_lookup(|k| (k == "GHCF_JOBS").then(|| "many".into()));
        assert!(matches!(bad_env, Err(Error::Config(_))));
        let cfg = PipelineConfig {
            variants: vec!["GHCF_Audio".into()],
            ..PipelineConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"sed": 3}"#).unwrap();
        assert!(matches!(PipelineConfig::from_file(&path), Err(Error::Config(_))));
    }

    #[test]
    fn kinds_are_canonical() {
        let cfg = PipelineConfig {
            variants: vec!["ghcf_text".into(), "AE_BPR".into(), "GHCF_Text".into()],
            ..PipelineConfig::default()
        };
        let names: Vec<String> = cfg.kinds().unwrap().iter().map(|k| k.name()).collect();
        assert_eq!(names, ["AE_BPR", "GHCF_Text"]);
    }
}
