//! Stage manifests: the config hash that produced a stage and the hash of
//! every file it wrote.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use ghcf_core::hashing::file_sha256;
use ghcf_core::Error;
use serde::{Deserialize, Serialize};

use crate::error::MissingArtifact;
use crate::layout::{Layout, Stage};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub stage: String,
    pub tool_version: String,
    pub dataset: String,
    pub config_hash: String,
    /// Config hashes of the stages this one consumed.
    pub upstream: BTreeMap<String, String>,
    pub seed: u64,
    pub folds: Vec<usize>,
    pub models: Vec<String>,
    /// Root-relative path → sha256.
    pub artifacts: BTreeMap<String, String>,
    #[serde(default)]
    pub summary: serde_json::Value,
}

impl RunManifest {
    pub fn new(stage: Stage, dataset: &str, config_hash: String, seed: u64) -> Self {
        RunManifest {
            stage: stage.name().into(),
            tool_version: TOOL_VERSION.into(),
            dataset: dataset.into(),
            config_hash,
            upstream: BTreeMap::new(),
            seed,
            folds: Vec::new(),
            models: Vec::new(),
            artifacts: BTreeMap::new(),
            summary: serde_json::Value::Null,
        }
    }

    pub fn upstream(mut self, stage: Stage, hash: &str) -> Self {
        self.upstream.insert(stage.name().into(), hash.into());
        self
    }

    pub fn record(&mut self, layout: &Layout, path: &Path) -> anyhow::Result<()> {
        let sha = file_sha256(path)?;
        self.artifacts.insert(layout.relative(path), sha);
        Ok(())
    }

    pub fn write(&self, layout: &Layout, stage: Stage) -> anyhow::Result<()> {
        let path = layout.manifest(stage);
        std::fs::create_dir_all(layout.stage_dir(stage)).map_err(|e| Error::io(layout.stage_dir(stage), e))?;
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(())
    }

    /// Reads a stage manifest; absence is a missing-artifact error.
    pub fn read(layout: &Layout, stage: Stage) -> anyhow::Result<RunManifest> {
        let path = layout.manifest(stage);
        if !path.exists() {
            return Err(MissingArtifact {
                path,
                produced_by: stage.name(),
            }
            .into());
        }
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let m: RunManifest = serde_json::from_str(&text).map_err(Error::from).with_context(|| format!("reading {}", path.display()))?;
        Ok(m)
    }

    /// Every recorded artifact exists and still has its recorded hash.
    pub fn verify_artifacts(&self, layout: &Layout) -> anyhow::Result<()> {
        let producer = stage_by_name(&self.stage);
        for (rel, sha) in &self.artifacts {
            let path = layout.resolve(rel);
            if !path.exists() {
                return Err(MissingArtifact { path, produced_by: producer }.into());
            }
            let found = file_sha256(&path)?;
            if &found != sha {
                return Err(Error::HashMismatch {
                    what: rel.clone(),
                    expected: sha.clone(),
                    found,
                }
                .into());
            }
        }
        Ok(())
    }

    /// Reads, verifies and checks that the stage was produced by `expected_hash`.
    pub fn require(layout: &Layout, stage: Stage, expected_hash: &str) -> anyhow::Result<RunManifest> {
        let m = RunManifest::read(layout, stage)?;
        if m.config_hash != expected_hash {
            return Err(Error::HashMismatch {
                what: format!("{} artifacts (configuration changed since; rerun `ghcf {}`)", stage.name(), stage.name()),
                expected: expected_hash.into(),
                found: m.config_hash,
            }
            .into());
        }
        m.verify_artifacts(layout)?;
        Ok(m)
    }
}

fn stage_by_name(name: &str) -> &'static str {
    [Stage::Synth, Stage::Prepare, Stage::Topics, Stage::Train, Stage::Eval, Stage::Compare, Stage::Report]
        .into_iter()
        .find(|s| s.name() == name)
        .map_or("prepare", Stage::name)
}
