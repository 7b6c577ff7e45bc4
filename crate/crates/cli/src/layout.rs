//! Artifact paths under the data root.
//!
//! ```text
//! <root>/raw/        interactions.jsonl, embeddings.emb, embeddings_index.csv, truth.json
//! <root>/corpus/     interactions.jsonl, users.csv, items.csv, splits.json
//! <root>/topics/     topic_model.json, review_topics.csv, summary.json,
//!                    fold<f>/{topic,text}_{users,items}.csv
//! <root>/runs/       <model>/fold<f>/{checkpoint.json, params.bin, train_log.csv}
//! <root>/results/    results.csv
//! <root>/stats/      ranks.csv, stats_report.json, cd_diagram.json, cd_diagram.svg, rank_heatmap.csv
//! <root>/report/     report.md
//! ```
//!
//! Every stage directory also holds a `manifest.json`.

use std::path::{Path, PathBuf};

use ghcf_core::models::{ModelKind, Signal};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Synth,
    Prepare,
    Topics,
    Train,
    Eval,
    Compare,
    Report,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Synth => "synth",
            Stage::Prepare => "prepare",
            Stage::Topics => "topics",
            Stage::Train => "train",
            Stage::Eval => "eval",
            Stage::Compare => "compare",
            Stage::Report => "report",
        }
    }

    fn dir(self) -> &'static str {
        match self {
            Stage::Synth => "raw",
            Stage::Prepare => "corpus",
            Stage::Topics => "topics",
            Stage::Train => "runs",
            Stage::Eval => "results",
            Stage::Compare => "stats",
            Stage::Report => "report",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn stage_dir(&self, stage: Stage) -> PathBuf {
        self.root.join(stage.dir())
    }

    pub fn manifest(&self, stage: Stage) -> PathBuf {
        self.stage_dir(stage).join(MANIFEST_FILE)
    }

    /// Path relative to the root, with forward slashes, as recorded in manifests.
    pub fn relative(&self, path: &Path) -> String {
        let rel = path.strip_prefix(&self.root).unwrap_or(path);
        rel.components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/")
    }

    pub fn resolve(&self, relative: &str) -> PathBuf {
        self.root.join(relative)
    }

    pub fn raw_interactions(&self) -> PathBuf {
        self.stage_dir(Stage::Synth).join("interactions.jsonl")
    }

    pub fn raw_embeddings(&self) -> PathBuf {
        self.stage_dir(Stage::Synth).join("embeddings.emb")
    }

    pub fn raw_embedding_index(&self) -> PathBuf {
        self.stage_dir(Stage::Synth).join("embeddings_index.csv")
    }

    pub fn raw_truth(&self) -> PathBuf {
        self.stage_dir(Stage::Synth).join("truth.json")
    }

    pub fn corpus_interactions(&self) -> PathBuf {
        self.stage_dir(Stage::Prepare).join("interactions.jsonl")
    }

    pub fn users_csv(&self) -> PathBuf {
        self.stage_dir(Stage::Prepare).join("users.csv")
    }

    pub fn items_csv(&self) -> PathBuf {
        self.stage_dir(Stage::Prepare).join("items.csv")
    }

    pub fn splits_json(&self) -> PathBuf {
        self.stage_dir(Stage::Prepare).join("splits.json")
    }

    pub fn topic_model(&self) -> PathBuf {
        self.stage_dir(Stage::Topics).join("topic_model.json")
    }

    pub fn review_topics(&self) -> PathBuf {
        self.stage_dir(Stage::Topics).join("review_topics.csv")
    }

    pub fn topics_summary(&self) -> PathBuf {
        self.stage_dir(Stage::Topics).join("summary.json")
    }

    /// `(users, items)` profile CSVs for a fold and signal.
    pub fn profiles(&self, fold: usize, signal: Signal) -> (PathBuf, PathBuf) {
        let prefix = match signal {
            Signal::Text => "text",
            _ => "topic",
        };
        let dir = self.stage_dir(Stage::Topics).join(format!("fold{fold}"));
        (dir.join(format!("{prefix}_users.csv")), dir.join(format!("{prefix}_items.csv")))
    }

    pub fn run_dir(&self, kind: ModelKind, fold: usize) -> PathBuf {
        self.stage_dir(Stage::Train).join(kind.name()).join(format!("fold{fold}"))
    }

    pub fn results_csv(&self) -> PathBuf {
        self.stage_dir(Stage::Eval).join("results.csv")
    }

    pub fn ranks_csv(&self) -> PathBuf {
        self.stage_dir(Stage::Compare).join("ranks.csv")
    }

    pub fn stats_report(&self) -> PathBuf {
        self.stage_dir(Stage::Compare).join("stats_report.json")
    }

    pub fn cd_diagram_json(&self) -> PathBuf {
        self.stage_dir(Stage::Compare).join("cd_diagram.json")
    }

    pub fn cd_diagram_svg(&self) -> PathBuf {
        self.stage_dir(Stage::Compare).join("cd_diagram.svg")
    }

    pub fn rank_heatmap(&self) -> PathBuf {
        self.stage_dir(Stage::Compare).join("rank_heatmap.csv")
    }

    pub fn report_md(&self) -> PathBuf {
        self.stage_dir(Stage::Report).join("report.md")
    }
}
