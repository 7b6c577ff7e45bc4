//! Review corpora: ingestion, cleaning, filtering, labeling and splits.

mod clean;
mod ingest;
mod label;
mod matrix;
mod split;
mod synth;

pub use clean::{clean_corpus, CleanOutcome, CleanRules, RuleSpec};
pub use ingest::{ingest, write_jsonl, FieldMap, InputFormat, IngestReport};
pub use label::{zscore_label, LabeledInteractions};
pub use matrix::{filter_min_interactions, Catalog, Entry, Filtered, RatingMatrix};
pub use split::{loo_split, FoldSplit, SplitManifest, SplitManifestFold, SplitResult, SplitUser, DEFAULT_TIER};
pub use synth::{synth_corpus, PlantedTruth, SynthCorpus, SynthSpec};

use serde::{Deserialize, Serialize};

/// One rated (and optionally reviewed) user-item event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub user_id: String,
    pub item_id: String,
    pub rating: f64,
    pub timestamp: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub review_text: Option<String>,
}

impl Interaction {
    pub fn is_valid(&self) -> bool {
        !self.user_id.is_empty()
            && !self.item_id.is_empty()
            && self.rating.is_finite()
            && self.timestamp >= 0
    }

    /// Review key used to align embedding rows with interactions.
    pub fn review_id(&self) -> String {
        review_id(&self.user_id, &self.item_id)
    }
}

pub fn review_id(user_id: &str, item_id: &str) -> String {
    format!("{user_id}::{item_id}")
}
