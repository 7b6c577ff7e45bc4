use regex::Regex;
use serde::{Deserialize, Serialize};

use super::Interaction;
use crate::{Error, Result};

/// Serializable form of the cleaning rules.
///
/// `replace` passes run in order; `flag` patterns mark a review row for
/// removal (e.g. reviews that start with a leading ellipsis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSpec {
    #[serde(default)]
    pub replace: Vec<ReplacePass>,
    #[serde(default)]
    pub flag: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplacePass {
    pub pattern: String,
    #[serde(default)]
    pub replacement: String,
}

pub const HYPERLINK_PATTERN: &str = r"(?i)\b(?:https?://|www\.)\S+";
pub const HTML_TAG_PATTERN: &str = r"<[^>\n]{1,64}>";
pub const LEADING_ELLIPSIS_PATTERN: &str = r"^\s*(?:\.\.\.|…)";

impl Default for RuleSpec {
    fn default() -> Self {
        RuleSpec {
            replace: vec![
                ReplacePass {
                    pattern: HYPERLINK_PATTERN.into(),
                    replacement: String::new(),
                },
                ReplacePass {
                    pattern: HTML_TAG_PATTERN.into(),
                    replacement: String::new(),
                },
                ReplacePass {
                    pattern: r"[\u{0}-\u{8}\u{B}\u{C}\u{E}-\u{1F}\u{7F}]".into(),
                    replacement: String::new(),
                },
            ],
            flag: Vec::new(),
        }
    }
}

impl RuleSpec {
    /// Defaults plus the leading-ellipsis removal rule used for Amazon reviews.
    pub fn amazon() -> Self {
        RuleSpec {
            flag: vec![LEADING_ELLIPSIS_PATTERN.into()],
            ..RuleSpec::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct CleanRules {
    replace: Vec<(Regex, String)>,
    flag: Vec<Regex>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanOutcome {
    pub text: String,
    pub flagged: bool,
}

fn compile(pattern: &str) -> Result<Regex> {
    Regex::new(pattern).map_err(|source| Error::Regex {
        pattern: pattern.to_string(),
        source,
    })
}

impl CleanRules {
    pub fn compile(spec: &RuleSpec) -> Result<Self> {
        Ok(CleanRules {
            replace: spec
                .replace
                .iter()
                .map(|p| Ok((compile(&p.pattern)?, p.replacement.clone())))
                .collect::<Result<_>>()?,
            flag: spec.flag.iter().map(|p| compile(p)).collect::<Result<_>>()?,
        })
    }

    /// Applies the passes in order. Case, punctuation and emoji are untouched
    /// unless a configured pass targets them. Flags are tested on the raw text.
    pub fn clean_text(&self, raw: &str) -> CleanOutcome {
        let flagged = self.flag.iter().any(|re| re.is_match(raw));
        let mut text = raw.to_string();
        for (re, replacement) in &self.replace {
            if let std::borrow::Cow::Owned(s) = re.replace_all(&text, replacement.as_str()) {
                text = s;
            }
        }
        CleanOutcome { text, flagged }
    }
}

/// Cleans every review; rows whose review is flagged are dropped.
/// Returns the kept interactions and the number of dropped rows.
pub fn clean_corpus(interactions: Vec<Interaction>, rules: &CleanRules) -> (Vec<Interaction>, usize) {
    let mut dropped = 0;
    let kept = interactions
        .into_iter()
        .filter_map(|mut it| {
            if let Some(raw) = it.review_text.take() {
                let out = rules.clean_text(&raw);
                if out.flagged {
                    dropped += 1;
                    return None;
                }
                it.review_text = Some(out.text);
            }
            Some(it)
        })
        .collect();
    (kept, dropped)
}
