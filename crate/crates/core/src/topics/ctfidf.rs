//! Class-based TF-IDF keyword extraction.
//!
//! For term `t` and class `c`: `w(t, c) = tf(t, c) · ln(1 + A / f(t))`, where
//! `A` is the average number of term occurrences per class and `f(t)` is the
//! term's frequency summed over all classes.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyword {
    pub term: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtfidfConfig {
    pub ngram_max: usize,
    pub top_m: usize,
    pub stopwords: Vec<String>,
}

impl Default for CtfidfConfig {
    fn default() -> Self {
        CtfidfConfig {
            ngram_max: 3,
            top_m: 10,
            stopwords: default_stopwords(),
        }
    }
}

const ENGLISH: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any", "are", "as", "at",
    "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "could", "did", "do",
    "does", "doing", "down", "during", "each", "even", "ever", "few", "for", "from", "further", "get", "got", "had",
    "has", "have", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how", "i", "if", "in",
    "into", "is", "it", "its", "itself", "just", "me", "more", "most", "much", "my", "myself", "no", "nor", "not",
    "now", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "out", "over", "own", "really", "same",
    "she", "should", "so", "some", "still", "such", "than", "that", "the", "their", "theirs", "them", "then",
    "there", "these", "they", "this", "those", "through", "to", "too", "under", "until", "up", "very", "was", "we",
    "were", "what", "when", "where", "which", "while", "who", "whom", "why", "will", "with", "would", "you", "your",
    "yours", "yourself",
];

const DOMAIN: &[&str] = &[
    "movie", "movies", "film", "films", "watch", "watched", "watching", "show", "shows", "series", "scene", "scenes",
];

/// English function words plus review-domain terms such as "movie" and "film".
pub fn default_stopwords() -> Vec<String> {
    ENGLISH.iter().chain(DOMAIN).map(|s| s.to_string()).collect()
}

/// Splits on whitespace and punctuation (apostrophes inside words are kept).
/// Returns `(lowercased, original)` pairs.
pub fn tokenize(text: &str) -> Vec<(String, String)> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|t| t.trim_matches('\''))
        .filter(|t| !t.is_empty())
        .map(|t| (t.to_lowercase(), t.to_string()))
        .collect()
}

/// Per-class ranked keywords. `assignments[d]` is the class of document `d`.
pub fn ctfidf_keywords(
    texts: &[&str],
    assignments: &[usize],
    n_classes: usize,
    cfg: &CtfidfConfig,
) -> Result<Vec<Vec<Keyword>>> {
    if texts.len() != assignments.len() {
        return Err(Error::Shape(format!(
            "{} documents with {} assignments",
            texts.len(),
            assignments.len()
        )));
    }
    if cfg.ngram_max == 0 {
        return Err(Error::InvalidArgument("ngram_max must be >= 1".into()));
    }
    let mut docs_per_class = vec![0usize; n_classes];
    for &a in assignments {
        if a >= n_classes {
            return Err(Error::InvalidArgument(format!("class {a} >= {n_classes}")));
        }
        docs_per_class[a] += 1;
    }
    if let Some(c) = docs_per_class.iter().position(|&n| n == 0) {
        return Err(Error::InvalidArgument(format!("class {c} has no documents")));
    }

    let stop: HashSet<&str> = cfg.stopwords.iter().map(String::as_str).collect();
    let mut tf: Vec<HashMap<String, f64>> = vec![HashMap::new(); n_classes];
    let mut display: BTreeMap<String, String> = BTreeMap::new();
    for (text, &class) in texts.iter().zip(assignments) {
        let tokens: Vec<(String, String)> = tokenize(text)
            .into_iter()
            .filter(|(lower, _)| !stop.contains(lower.as_str()))
            .collect();
        for n in 1..=cfg.ngram_max {
            for w in tokens.windows(n) {
                let key = w.iter().map(|t| t.0.as_str()).collect::<Vec<_>>().join(" ");
                display
                    .entry(key.clone())
                    .or_insert_with(|| w.iter().map(|t| t.1.as_str()).collect::<Vec<_>>().join(" "));
                *tf[class].entry(key).or_insert(0.0) += 1.0;
            }
        }
    }
    if display.is_empty() {
        return Err(Error::InvalidArgument("empty vocabulary after stopword removal".into()));
    }

    let mut total: HashMap<&str, f64> = HashMap::new();
    for class in &tf {
        for (t, &c) in class {
            *total.entry(t.as_str()).or_insert(0.0) += c;
        }
    }
    let avg = tf.iter().map(|c| c.values().sum::<f64>()).sum::<f64>() / n_classes as f64;

    Ok(tf
        .iter()
        .map(|class| {
            let mut scored: Vec<(&str, f64)> = class
                .iter()
                .map(|(t, &count)| (t.as_str(), count * (1.0 + avg / total[t.as_str()]).ln()))
                .collect();
            scored.sort_by(|a, b| {
                b.1.total_cmp(&a.1)
                    .then(a.0.matches(' ').count().cmp(&b.0.matches(' ').count()))
                    .then(a.0.cmp(b.0))
            });
            scored
                .into_iter()
                .take(cfg.top_m)
                .map(|(t, weight)| Keyword {
                    term: display[t].clone(),
                    weight,
                })
                .collect()
        })
        .collect())
}
