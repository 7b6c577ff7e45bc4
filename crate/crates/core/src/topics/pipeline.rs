use serde::{Deserialize, Serialize};

use super::ctfidf::{ctfidf_keywords, default_stopwords, CtfidfConfig};
use super::kmeans::{kmeans, KMeansConfig};
use super::model::{default_label, prune_topics, soft_assign_reduced, MergeRecord, TopicModel};
use super::pca::{embeddings_to_matrix, fit_pca};
use super::EmbeddingMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TopicConfig {
    /// Reduced dimension of the PCA step.
    pub reduced_dim: usize,
    /// Clusters fitted before pruning.
    pub k: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub ngram_max: usize,
    pub top_m: usize,
    pub min_prevalence: f64,
    /// Soft-assignment inverse temperature.
    pub beta: f64,
    pub extra_stopwords: Vec<String>,
}

impl Default for TopicConfig {
    fn default() -> Self {
        TopicConfig {
            reduced_dim: 16,
            k: 15,
            max_iter: 300,
            tol: 1e-6,
            ngram_max: 3,
            top_m: 10,
            min_prevalence: 0.10,
            beta: 5.0,
            extra_stopwords: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicFit {
    pub model: TopicModel,
    /// Hard topic per review after pruning.
    pub assignments: Vec<usize>,
    /// Soft topic distribution per review after pruning.
    pub distributions: Vec<Vec<f64>>,
    pub merges: Vec<MergeRecord>,
    /// Prevalence of the K fitted clusters before pruning.
    pub initial_prevalence: Vec<f64>,
    pub inertia: f64,
}

/// Reduction, clustering, keywords and prevalence pruning over aligned
/// review embeddings and texts. Keywords are recomputed on the merged
/// classes after pruning.
pub fn fit_topics(embeddings: &EmbeddingMatrix, texts: &[&str], cfg: &TopicConfig, seed: u64) -> Result<TopicFit> {
    if texts.len() != embeddings.n_rows {
        return Err(Error::Shape(format!(
            "{} texts for {} embeddings",
            texts.len(),
            embeddings.n_rows
        )));
    }
    let data = embeddings_to_matrix(embeddings);
    let r = cfg.reduced_dim.min(data.rows()).min(data.cols());
    let projection = fit_pca(&data, r)?;
    let reduced = projection.transform(&data);
    let km = kmeans(
        &reduced,
        &KMeansConfig {
            k: cfg.k,
            seed,
            max_iter: cfg.max_iter,
            tol: cfg.tol,
        },
    )?;

    let mut stopwords = default_stopwords();
    stopwords.extend(cfg.extra_stopwords.iter().map(|s| s.to_lowercase()));
    let kw_cfg = CtfidfConfig {
        ngram_max: cfg.ngram_max,
        top_m: cfg.top_m,
        stopwords,
    };
    let n = texts.len() as f64;
    let mut counts = vec![0usize; cfg.k];
    km.assignments.iter().for_each(|&a| counts[a] += 1);
    let initial_prevalence: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let keywords = ctfidf_keywords(texts, &km.assignments, cfg.k, &kw_cfg)?;
    let labels = keywords.iter().enumerate().map(|(i, k)| default_label(i, k)).collect();
    let fitted = TopicModel {
        projection,
        centroids: km.centroids,
        keywords,
        prevalence: initial_prevalence.clone(),
        labels,
    };

    let pruned = prune_topics(&fitted, &km.assignments, cfg.min_prevalence)?;
    let mut model = pruned.model;
    model.keywords = ctfidf_keywords(texts, &pruned.assignments, model.k(), &kw_cfg)?;
    model.labels = model.keywords.iter().enumerate().map(|(i, k)| default_label(i, k)).collect();

    let distributions = (0..reduced.rows())
        .map(|i| soft_assign_reduced(reduced.row(i), &model.centroids, cfg.beta).0)
        .collect();
    Ok(TopicFit {
        model,
        assignments: pruned.assignments,
        distributions,
        merges: pruned.merges,
        initial_prevalence,
        inertia: km.inertia,
    })
}
