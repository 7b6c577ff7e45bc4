use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ctfidf::Keyword;
use super::pca::Projection;
use crate::nn::Matrix;
use crate::{Error, Result};

/// Fitted topic model: reduction, centroids in reduced space, keywords and
/// document prevalence per topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub projection: Projection,
    pub centroids: Matrix,
    pub keywords: Vec<Vec<Keyword>>,
    pub prevalence: Vec<f64>,
    pub labels: Vec<String>,
}

impl TopicModel {
    pub fn k(&self) -> usize {
        self.centroids.rows()
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(f), self)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<TopicModel> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(std::io::BufReader::new(f))?)
    }
}

pub fn default_label(index: usize, keywords: &[Keyword]) -> String {
    let head: Vec<&str> = keywords.iter().take(3).map(|k| k.term.as_str()).collect();
    format!("topic_{index}: {}", head.join(", "))
}

/// Probability vector over topics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicDistribution(pub Vec<f64>);

impl TopicDistribution {
    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn is_simplex(&self, tol: f64) -> bool {
        self.0.iter().all(|&p| p >= 0.0) && (self.0.iter().sum::<f64>() - 1.0).abs() <= tol
    }
}

/// `p_k ∝ exp(-β · ‖x - c_k‖²)` in reduced space; `β = ∞` gives the
/// (tie-split) hard assignment.
pub fn soft_assign_reduced(reduced: &[f64], centroids: &Matrix, beta: f64) -> TopicDistribution {
    let d2: Vec<f64> = (0..centroids.rows())
        .map(|c| reduced.iter().zip(centroids.row(c)).map(|(x, y)| (x - y) * (x - y)).sum())
        .collect();
    let min = d2.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = if beta.is_infinite() {
        d2.iter().map(|&d| if d == min { 1.0 } else { 0.0 }).collect()
    } else {
        d2.iter().map(|&d| (-beta * (d - min)).exp()).collect()
    };
    let total: f64 = weights.iter().sum();
    TopicDistribution(weights.into_iter().map(|w| w / total).collect())
}

pub fn soft_assign(row: &[f64], model: &TopicModel, beta: f64) -> TopicDistribution {
    soft_assign_reduced(&model.projection.transform_row(row), &model.centroids, beta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeRecord {
    /// Index of the absorbed topic in the numbering before this merge.
    pub from: usize,
    pub into: usize,
    pub from_label: String,
    pub into_label: String,
    pub prevalence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneOutcome {
    pub model: TopicModel,
    pub assignments: Vec<usize>,
    pub merges: Vec<MergeRecord>,
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn merge_keywords(a: &[Keyword], wa: f64, b: &[Keyword], wb: f64, top: usize) -> Vec<Keyword> {
    let mut acc: BTreeMap<&str, f64> = BTreeMap::new();
    for (list, w) in [(a, wa), (b, wb)] {
        for k in list {
            *acc.entry(k.term.as_str()).or_insert(0.0) += w * k.weight;
        }
    }
    let mut v: Vec<Keyword> = acc
        .into_iter()
        .map(|(t, weight)| Keyword {
            term: t.to_string(),
            weight,
        })
        .collect();
    v.sort_by(|x, y| y.weight.total_cmp(&x.weight).then(x.term.cmp(&y.term)));
    v.truncate(top.max(1));
    v
}

fn merge_into(model: &mut TopicModel, assignments: &mut [usize], from: usize, into: usize) {
    let (pf, pi) = (model.prevalence[from], model.prevalence[into]);
    let w = if pf + pi > 0.0 { pf / (pf + pi) } else { 0.5 };
    let merged: Vec<f64> = model
        .centroids
        .row(from)
        .iter()
        .zip(model.centroids.row(into))
        .map(|(a, b)| w * a + (1.0 - w) * b)
        .collect();
    model.centroids.row_mut(into).copy_from_slice(&merged);
    let top = model.keywords[into].len().max(model.keywords[from].len());
    model.keywords[into] = merge_keywords(&model.keywords[from], w, &model.keywords[into], 1.0 - w, top);
    model.prevalence[into] = pf + pi;

    let keep: Vec<usize> = (0..model.k()).filter(|&t| t != from).collect();
    let rows: Vec<Vec<f64>> = keep.iter().map(|&t| model.centroids.row(t).to_vec()).collect();
    model.centroids = Matrix::from_rows(&rows).expect("uniform rows");
    model.keywords = keep.iter().map(|&t| model.keywords[t].clone()).collect();
    model.prevalence = keep.iter().map(|&t| model.prevalence[t]).collect();
    model.labels = keep.iter().map(|&t| model.labels[t].clone()).collect();
    for a in assignments.iter_mut() {
        if *a == from {
            *a = into;
        }
        if *a > from {
            *a -= 1;
        }
    }
}

/// Folds topics below `min_prevalence` into the topic with the most similar
/// centroid (cosine) until every remaining topic reaches the threshold.
///
/// The below-threshold topic closest to any other topic is merged first
/// (ties go to the less prevalent one), so fragments of one theme coalesce
/// before an isolated small cluster is absorbed. Document assignments are
/// relabeled, never dropped.
pub fn prune_topics(model: &TopicModel, assignments: &[usize], min_prevalence: f64) -> Result<PruneOutcome> {
    if !(0.0..=1.0).contains(&min_prevalence) {
        return Err(Error::InvalidArgument(format!(
            "no topic can reach prevalence threshold {min_prevalence}"
        )));
    }
    if assignments.iter().any(|&a| a >= model.k()) {
        return Err(Error::InvalidArgument("assignment outside topic range".into()));
    }
    let mut model = model.clone();
    let mut assignments = assignments.to_vec();
    let n = assignments.len().max(1) as f64;
    let mut counts = vec![0usize; model.k()];
    assignments.iter().for_each(|&a| counts[a] += 1);
    model.prevalence = counts.iter().map(|&c| c as f64 / n).collect();

    let mut merges = Vec::new();
    while model.k() > 1 {
        let nearest = |from: usize| {
            (0..model.k())
                .filter(|&t| t != from)
                .map(|t| (cosine(model.centroids.row(from), model.centroids.row(t)), t))
                .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)))
                .unwrap()
        };
        let Some((_, from, into)) = (0..model.k())
            .filter(|&t| model.prevalence[t] < min_prevalence)
            .map(|t| {
                let (sim, into) = nearest(t);
                (sim, t, into)
            })
            .max_by(|a, b| {
                a.0.total_cmp(&b.0)
                    .then(model.prevalence[b.1].total_cmp(&model.prevalence[a.1]))
                    .then(b.1.cmp(&a.1))
            })
        else {
            break;
        };
        merges.push(MergeRecord {
            from,
            into,
            from_label: model.labels[from].clone(),
            into_label: model.labels[into].clone(),
            prevalence: model.prevalence[from],
        });
        merge_into(&mut model, &mut assignments, from, into);
    }
    Ok(PruneOutcome {
        model,
        assignments,
        merges,
    })
}

/// Researcher audit applied on top of a fitted model: explicit merges
/// (in order, indices refer to the numbering at the time of each merge)
/// followed by label overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TopicEdits {
    #[serde(default)]
    pub merges: Vec<(usize, usize)>,
    #[serde(default)]
    pub renames: BTreeMap<usize, String>,
}

pub fn apply_edits(model: &TopicModel, assignments: &[usize], edits: &TopicEdits) -> Result<PruneOutcome> {
    let mut model = model.clone();
    let mut assignments = assignments.to_vec();
    let mut merges = Vec::new();
    for &(from, into) in &edits.merges {
        if from == into || from >= model.k() || into >= model.k() {
            return Err(Error::InvalidArgument(format!("invalid merge {from} -> {into}")));
        }
        merges.push(MergeRecord {
            from,
            into,
            from_label: model.labels[from].clone(),
            into_label: model.labels[into].clone(),
            prevalence: model.prevalence[from],
        });
        merge_into(&mut model, &mut assignments, from, into);
    }
    for (&t, label) in &edits.renames {
        *model
            .labels
            .get_mut(t)
            .ok_or_else(|| Error::InvalidArgument(format!("rename of unknown topic {t}")))? = label.clone();
    }
    Ok(PruneOutcome {
        model,
        assignments,
        merges,
    })
}
