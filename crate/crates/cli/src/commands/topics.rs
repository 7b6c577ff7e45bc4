use ghcf_core::models::Signal;
use ghcf_core::topics::{aggregate_profiles, fit_topics, load_embeddings, write_profiles_csv, ProfileNorm};
use ghcf_core::Error;
use log::info;
use serde_json::json;

use super::{ensure_dir, write_json};
use crate::layout::Stage;
use crate::manifest::RunManifest;
use crate::pipeline::{load_corpus, Pipeline};

/// Fits the topic model on every retained review with text, then writes
/// per-fold topic and raw-embedding profiles built from train interactions only.
pub fn cmd_topics(p: &Pipeline) -> anyhow::Result<RunManifest> {
    let l = &p.layout;
    let prepare = p.require_prepare()?;
    let digest = p.embeddings_digest()?;
    let corpus = load_corpus(l)?;
    let (emb_path, index_path) = p.embedding_paths();
    let all = load_embeddings(&emb_path, &index_path)?;

    let reviewed: Vec<_> = corpus
        .filtered
        .retained
        .iter()
        .filter(|i| i.review_text.as_deref().is_some_and(|t| !t.trim().is_empty()))
        .collect();
    if reviewed.is_empty() {
        return Err(Error::InvalidArgument("no retained interaction carries review text".into()).into());
    }
    let ids: Vec<String> = reviewed.iter().map(|i| i.review_id()).collect();
    let emb = all.aligned_to(&ids)?;
    let texts: Vec<&str> = reviewed.iter().map(|i| i.review_text.as_deref().unwrap_or("")).collect();
    let fit = fit_topics(&emb, &texts, &p.cfg.topics, p.cfg.seed)?;

    let catalog = &corpus.filtered.catalog;
    let owners: Vec<(usize, usize)> = reviewed
        .iter()
        .map(|i| {
            let u = catalog.user_index(&i.user_id).expect("retained user is catalogued");
            let it = catalog.item_index(&i.item_id).expect("retained item is catalogued");
            (u, it)
        })
        .collect();
    let vectors: Vec<Vec<f64>> = (0..emb.n_rows).map(|r| emb.row(r).iter().map(|&v| v as f64).collect()).collect();

    ensure_dir(&l.stage_dir(Stage::Topics))?;
    fit.model.save_json(&l.topic_model())?;
    let mut w = csv::Writer::from_path(l.review_topics()).map_err(Error::from)?;
    let mut header = vec!["review_id".to_string(), "topic".to_string()];
    header.extend((1..=fit.model.k()).map(|k| format!("p_{k}")));
    w.write_record(&header).map_err(Error::from)?;
    for ((id, topic), dist) in ids.iter().zip(&fit.assignments).zip(&fit.distributions) {
        let mut rec = vec![id.clone(), topic.to_string()];
        rec.extend(dist.iter().map(|x| format!("{x:e}")));
        w.write_record(&rec).map_err(Error::from)?;
    }
    w.flush().map_err(|e| Error::io(l.review_topics(), e))?;

    let mut m = RunManifest::new(Stage::Topics, &p.cfg.dataset, p.topics_hash(&prepare.config_hash, &digest)?, p.cfg.seed)
        .upstream(Stage::Prepare, &prepare.config_hash);
    let mut fold_notes = Vec::new();
    for fold in &corpus.folds {
        let topic = aggregate_profiles(&fit.distributions, &owners, &fold.train, ProfileNorm::Simplex)?;
        let text = aggregate_profiles(&vectors, &owners, &fold.train, ProfileNorm::L2)?;
        for (signal, prof) in [(Signal::Topic, &topic), (Signal::Text, &text)] {
            let (u, i) = l.profiles(fold.fold_id, signal);
            ensure_dir(u.parent().expect("profile path has a parent"))?;
            write_profiles_csv(&u, &prof.users)?;
            write_profiles_csv(&i, &prof.items)?;
            m.record(l, &u)?;
            m.record(l, &i)?;
        }
        fold_notes.push(json!({
            "fold": fold.fold_id,
            "users_without_reviews": topic.user_fallback.iter().filter(|&&f| f).count(),
            "items_without_reviews": topic.item_fallback.iter().filter(|&&f| f).count(),
        }));
    }
    let summary = json!({
        "reviews": ids.len(),
        "fitted_clusters": p.cfg.topics.k,
        "retained_topics": fit.model.k(),
        "labels": fit.model.labels,
        "prevalence": fit.model.prevalence,
        "initial_prevalence": fit.initial_prevalence,
        "merges": fit.merges,
        "inertia": fit.inertia,
        "distributions": "post-pruning",
        "folds": fold_notes,
    });
    write_json(&l.topics_summary(), &summary)?;
    for path in [l.topic_model(), l.review_topics(), l.topics_summary()] {
        m.record(l, &path)?;
    }
    m.folds = corpus.folds.iter().map(|f| f.fold_id).collect();
    m.summary = json!({ "retained_topics": fit.model.k(), "merges": fit.merges.len() });
    m.write(l, Stage::Topics)?;
    info!("topics: {} retained of {} fitted, {} merges", fit.model.k(), p.cfg.topics.k, fit.merges.len());
    Ok(m)
}
