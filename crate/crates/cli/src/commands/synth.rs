use ghcf_core::corpus::{synth_corpus, write_jsonl};
use log::info;
use serde_json::json;

use super::{ensure_dir, write_json};
use crate::layout::Stage;
use crate::manifest::RunManifest;
use crate::pipeline::Pipeline;

/// Writes the planted-preference corpus, its review embeddings and the ground truth.
pub fn cmd_synth(p: &Pipeline) -> anyhow::Result<RunManifest> {
    let l = &p.layout;
    let corpus = synth_corpus(&p.cfg.synth, p.cfg.seed)?;
    ensure_dir(&l.stage_dir(Stage::Synth))?;
    write_jsonl(&l.raw_interactions(), &corpus.interactions)?;
    corpus.embeddings.save(&l.raw_embeddings(), &l.raw_embedding_index())?;
    write_json(&l.raw_truth(), &corpus.truth)?;

    let mut m = RunManifest::new(Stage::Synth, &p.cfg.dataset, p.synth_hash()?, p.cfg.seed);
    for path in [l.raw_interactions(), l.raw_embeddings(), l.raw_embedding_index(), l.raw_truth()] {
        m.record(l, &path)?;
    }
    m.summary = json!({
        "interactions": corpus.interactions.len(),
        "users": p.cfg.synth.n_users,
        "items": p.cfg.synth.n_items,
        "topics": p.cfg.synth.n_topics,
        "embedding_dim": corpus.embeddings.dim,
    });
    m.write(l, Stage::Synth)?;
    info!("synth: {} interactions", corpus.interactions.len());
    Ok(m)
}
