//! Pipeline driver behind the `ghcf` binary.
//!
//! Stages run in order `synth → prepare → topics → train → eval → compare →
//! report`, each reading the artifacts of the previous ones under a data root
//! (see [`layout`]) and writing a manifest that ties its outputs to the
//! config hash that produced them.

pub mod commands;
pub mod config;
pub mod error;
pub mod layout;
pub mod manifest;
pub mod pipeline;

pub use config::{Overrides, PipelineConfig, Source};
pub use pipeline::{Pipeline, Selection};

/// Every stage, end to end, for all configured variants and folds.
pub fn run_all(p: &Pipeline) -> anyhow::Result<()> {
    if matches!(p.cfg.source, Source::Synthetic) {
        commands::cmd_synth(p)?;
    }
    commands::cmd_prepare(p)?;
    if p.needs_topics()? {
        commands::cmd_topics(p)?;
    }
    commands::cmd_train(p, &Selection::all())?;
    commands::cmd_eval(p, &Selection::all())?;
    commands::cmd_compare(p)?;
    commands::cmd_report(p)?;
    Ok(())
}
