//! One function per subcommand. Each returns the manifest it wrote.

mod compare;
mod eval;
mod prepare;
mod report;
mod synth;
mod topics;
mod train;

pub use compare::cmd_compare;
pub use eval::cmd_eval;
pub use prepare::cmd_prepare;
pub use report::{cmd_report, render_report};
pub use synth::cmd_synth;
pub use topics::cmd_topics;
pub use train::{cmd_train, TRAIN_LOG_FILE};

use std::path::Path;

use ghcf_core::Error;

pub(crate) fn ensure_dir(path: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub(crate) fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}
