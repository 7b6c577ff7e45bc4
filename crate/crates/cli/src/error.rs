//! Error classes and their process exit codes.

use std::fmt;
use std::path::PathBuf;

use ghcf_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_MISSING_ARTIFACT: i32 = 3;
pub const EXIT_HASH_MISMATCH: i32 = 4;
pub const EXIT_DATA: i32 = 5;
pub const EXIT_PARTIAL: i32 = 6;

/// An upstream artifact that a stage needs is absent.
#[derive(Debug)]
pub struct MissingArtifact {
    pub path: PathBuf,
    /// Command that produces it.
    pub produced_by: &'static str,
}

impl fmt::Display for MissingArtifact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "missing artifact {} (run `ghcf {}` first)", self.path.display(), self.produced_by)
    }
}

impl std::error::Error for MissingArtifact {}

/// Some jobs of a stage failed; the others completed and were written.
#[derive(Debug)]
pub struct PartialFailure {
    pub stage: &'static str,
    pub failed: Vec<(String, String)>,
    pub total: usize,
}

impl fmt::Display for PartialFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} of {} jobs failed", self.stage, self.failed.len(), self.total)?;
        for (job, err) in &self.failed {
            write!(f, "\n  {job}: {err}")?;
        }
        Ok(())
    }
}

impl std::error::Error for PartialFailure {}

fn core_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Regex { .. } | Error::Unknown { .. } => EXIT_CONFIG,
        Error::HashMismatch { .. } => EXIT_HASH_MISMATCH,
        Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => EXIT_MISSING_ARTIFACT,
        Error::Io { .. } => EXIT_OTHER,
        Error::Csv(_)
        | Error::Json(_)
        | Error::MissingColumn(_)
        | Error::NoRows(_)
        | Error::EmptyCorpus
        | Error::InvalidArgument(_)
        | Error::Shape(_)
        | Error::NonFinite(_)
        | Error::DegenerateVector { .. }
        | Error::Format { .. } => EXIT_DATA,
    }
}

/// Exit code for the first classified error in the chain.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<PartialFailure>() {
            return EXIT_PARTIAL;
        }
        if cause.is::<MissingArtifact>() {
            return EXIT_MISSING_ARTIFACT;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return core_code(e);
        }
    }
    EXIT_OTHER
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_by_class() {
        let hash = anyhow::Error::new(Error::HashMismatch {
            what: "x".into(),
            expected: "a".into(),
            found: "b".into(),
        })
        .context("eval");
        assert_eq!(exit_code(&hash), EXIT_HASH_MISMATCH);
        let missing = std::io::Error::new(std::io::ErrorKind::NotFound, "gone");
        assert_eq!(exit_code(&Error::io("p", missing).into()), EXIT_MISSING_ARTIFACT);
        assert_eq!(exit_code(&Error::Config("x".into()).into()), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::EmptyCorpus.into()), EXIT_DATA);
        let partial = PartialFailure {
            stage: "train",
            failed: vec![("GHCF_Text/fold0".into(), "boom".into())],
            total: 2,
        };
        assert_eq!(exit_code(&partial.into()), EXIT_PARTIAL);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), EXIT_OTHER);
    }
}
