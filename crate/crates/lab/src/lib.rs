//! File formats, the staged pipeline driver and the command implementations
//! behind the `hypercyclic` binary.
//!
//! Exit codes: 0 success, 2 usage or range error, 3 stage or check failure,
//! 4 ill-conditioned Gram matrix.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

pub mod commands;
pub mod config;
pub mod formats;
pub mod pipeline;

pub use config::PipelineConfig;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{0}")]
    Usage(String),
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: hypercyclic_core::Error,
    },
    #[error("writing {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("checks failed: {}", .0.join(", "))]
    ChecksFailed(Vec<String>),
}

impl LabError {
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Usage(_) => 2,
            LabError::Stage {
                source: hypercyclic_core::Error::IllConditioned { .. },
                ..
            } => 4,
            LabError::Stage { .. } | LabError::Io { .. } | LabError::ChecksFailed(_) => 3,
        }
    }

    /// Range and domain errors from the library are usage errors for the
    /// standalone commands.
    pub fn classify(stage: &'static str, source: hypercyclic_core::Error) -> Self {
        use hypercyclic_core::Error as E;
        match source {
            E::Range { .. } | E::InvalidInput(_) | E::OutOfDomain { .. } => LabError::Usage(source.to_string()),
            source => LabError::Stage { stage, source },
        }
    }
}

pub(crate) fn io_error(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> LabError + '_ {
    move |source| LabError::Io {
        path: path.to_path_buf(),
        source,
    }
}
