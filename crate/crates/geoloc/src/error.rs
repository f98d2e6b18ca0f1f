use std::path::{Path, PathBuf};

use geoloc_core::analysis::AnalysisError;
use geoloc_core::centrality::CentralityError;
use geoloc_core::estimator::EstimateError;
use geoloc_core::geo::GeoError;
use geoloc_core::graph::GraphError;
use geoloc_core::synth::SynthError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("digest mismatch: {what} was computed for graph {expected}, but {} has digest {actual}", graph.display())]
    DigestMismatch {
        what: String,
        graph: PathBuf,
        expected: String,
        actual: String,
    },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Centrality(#[from] CentralityError),
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub fn format(path: &Path, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// 1 usage, 2 data or validation, 3 numeric non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Centrality(CentralityError::NonConvergence { .. }) => 3,
            Error::Centrality(CentralityError::InvalidParams(_)) => 1,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {$(
        impl From<$t> for Error {
            fn from(e: $t) -> Self {
                Error::Data(e.to_string())
            }
        }
    )*};
}

data_error!(GraphError, GeoError, EstimateError, SynthError);

impl From<AnalysisError> for Error {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Centrality(c) => Error::Centrality(c),
            other => Error::Data(other.to_string()),
        }
    }
}
