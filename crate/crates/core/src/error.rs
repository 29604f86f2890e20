use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("InvalidGraph: {0}")]
    InvalidGraph(String),

    #[error("IncompatibleInput: graph {index}: {reason}")]
    IncompatibleInput { index: usize, reason: String },

    #[error("EmptyCollection: a kernel needs at least one graph to fit")]
    EmptyCollection,

    #[error("InvalidSpec: {param}: {reason}")]
    InvalidSpec { param: String, reason: String },

    #[error("SizeLimit: graph has {n} vertices, at most {max} supported")]
    SizeLimit { n: usize, max: usize },

    #[error("InvalidShape: expected {expected}, found {found}")]
    InvalidShape { expected: String, found: String },

    #[error("NotFitted: transform called before fit")]
    NotFitted,

    #[error(
        "Divergent: lambda={lambda} times estimated spectral radius {rho:.6} is not below the \
         margin {margin}; lower lambda below {limit:.6}"
    )]
    Divergent {
        lambda: f64,
        rho: f64,
        margin: f64,
        limit: f64,
    },

    #[error("NumericalError: {0}")]
    Numerical(String),

    #[error("DegenerateKernel: {0}")]
    DegenerateKernel(String),

    #[error("weisfeiler_lehman level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("FetchError({}): {message}", status.map(|s| s.to_string()).unwrap_or_else(|| "network".into()))]
    Fetch {
        status: Option<u16>,
        message: String,
    },

    #[error("CorruptDataset: {}{}: {reason}", file.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    CorruptDataset {
        file: PathBuf,
        line: Option<usize>,
        reason: String,
    },

    #[error("ParseError: {}:{line}: {reason}", file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Coarse grouping used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Network, filesystem or dataset files.
    Io,
    /// Bad specification or incompatible input.
    Input,
    /// Numerical failure.
    Numerical,
}

impl Error {
    pub(crate) fn spec(param: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidSpec {
            param: param.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn incompatible(index: usize, reason: impl Into<String>) -> Self {
        Error::IncompatibleInput {
            index,
            reason: reason.into(),
        }
    }

    pub(crate) fn shape(expected: impl Into<String>, found: impl Into<String>) -> Self {
        Error::InvalidShape {
            expected: expected.into(),
            found: found.into(),
        }
    }

    /// Strips level wrappers added by the Weisfeiler-Lehman framework.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtLevel { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self.root() {
            Error::Fetch { .. }
            | Error::CorruptDataset { .. }
            | Error::Parse { .. }
            | Error::Io(_) => ErrorClass::Io,
            // a divergent walk is fixed by changing a parameter
            Error::Divergent { .. } => ErrorClass::Input,
            Error::Numerical(_) | Error::DegenerateKernel(_) => ErrorClass::Numerical,
            _ => ErrorClass::Input,
        }
    }
}
