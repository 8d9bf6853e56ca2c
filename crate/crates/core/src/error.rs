use std::path::PathBuf;

/// Errors produced by the audit toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: column `{column}`: {message}")]
    Parse {
        path: String,
        line: u64,
        column: String,
        message: String,
    },

    #[error("{path}:{line}: score {value} is outside [0, 1]")]
    ScoreOutOfRange { path: String, line: u64, value: String },

    #[error("failed to read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A statistic that has no value on the given input, e.g. an AUC with
    /// an empty class.
    #[error("undefined {0}")]
    Undefined(String),

    #[error("no images for exam {0}")]
    NoImages(String),

    #[error("attribute `{0}` is not declared")]
    UnknownAttribute(String),

    #[error("cell {value} x {label} of attribute `{attribute}` is empty")]
    EmptyCell {
        attribute: String,
        value: String,
        label: String,
    },

    #[error(
        "target prevalence {target} unreachable by downsampling for {attribute}={value}; \
         feasible range [{min:.6}, {max:.6}]"
    )]
    UnreachablePrevalence {
        attribute: String,
        value: String,
        target: f64,
        min: f64,
        max: f64,
    },

    #[error("bootstrap gave up after {attempts} degenerate redraws")]
    DegenerateBootstrap { attempts: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by user input (bad files, flags or schemas),
    /// as opposed to failures inside a computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::ScoreOutOfRange { .. }
                | Error::Io { .. }
                | Error::Schema(_)
                | Error::InvalidParameter(_)
                | Error::UnknownAttribute(_)
                | Error::NoImages(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn undefined_auc() -> Self {
        Error::Undefined("AUC: a class is empty".into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
