use std::fmt;
use std::path::PathBuf;

/// One failed validation rule, tagged with a stable machine-readable category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub category: &'static str,
    pub message: String,
}

impl Violation {
    pub fn new(category: &'static str, message: impl Into<String>) -> Self {
        Self {
            category,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.category, self.message)
    }
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {}", join(.0))]
    Validation(Vec<Violation>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("rate fit failed: {0}")]
    Fit(String),

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub fn validation(category: &'static str, message: impl Into<String>) -> Self {
        Error::Validation(vec![Violation::new(category, message)])
    }

    /// Category reported on stderr by the command line front end.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Validation(v) if v.len() == 1 => v[0].category,
            Error::Validation(_) => "validation",
            Error::Dimension { .. } => "dimension_mismatch",
            Error::Domain(_) => "domain",
            Error::Fit(_) => "fit",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Serialize(_) => "serialize",
        }
    }

    /// All violation categories, for validation errors.
    pub fn categories(&self) -> Vec<&'static str> {
        match self {
            Error::Validation(v) => v.iter().map(|x| x.category).collect(),
            other => vec![other.category()],
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Stable category names.
pub mod category {
    pub const NON_IDENTIFIABLE: &str = "non_identifiable_channel";
    pub const DISCONNECTED_GRAPH: &str = "disconnected_graph";
    pub const PLAIN_WITH_NOISE: &str = "plain_mode_with_noise";
    pub const CONSTRAINT_SET: &str = "constraint_set";
    pub const REGRESSOR: &str = "regressor";
    pub const PRIVACY_BUDGET: &str = "privacy_budget";
    pub const CHANNEL: &str = "channel_probability";
    pub const GAIN: &str = "gain";
    pub const STEP_SCHEDULE: &str = "step_schedule";
    pub const GRAPH: &str = "graph";
    pub const DIMENSION: &str = "dimension_mismatch";
    pub const RATE_CONDITIONS: &str = "rate_conditions";
    pub const RUN: &str = "run";
}
