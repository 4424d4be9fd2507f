use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown unit `{0}`")]
    UnknownUnit(String),

    #[error("cannot convert {from} to {to}: incompatible dimensions")]
    IncompatibleUnits { from: String, to: String },

    #[error("seed coupling vector is identically zero")]
    ZeroSeed,

    #[error("Lanczos breakdown at step {step}: residual norm {residual:e}")]
    Breakdown { step: usize, residual: f64 },

    #[error(
        "block-Lanczos seeds are (nearly) parallel (sin angle = {sine:e}); \
         the two channels share one chain, use a single-seed Lanczos mapping instead"
    )]
    DegenerateSeeds { sine: f64 },

    #[error("unknown channel `{0}`")]
    UnknownChannel(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dense dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("numerical failure at step {step} (t = {time}): {detail}")]
    NumericalFailure {
        step: usize,
        time: f64,
        detail: String,
    },

    #[error("configuration error:\n{}", format_issues(.0))]
    Config(Vec<ConfigIssue>),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status for this error: 2 for bad input, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NumericalFailure { .. } | Error::Breakdown { .. } => 3,
            Error::Io(_) | Error::Checkpoint(_) => 1,
            _ => 2,
        }
    }
}

/// A single problem found while validating a run configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    /// 1-based line number, when the issue is tied to a line of the file.
    pub line: Option<usize>,
    /// Fully qualified key, `section.key`.
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub type Result<T> = std::result::Result<T, Error>;
