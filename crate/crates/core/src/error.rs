use std::fmt;
use std::path::PathBuf;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// A rejected input row, located by its 1-based line number.
#[derive(Debug, Clone, PartialEq)]
pub enum RowError {
    Parse { line: u64, message: String },
    Range { line: u64, column: String, value: String, scale: &'static str },
    DuplicateId { line: u64, cohort: String, student_id: String },
}

impl RowError {
    pub fn line(&self) -> u64 {
        match self {
            RowError::Parse { line, .. }
            | RowError::Range { line, .. }
            | RowError::DuplicateId { line, .. } => *line,
        }
    }
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowError::Parse { line, message } => write!(f, "line {line}: parse error: {message}"),
            RowError::Range { line, column, value, scale } => {
                write!(f, "line {line}: {column} = {value} is out of range for the {scale} scale")
            }
            RowError::DuplicateId { line, cohort, student_id } => write!(
                f,
                "line {line}: duplicate student_id {student_id:?} in cohort {cohort:?}"
            ),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("gain is undefined when the initial score is 1")]
    GainUndefined,
    #[error("fractional increase is undefined when the initial score is 0")]
    IncreaseUndefined,
    #[error("logarithmic difference is undefined when a score is 0")]
    LogUndefined,
    #[error("value {0} lies outside the unit interval")]
    OutOfRange(f64),
    #[error("change value of kind {found} where {expected} was required")]
    KindMismatch { expected: &'static str, found: &'static str },
    #[error("gain value {0} exceeds 1")]
    GainAboveOne(f64),
    #[error("degenerate sample: {0}")]
    DegenerateSample(&'static str),
    #[error("empty sample")]
    EmptySample,
    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid cohort specification: {0}")]
    Spec(String),
    #[error("{} invalid row(s):\n{}", .0.len(), join_rows(.0))]
    InvalidRows(Vec<RowError>),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

fn join_rows(rows: &[RowError]) -> String {
    rows.iter().map(|r| format!("  {r}")).collect::<Vec<_>>().join("\n")
}

impl Error {
    /// Wraps `self` with a human-readable location such as a cohort label.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// The innermost error once context layers are stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code: 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Io { .. } => 2,
            _ => 1,
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| e.context(context()))
    }
}
