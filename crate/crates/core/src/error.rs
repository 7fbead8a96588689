use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("ratio beta/alpha = {rho} outside the feasible interval ({lower}, {upper})")]
    InfeasibleRatio { rho: f64, lower: f64, upper: f64 },

    /// Only a {0,1} resampling law preserves variance when both expansions are zero.
    #[error("no structure-preserving parameters: eps0 + eps1 must be positive")]
    NoPreservingParams,

    /// `ε1 ≥ 1 + ε0` leaves no ratio with `α ≥ β` on the curve.
    #[error("no admissible ratio beta/alpha: lower end {lower} is not below upper end {upper}")]
    EmptyRatioInterval { lower: f64, upper: f64 },

    #[error("delta = {delta} unreachable on the variance-preserving curve (u ranges over [{min_u}, {max_u}])")]
    Infeasible { delta: f64, min_u: f64, max_u: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("design matrix is rank deficient (condition estimate {condition:e})")]
    RankDeficient { condition: f64 },

    #[error("unknown category {category:?} in column {column:?}")]
    UnknownCategory { column: String, category: String },

    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors that signal an infeasible request rather than bad input.
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self,
            Error::NoPreservingParams
                | Error::Infeasible { .. }
                | Error::InfeasibleRatio { .. }
                | Error::EmptyRatioInterval { .. }
                | Error::TooFewRows(_)
                | Error::SchemaMismatch(_)
                | Error::RankDeficient { .. }
        )
    }
}
