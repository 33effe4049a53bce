use thiserror::Error;

/// Errors produced by the causalfire pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("empty file: {0}")]
    EmptyFile(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),

    #[error("non-numeric cell at row {row}, column `{column}`: {value:?}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("column `{0}` has zero variance")]
    ZeroVariance(String),

    #[error("degenerate treatment on `{column}`: every value is on one side of {threshold}")]
    DegenerateTreatment { column: String, threshold: f64 },

    #[error("treatment `{column}` needs at least 2 treated and 2 control rows (got {treated}/{control})")]
    UnbalancedTreatment {
        column: String,
        treated: usize,
        control: usize,
    },

    #[error("{bins} bins requested but column `{column}` has only {distinct} distinct values")]
    TooManyBins {
        column: String,
        bins: usize,
        distinct: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("duplicate node `{0}`")]
    DuplicateNode(String),

    #[error("edge {0} -> {1} already present")]
    DuplicateEdge(String, String),

    #[error("self-loop on `{0}`")]
    SelfLoop(String),

    #[error("adding edge would create cycle {}", .0.join(" -> "))]
    Cycle(Vec<String>),

    #[error("inconsistent constraints: {0}")]
    InconsistentConstraints(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("structure learning did not converge after {iterations} outer iterations (acyclicity penalty {penalty:e})")]
    NonConvergence { iterations: usize, penalty: f64 },

    #[error("singular design matrix; collinear columns: {}", .0.join(", "))]
    Singular(Vec<String>),

    #[error("invalid causal query: {0}")]
    InvalidQuery(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("interventions act on inputs; `{0}` is the outcome")]
    InterveneOnOutcome(String),

    #[error("dot parse error: {0}")]
    DotParse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
