//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input columns do not have full numerical rank (smallest singular
    /// value of the column-normalized matrix is at or below 1e-8).
    #[error("rank-deficient basis ({context})")]
    RankDeficient { context: String },

    /// Two matrices or vectors disagree on a dimension that must match.
    #[error("dimension mismatch in {what}: {left} vs {right}")]
    DimensionMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    /// Subspace arguments must be ordered smaller-dimension first.
    #[error("subspace order: first argument has dimension {left} > {right}; pass the smaller subspace first")]
    SubspaceOrder { left: usize, right: usize },

    /// Feature pairs must share one ambient dimension.
    #[error("mixed ambient dimensions: {0} vs {1}")]
    MixedAmbientDims(usize, usize),

    /// A 2D segment's endpoints are too close to define a direction.
    #[error("degenerate segment: endpoints are less than {min_px} px apart")]
    DegenerateSegment { min_px: f64 },

    /// A nonzero vector was required.
    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,

    /// The parameter-space segment passes through the origin, where the
    /// projection map is undefined.
    #[error("parameter segment passes through the origin near t = {t}")]
    PathThroughZero { t: f64 },

    /// A feature, correspondence, or result file violates its schema.
    #[error("schema error in {path}: {message}")]
    SchemaError { path: String, message: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// Translation search requires at least one rotation-stage inlier.
    #[error("empty inlier set: translation search needs at least one inlier")]
    EmptyInlierSet,

    /// The branch-and-bound queue exceeded its cap, which usually means
    /// the inlier threshold cannot separate the problem.
    #[error("priority queue exceeded {max} cubes; check the inlier threshold")]
    QueueOverflow { max: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable identifier used by the CLI when reporting to stderr.
    pub fn id(&self) -> &'static str {
        match self {
            Error::RankDeficient { .. } => "rank-deficient",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::SubspaceOrder { .. } => "subspace-order",
            Error::MixedAmbientDims(..) => "mixed-ambient-dims",
            Error::DegenerateSegment { .. } => "degenerate-segment",
            Error::ZeroVector => "zero-vector",
            Error::PathThroughZero { .. } => "path-through-zero",
            Error::SchemaError { .. } => "schema",
            Error::EmptyInput(_) => "empty-input",
            Error::EmptyInlierSet => "empty-inlier-set",
            Error::QueueOverflow { .. } => "queue-overflow",
            Error::InvalidConfig(_) => "invalid-config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
