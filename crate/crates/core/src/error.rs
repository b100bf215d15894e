//! Error type shared by every module of the crate.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the pipeline, from image decoding
/// to model fitting and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The file could not be opened or read.
    #[error("cannot read {path}: {source}")]
    UnreadableFile {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The file was readable but not decodable as a supported raster format.
    #[error("unsupported image format in {path}: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },

    /// A decoded image contains zero pixels.
    #[error("image {path} has zero pixels")]
    EmptyImage { path: PathBuf },

    /// A manifest or feature-table row has the wrong column count or an
    /// unparsable field.
    #[error("malformed row {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    /// The manifest has a header but no data rows.
    #[error("manifest contains no cases")]
    EmptyManifest,

    /// All sample spread measures are zero, so the bandwidth rule would
    /// produce h = 0 and the density estimate would be undefined.
    #[error("degenerate sample: all spread measures are zero")]
    DegenerateSample,

    /// A batch query expected ascending inputs.
    #[error("query points must be sorted ascending")]
    UnsortedQueries,

    /// The pooled class covariance cannot be inverted reliably.
    #[error("pooled covariance is singular or too ill-conditioned (condition {condition:.3e})")]
    SingularCovariance { condition: f64 },

    /// A training operation needs both labels but saw only one.
    #[error("training data contains a single class")]
    SingleClassData,

    /// The optimizer produced non-finite coefficients, which with no ridge
    /// penalty signals complete separation.
    #[error("fit diverged (non-finite coefficients); with ridge 0 this signals separable data")]
    Diverged,

    /// A feature or label fed to the optimizer was not finite.
    #[error("non-finite value in input data")]
    NonFiniteInput,

    /// The observed-information matrix cannot be inverted.
    #[error("observed information matrix is singular")]
    SingularInformation,

    /// Paired sequences have different lengths.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// An operation received an empty sequence.
    #[error("empty input")]
    EmptyInput,

    /// A class has too few cases for the requested fold count, or a fold
    /// would train on a single class.
    #[error("too few cases: {reason}")]
    TooFewCases { reason: String },

    /// Every case in a batch failed to decode or was degenerate.
    #[error("all {count} cases failed feature extraction")]
    AllCasesFailed { count: usize },

    /// A persisted file is missing its version marker or declares an
    /// incompatible one.
    #[error("schema mismatch: {reason}")]
    SchemaMismatch { reason: String },

    /// CSV-level I/O or parse failure outside of per-row validation.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Plain I/O failure on an output path.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
