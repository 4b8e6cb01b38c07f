use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("malformed header at line 1: {0}")]
    MalformedHeader(String),

    #[error("dimension mismatch at line {line}: expected {expected} components, found {found}")]
    RowDimension { line: usize, expected: usize, found: usize },

    #[error("duplicate token {token:?} at line {line}")]
    DuplicateToken { line: usize, token: String },

    #[error("non-finite value at line {line}")]
    NonFinite { line: usize },

    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("row count mismatch: header declares {expected} rows, file has {found}")]
    RowCount { expected: usize, found: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("undefined similarity: zero vector")]
    ZeroVector,

    #[error("empty embedding space")]
    EmptySpace,

    #[error("word {0:?} not in vocabulary of {1:?}")]
    MissingWord(String, String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("space {0:?} has no frequency data")]
    NoFrequencies(String),

    #[error("no shared words between {0:?} and {1:?}")]
    NoSharedWords(String, String),

    #[error("rotation map {map_from:?}->{map_to:?} does not fit spaces {from:?}->{to:?}")]
    MapMismatch {
        map_from: String,
        map_to: String,
        from: String,
        to: String,
    },

    #[error("empty vocabulary after min_count filtering")]
    EmptyVocabulary,

    #[error("corpus too short: {tokens} retained tokens for window {window}")]
    CorpusTooShort { tokens: u64, window: usize },

    #[error("no hashtags with frequency >= {0}")]
    NoHashtags(u64),

    #[error("silhouette needs at least two clusters")]
    SingleCluster,

    #[error("all records are missing-word sentinels")]
    AllSentinel,

    #[error("not enough usable pairs for correlation: {0} (need 3)")]
    TooFewPairs(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::MalformedHeader(_) => "malformed_header",
            Error::RowDimension { .. } => "row_dimension",
            Error::DuplicateToken { .. } => "duplicate_token",
            Error::NonFinite { .. } => "non_finite",
            Error::MalformedRow { .. } => "malformed_row",
            Error::RowCount { .. } => "row_count",
            Error::DimensionMismatch(..) => "dimension_mismatch",
            Error::ZeroVector => "zero_vector",
            Error::EmptySpace => "empty_space",
            Error::MissingWord(..) => "missing_word",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::NoFrequencies(_) => "no_frequencies",
            Error::NoSharedWords(..) => "no_shared_words",
            Error::MapMismatch { .. } => "map_mismatch",
            Error::EmptyVocabulary => "empty_vocabulary",
            Error::CorpusTooShort { .. } => "corpus_too_short",
            Error::NoHashtags(_) => "no_hashtags",
            Error::SingleCluster => "single_cluster",
            Error::AllSentinel => "all_sentinel",
            Error::TooFewPairs(_) => "too_few_pairs",
            Error::Config(_) => "config",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
