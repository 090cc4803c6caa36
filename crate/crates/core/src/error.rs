//! Error type shared by every module of the crate.

use std::path::PathBuf;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while reading data, running the network or
/// handling model files.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Operand shapes do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A NaN or infinity appeared in a tensor.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// An index is outside the table it addresses.
    #[error("index {index} out of bounds for {what} of size {size}")]
    Bounds {
        /// Offending index.
        index: usize,
        /// Size of the addressed collection.
        size: usize,
        /// Name of the addressed collection.
        what: &'static str,
    },

    /// A column file could not be parsed.
    #[error("{path}:{line}: {message}")]
    Parse {
        /// Source file (or `<input>` for in-memory data).
        path: PathBuf,
        /// 1-based line number.
        line: usize,
        /// Description of the problem.
        message: String,
    },

    /// A corpus contains no sentences.
    #[error("corpus {0} contains no sentences")]
    EmptyCorpus(PathBuf),

    /// A label sequence violates the tagging scheme.
    #[error("invalid tag {label:?} at position {position}: {message}")]
    Scheme {
        /// 0-based position within the sequence.
        position: usize,
        /// The offending label.
        label: String,
        /// Description of the violated rule.
        message: String,
    },

    /// A pretrained embedding file is malformed.
    #[error("{path}:{line}: {message}")]
    EmbeddingLoad {
        /// Source file.
        path: PathBuf,
        /// 1-based line number.
        line: usize,
        /// Description of the problem.
        message: String,
    },

    /// A caller broke an API contract (e.g. a cache reused or START used as an output label).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Exhaustive enumeration was requested for an instance that is too large.
    #[error("instance too large for enumeration: {labels}^{length} sequences exceeds {limit}")]
    TooLarge {
        /// Number of labels.
        labels: usize,
        /// Sequence length.
        length: usize,
        /// Maximum number of sequences allowed.
        limit: usize,
    },

    /// A model file is malformed, truncated or from another format.
    #[error("model file: {0}")]
    ModelFile(String),

    /// The trailing checksum of a model file does not match its contents.
    #[error("model file checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    Checksum {
        /// Checksum stored in the file.
        stored: u32,
        /// Checksum computed over the bytes read.
        computed: u32,
    },

    /// A run configuration is invalid.
    #[error("config: {0}")]
    Config(String),

    /// Underlying I/O failure.
    #[error("{path}: {source}")]
    Io {
        /// File being accessed.
        path: PathBuf,
        /// The I/O error.
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
