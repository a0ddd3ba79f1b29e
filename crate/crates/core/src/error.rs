use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("node {index} out of range for a graph with {num_nodes} nodes")]
    NodeIndex { index: usize, num_nodes: usize },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("rank-deficient design: column(s) {} are collinear with earlier columns", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("fit did not converge: {0}")]
    Convergence(String),

    #[error("empty group: {0}")]
    EmptyGroup(String),

    #[error("bootstrap aborted: {failed} of {total} replicate fits failed to converge")]
    BootstrapAborted { failed: usize, total: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable tag, used in the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Validation(_) => "validation",
            Error::Parse { .. } => "parse",
            Error::NodeIndex { .. } => "node_index",
            Error::Capacity(_) => "capacity",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::Convergence(_) => "convergence",
            Error::EmptyGroup(_) => "empty_group",
            Error::BootstrapAborted { .. } => "bootstrap_aborted",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn from_json(err: serde_json::Error, source: &str) -> Self {
        Error::Parse {
            context: format!("{source} line {} column {}", err.line(), err.column()),
            message: err.to_string(),
        }
    }
}
