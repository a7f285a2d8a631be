use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid matrix file: {0}")]
    Format(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("graph is disconnected: vertex {0} cannot reach vertex {1}")]
    Disconnected(usize, usize),

    #[error("induced subgraph is disconnected into {} components: {}", .0.len(), fmt_components(.0))]
    DisconnectedComponents(Vec<Vec<usize>>),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Whether this error stems from reading or decoding input rather than
    /// from a numerical or contract failure.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Parse { .. } | Error::Format(_))
    }
}

fn fmt_components(components: &[Vec<usize>]) -> String {
    components
        .iter()
        .map(|c| {
            let shown: Vec<String> = c.iter().take(8).map(|v| v.to_string()).collect();
            if c.len() > 8 {
                format!("[{}, ... ({} vertices)]", shown.join(", "), c.len())
            } else {
                format!("[{}]", shown.join(", "))
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}
