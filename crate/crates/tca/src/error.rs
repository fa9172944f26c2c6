use std::io;

use tca_core::TermError;

use crate::tool::ToolState;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The runtime is shutting down; blocked operations return this.
    #[error("interrupted by runtime shutdown")]
    Shutdown,
    /// The tool's output reached end of file. Repeats on every later receive.
    #[error("tool {id} closed its output")]
    ToolEof { id: String },
    #[error("tool {id}: cannot {op} while {state}")]
    ToolState {
        id: String,
        op: &'static str,
        state: ToolState,
    },
    #[error("tool {id}: cannot start `{program}`: {source}")]
    Spawn {
        id: String,
        program: String,
        #[source]
        source: io::Error,
    },
    #[error("tool {id}: write failed: {source}")]
    ToolWrite {
        id: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("source `{0}` is already registered")]
    DuplicateSource(String),
    #[error("this mux has already run")]
    MuxFinished,
    #[error("no channel `{0}`")]
    UnknownChannel(String),
    #[error("{process}: {message}")]
    Process { process: String, message: String },
    #[error("run needs at least one process")]
    NoProcesses,
    #[error("this runtime has already run")]
    AlreadyRan,
}

impl Error {
    pub fn is_shutdown(&self) -> bool {
        matches!(self, Error::Shutdown)
    }
}
