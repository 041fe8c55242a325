use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("node index {index} out of range for a ring of {nodes} nodes")]
    IndexOutOfRange { index: usize, nodes: usize },

    #[error("bias K = {bias} outside 0..={table_len}")]
    InvalidBias { bias: u32, table_len: u32 },

    #[error("no inside route: the hub has fewer than two links")]
    NoRoute,

    #[error("inconsistent input lengths: {0}")]
    InconsistentLengths(String),

    #[error("instance with {agents} agents is too large to enumerate (limit {limit})")]
    InstanceTooLarge { agents: usize, limit: usize },

    #[error("invalid sweep spec, field `{field}`: {message}")]
    InvalidSpec { field: &'static str, message: String },

    #[error("nothing to write: no result rows")]
    EmptyRows,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn spec(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidSpec {
            field,
            message: message.into(),
        }
    }
}
