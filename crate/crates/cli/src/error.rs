use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    ConfigParse(String),
    #[error("{op}: {source}")]
    Operation {
        op: &'static str,
        #[source]
        source: szego_core::Error,
    },
    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    /// Wraps a numerical error with the name of the operation that raised it.
    pub fn op(op: &'static str, source: szego_core::Error) -> Self {
        CliError::Operation { op, source }
    }
}
