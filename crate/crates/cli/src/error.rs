use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("geometry not found")]
    GeometryNotFound(String),
    #[error("data table not found")]
    DataNotFound(String),
    #[error("config not found")]
    ConfigNotFound(String),
    #[error("invalid config")]
    Config(String),
    #[error("solver failed")]
    Solve(#[from] laplace_rf::Error),
    #[error("could not write output")]
    Output(String),
}

/// What gets printed to stderr and written to `error.json`.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub error: String,
    pub detail: String,
    pub exit_code: i32,
}

impl CliError {
    /// 2 for bad input, 1 for failures while computing or writing.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::GeometryNotFound(_) | CliError::DataNotFound(_) | CliError::ConfigNotFound(_) | CliError::Config(_) => 2,
            CliError::Solve(_) | CliError::Output(_) => 1,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        let detail = match self {
            CliError::GeometryNotFound(d)
            | CliError::DataNotFound(d)
            | CliError::ConfigNotFound(d)
            | CliError::Config(d)
            | CliError::Output(d) => d.clone(),
            CliError::Solve(e) => e.to_string(),
        };
        ErrorRecord { error: self.to_string(), detail, exit_code: self.exit_code() }
    }
}
