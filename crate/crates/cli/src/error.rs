use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error(transparent)]
    Core(#[from] timescale_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Machine-readable failure record written to stderr.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub status: &'static str,
    pub kind: &'static str,
    pub messages: Vec<String>,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        let (kind, messages) = match self {
            CliError::Config(p) => ("config", p.clone()),
            CliError::Core(e) => ("compute", vec![e.to_string()]),
            CliError::Io(e) => ("io", vec![e.to_string()]),
        };
        ErrorRecord { status: "error", kind, messages }
    }
}
