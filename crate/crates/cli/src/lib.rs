//! Command-line pipeline: stage runners, run configuration and the static
//! server used by the timeline browser.

pub mod config;
pub mod pipeline;
pub mod serve;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("missing dependency: {0}")]
    Dependency(String),
    #[error("{stage}: {source:#}")]
    Stage {
        stage: &'static str,
        source: anyhow::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Stage { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Dependency(_) => 3,
        }
    }
}
