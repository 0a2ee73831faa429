//! Pipeline orchestration and the HTTP surface for `heritage-kg`: the
//! `build`, `serve` and `story` commands.

pub mod build;
pub mod config;
pub mod server;
pub mod story;

use thiserror::Error;

pub use self::build::{cmd_build, run_pipeline, BuildOutcome, BuildReport};
pub use self::config::PipelineConfig;
pub use self::server::{router, serve, AppState};
pub use self::story::{load_store, load_story_dir, render_story, StoryFormat, StoryRequestError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Input(String),
    #[error("validation failed:\n{0}")]
    Validation(String),
    #[error("{0}")]
    Story(#[from] StoryRequestError),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Input(_) | CliError::Io(_) => 1,
            CliError::Config(_) | CliError::NotFound(_) => 2,
            CliError::Story(StoryRequestError::BadObject(..)) => 2,
            CliError::Story(StoryRequestError::UnknownConfig(_)) => 3,
            CliError::Story(StoryRequestError::Upstream(_)) => 4,
        }
    }
}

/// Installs the JSON-lines log subscriber on stderr. `RUST_LOG` overrides
/// `default_level`.
pub fn init_logging(default_level: &str) {
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default_level));
    let _ = tracing_subscriber::fmt()
        .json()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}
