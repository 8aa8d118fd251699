use obscost_core::CoreError;
use obscost_kdv::KdvError;
use obscost_lab::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{at}: unknown key `{key}`")]
    UnknownKey { at: String, key: String },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("{at}: field `{field}`: {msg}")]
    Field { at: String, field: String, msg: String },
    #[error("field `{field}`: {msg}")]
    Invalid { field: String, msg: String },
    #[error("`{command}` needs `{field}`")]
    Missing { command: String, field: &'static str },
    #[error("reading config {path}: {source}")]
    Read { path: String, source: std::io::Error },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Kdv(#[from] KdvError),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
    #[error("serializing report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    /// `2` for bad input or a point outside the mathematical domain, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        let domain = match self {
            CliError::Config(ConfigError::Read { .. }) => false,
            CliError::Config(_) => true,
            CliError::Core(e) => e.is_domain(),
            CliError::Kdv(e) => !matches!(e, KdvError::SingularFactorization { .. } | KdvError::Io(_) | KdvError::Csv(_)),
            CliError::Lab(e) => e.is_domain(),
            CliError::Io(_) | CliError::Json(_) | CliError::Verification(_) => false,
        };
        if domain {
            2
        } else {
            1
        }
    }
}
