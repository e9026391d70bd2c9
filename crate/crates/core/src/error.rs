use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("singular observable")]
    SingularObservable,
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("unknown profile id `{0}` (valid ids: N0, N1, N2, N3, N4, N5)")]
    UnknownProfile(String),
    #[error("infeasible pulse geometry: {0}")]
    InfeasibleGeometry(String),
    #[error("no closed-form PSD for profile {0}")]
    NoClosedFormPsd(String),
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("incompatible artifacts: {0}")]
    Incompatible(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 config, 3 I/O, 4 artifact
    /// incompatibility, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_)
            | Error::UnknownProfile(_)
            | Error::InfeasibleGeometry(_)
            | Error::Toml(_) => 2,
            Error::Io(_) | Error::Json(_) => 3,
            Error::Incompatible(_) | Error::ShapeMismatch(_) => 4,
            _ => 1,
        }
    }
}
