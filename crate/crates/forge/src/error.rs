//! Error type shared across the library and the CLI.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, ForgeError>;

#[derive(Debug, Error)]
pub enum ForgeError {
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("invalid size {0}: sizes must be >= 1")]
    InvalidSize(u64),

    #[error("no such vertex `{0}`")]
    NoSuchVertex(String),

    #[error("no such edge `{0}` -> `{1}`")]
    NoSuchEdge(String, String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid control vector: {0}")]
    InvalidControlVector(String),

    #[error("degenerate distribution: every draw clamped to zero")]
    DegenerateDistribution,

    #[error("coverage mismatch: {0}")]
    CoverageMismatch(String),

    #[error("infeasible spec: {0}")]
    InfeasibleSpec(String),

    #[error("infeasible target: {0}")]
    InfeasibleTarget(String),

    #[error("syntax error at line {line}, col {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("`{name}` used before definition at line {line}")]
    UseBeforeDef { line: usize, name: String },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl ForgeError {
    /// Stable machine-readable kind, used by the CLI error envelope.
    pub fn kind(&self) -> &'static str {
        match self {
            ForgeError::UnknownAlgorithm(_) => "UnknownAlgorithm",
            ForgeError::InvalidSize(_) => "InvalidSize",
            ForgeError::NoSuchVertex(_) => "NoSuchVertex",
            ForgeError::NoSuchEdge(..) => "NoSuchEdge",
            ForgeError::InvalidGraph(_) => "InvalidGraph",
            ForgeError::InvalidControlVector(_) => "InvalidControlVector",
            ForgeError::DegenerateDistribution => "DegenerateDistribution",
            ForgeError::CoverageMismatch(_) => "CoverageMismatch",
            ForgeError::InfeasibleSpec(_) => "InfeasibleSpec",
            ForgeError::InfeasibleTarget(_) => "InfeasibleTarget",
            ForgeError::Syntax { .. } => "SyntaxError",
            ForgeError::UseBeforeDef { .. } => "UseBeforeDef",
            ForgeError::SchemaMismatch(_) => "SchemaMismatch",
            ForgeError::Io(e) if e.kind() == std::io::ErrorKind::NotFound => "FileNotFound",
            ForgeError::Io(_) => "Io",
            ForgeError::Json(_) => "Json",
        }
    }
}
