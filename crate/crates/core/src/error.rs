use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid radio model: {0}")]
    InvalidRadioModel(String),
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("{kind} `{id}`: field `{field}` {reason}")]
    InvalidField {
        kind: &'static str,
        id: String,
        field: &'static str,
        reason: String,
    },
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("scenario has no {0}")]
    Empty(&'static str),
    #[error("client `{0}` cannot reach any AP on any channel")]
    UnreachableClient(String),
    #[error("no channel assignment found that leaves every client a reachable radio")]
    NoFeasibleInitialization,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: unsupported format `{found}` (expected `{expected}`)")]
    Version {
        path: String,
        found: String,
        expected: &'static str,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unknown builtin scenario `{0}`")]
    UnknownBuiltin(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("search space of {size} configurations exceeds the limit of {limit}")]
    TooLarge { size: u128, limit: u128 },
    #[error("{free} free probability variables exceed the limit of {limit}")]
    TooManyVariables { free: usize, limit: usize },
    #[error("configuration is infeasible")]
    Infeasible,
}
