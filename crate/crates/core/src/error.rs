use thiserror::Error;

/// Errors raised by the library. Validation problems are not errors; they are
/// collected in a [`ValidationReport`](crate::formation::ValidationReport).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("root edge ({0}, {1}) is not an edge of the formation")]
    RootEdgeMissing(usize, usize),

    #[error("formation is not triangulated from the root edge; unassigned agents: {0:?}")]
    NotTriangulatedFromRoot(Vec<usize>),

    #[error("state has {found} positions but the formation has {expected} agents")]
    StateLength { expected: usize, found: usize },

    #[error("non-finite coordinate for agent {0}")]
    NonFiniteInput(usize),

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("scenario parse error: {0}")]
    ScenarioParse(#[from] toml::de::Error),

    #[error("scenario serialization error: {0}")]
    ScenarioWrite(#[from] toml::ser::Error),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
