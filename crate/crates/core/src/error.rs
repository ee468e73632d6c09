use thiserror::Error;

use crate::placement::PlacementAction;
use crate::social::AgentId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("illegal placement {action:?}")]
    IllegalPlacement { action: PlacementAction },

    #[error("agent {0} is not a member of the team")]
    UnknownAgent(AgentId),

    #[error("no legal placement for the incoming piece")]
    NoLegalAction,

    #[error("feedback does not match the pending action of agent {agent}")]
    StaleFeedback { agent: AgentId },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid board: {0}")]
    Board(String),

    #[error("invalid preference weight {0}, expected -2..=2")]
    PreferenceWeight(i64),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("plot failed: {0}")]
    Plot(String),

    #[error("session timed out after {0:?} without trainer input")]
    SessionTimeout(std::time::Duration),

    #[error("replay mismatch at game {game}, step {step}: {what}")]
    ReplayMismatch {
        game: usize,
        step: usize,
        what: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
