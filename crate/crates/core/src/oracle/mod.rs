//! Reference semantics on pointed Kripke structures: entailment, action
//! application, bisimulation contraction and breadth-first plan search.

mod bisim;
mod kripke;
pub mod mar_reader;
mod search;
mod update;

use thiserror::Error;

use crate::diagnostic::Code;

pub use bisim::minimize;
pub use kripke::{entails, initial_state, Compiled, KripkeState, Signature, MAX_OPEN_FLUENTS};
pub use search::{bfs_plan, bfs_plan_with, simulate, SearchLimits, SearchOutcome};
pub use update::{apply, observer_roles, Role};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("inconsistent initial state: {0}")]
    InconsistentInit(String),
    #[error("cannot build the initial state: {0}")]
    NotConstructible(String),
    #[error("unknown fluent `{0}`")]
    UnknownFluent(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("formula is not ground: `{0}`")]
    NonGround(String),
    #[error("precondition of `{0}` does not hold")]
    PreconditionFailed(String),
}

impl OracleError {
    pub fn code(&self) -> Code {
        match self {
            OracleError::InconsistentInit(_) => Code::E_INCONSISTENT_INIT,
            OracleError::NotConstructible(_) | OracleError::NonGround(_) => {
                Code::E_NOT_CONSTRUCTIBLE
            }
            OracleError::UnknownFluent(_) => Code::E_UNKNOWN_FLUENT,
            OracleError::UnknownAgent(_) => Code::E_UNKNOWN_AGENT,
            OracleError::UnknownAction(_) | OracleError::PreconditionFailed(_) => {
                Code::E_PRECONDITION_FAILED
            }
        }
    }
}
