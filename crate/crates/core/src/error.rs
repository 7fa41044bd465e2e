use thiserror::Error;

use crate::automaton::StateId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("unknown state {0}")]
    UnknownState(StateId),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("unknown event id {0}")]
    UnknownEventId(u16),
    #[error("duplicate event `{0}`")]
    DuplicateEvent(String),
    #[error("invalid name `{0}`")]
    InvalidName(String),
    #[error("alphabet has {0} events, more than supported")]
    AlphabetTooLarge(usize),
    #[error("nondeterministic transition: state {state} already has a transition on `{event}`")]
    Nondeterministic { state: StateId, event: String },
    #[error("alphabets differ")]
    AlphabetMismatch,
    #[error("observer alphabet is not contained in the plant alphabet")]
    AlphabetContainment,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProductError {
    #[error("product state index {0} out of range")]
    UnknownState(usize),
    #[error("estimate cell {0} out of range")]
    UnknownCell(usize),
    #[error("product has states but no initial state")]
    MissingInitial,
    #[error("nondeterministic transition: product state {0} already has a transition on `{1}`")]
    Nondeterministic(usize, String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("{edges} controllable transitions exceed the limit of {limit}")]
    TooLarge { edges: usize, limit: usize },
    #[error("product has {states} states, more than the limit of {limit}")]
    TooManyStates { states: usize, limit: usize },
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}
