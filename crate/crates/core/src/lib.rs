//! Synthesis of supervisors that enforce current-state opacity on
//! discrete-event systems.
//!
//! The plant is composed once with its adversary observer; each control
//! iteration then refines that product in place instead of recomputing the
//! observer.

pub mod automaton;
pub mod composition;
pub mod desa;
pub mod error;
pub mod fixtures;
pub mod observer;
pub mod oracle;
pub mod refine;
pub mod synthesis;

pub use automaton::{equiresponse_equivalent, is_subautomaton, project, Alphabet, Automaton, Event, EventId, StateId, Word};
pub use composition::{
    canonically_equal, check_spa, check_state_consistency, compose_with_observer, parallel_compose, CanonicalForm,
    ProductAutomaton, ProductParts, ProductState,
};
pub use error::{AutomatonError, OracleError, ProductError};
pub use observer::{is_subobserver, observe, EstimateLabel, Observer};
pub use refine::{refine, refine_with_report, uncontrollable_closure, DeltaSet, RefineReport};
pub use synthesis::{synthesize, synthesize_fast, synthesize_with_trace, verify_current_state_opacity, ControlPattern, Supervisor};
pub use desa::{parse_desa, serialize_plant, serialize_product, DesaDocument, ParseError, ParseErrorKind, StateNames};
