//! Typed wiring diagrams with functorial semantics.
//!
//! A [`WiringDiagram`] describes how boxes connect. Behavior is assigned per
//! box in one of two algebras (deterministic [`MooreMachine`]s or
//! discrete-time [`LtiSystem`]s) and composed along the diagram; requirements
//! are assigned as [`Contract`]s and composed the same way. [`alpha`] maps
//! behaviors to trace contracts, and [`check_naturality`] verifies that the
//! map commutes with composition. [`HierarchicalModel`] nests diagrams inside
//! boxes and checks implementations against abstract behaviors.

pub mod contract;
pub mod diagram;
pub mod dot;
pub mod error;
pub mod exec;
pub mod format;
pub mod hierarchy;
pub mod lti;
pub mod matrix;
pub mod moore;
mod relation;
pub mod types;

pub use contract::{
    alpha, check_naturality, compose_contracts, compose_trace_contracts, satisfies, satisfies_trace,
    Contract, Counterexample, NaturalityReport, TraceContract,
};
pub use diagram::{
    identity_wiring, identity_wiring_named, substitute, tensor, BoxDecl, PortRef, Supplier,
    Subject, ValidationReport, Violation, ViolationCode, WiringDiagram,
};
pub use dot::export_dot;
pub use error::{Error, Result};
pub use exec::Limits;
pub use hierarchy::{
    check_contracts, check_refinement_lti, check_refinement_moore, impact, propagate_change,
    HierarchicalModel, Provenance, RefinementOutcome,
};
pub use lti::{apply_lti, lti_equivalent, LtiSystem};
pub use matrix::Matrix;
pub use moore::{apply_moore, first_divergence, trace_equivalent, MooreMachine, Trace};
pub use types::{Interface, Port, Side, Valuation, ValueType};

#[cfg(feature = "testkit")]
pub mod testkit;
