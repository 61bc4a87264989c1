//! Safety analysis for dynamic attribute-based access control models.
//!
//! The model state is a digraph over users, user attributes, resources and
//! resource attributes. Guarded mono-operational commands mutate the state,
//! and the safety question asks whether any command sequence can create an
//! access path that does not exist initially.
//!
//! Module map:
//! - [`model`]: the formal model, primitive operations, command execution and
//!   access-relation queries.
//! - [`dacc`]: directed acyclic constrained connectivity, solved by maximal
//!   independent set enumeration over a constraint graph.
//! - [`safety`]: the safety decision procedure (supergraph + constraint graph
//!   + per-tuple DACC), witness reconstruction and certificate checking.
//! - [`reductions`]: executable hardness-reduction constructions and
//!   worst-case instance generators.
//! - [`oracles`]: deliberately naive brute-force references used by tests.
//! - [`doc`]: JSON document formats for models, instances and graphs.

pub mod dacc;
pub mod doc;
pub mod model;
pub mod oracles;
pub mod reductions;
pub mod safety;

pub use dacc::{ConstraintGraph, Dag, DaccInstance, DaccVerdict};
pub use model::{Command, Edge, EntityId, EntityKind, NgacModel, OpTarget, RightId, StateDigraph};
pub use safety::{SafetyVerdict, Witness};
