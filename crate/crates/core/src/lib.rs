//! Polyhedral affine scheduling engine.

pub mod dependence;
pub mod ilp;
pub mod legal;
pub mod scop;
pub mod verifier;

pub use dependence::{DepKind, DependencePolyhedron, SccGraph, ScopMetrics, StencilClass};
pub use legal::VarLayout;
pub use ilp::{IlpError, IlpSystem, LinExpr, Position, Rat, Rel, Sense, VarId, VarKind};
pub use scop::{AccessFunction, AccessKind, MachineModel, Schedule, Scop, Statement};
pub use verifier::{InstanceTrace, Verdict};
