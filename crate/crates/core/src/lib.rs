//! Exact model counting by geometric resolution.
//!
//! Clauses become boxes of forbidden assignments. A probe point sweeps the
//! assignment hypercube in depth-first order; every point not covered by a
//! known box is a model, and neighbouring boxes are resolved into larger
//! ones until a single box covers the whole space.

pub mod benchgen;
pub mod boxes;
pub mod cli;
pub mod clustertrie;
pub mod cnfio;
pub mod oracle;
pub mod ordering;
pub mod solver;
