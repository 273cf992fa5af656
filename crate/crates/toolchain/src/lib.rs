//! The toolchain around the ASEF format: analyzer adapters, the linked
//! resource store and the push-driven orchestrator.

pub mod adapter;
pub mod resources;
pub mod git;
pub mod orchestrator;
