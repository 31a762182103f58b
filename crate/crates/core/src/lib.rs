//! Entanglement and mixedness of two-qubit states on the
//! concurrence / linear-entropy plane.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod families;
pub mod matcore;
pub mod measures;
pub mod plane;
pub mod qstate;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
