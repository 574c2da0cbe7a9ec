//! Stabilizer Bell inequalities for graph states, robust self-testing
//! bounds derived from them, and a counting-experiment simulator.

pub mod bell;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod linalg;
pub mod report;
pub mod robustness;
pub mod search;
pub mod tolerance;

pub use error::{Error, Result};
