//! Simple random walk on the range of a simple random walk in `Z^d`.
//!
//! The crate generates lattice paths, builds their range graphs, treats them
//! as electrical networks, runs a second walk on them and turns the results
//! into estimates of the ergodic constants, walk exponents and the
//! logarithmic corrections seen in four dimensions.

pub mod environment;
pub mod error;
pub mod estimators;
pub mod graph;
pub mod lattice;
pub mod resistance;
pub mod rng;
pub mod solve;
pub mod walk;

pub use environment::{CutPoints, Environment};
pub use error::{Error, Result};
pub use graph::{build_graph, RangeGraph};
pub use lattice::{gen_path, LatticePoint, Sidedness, Step, WalkPath};
pub use resistance::{ConductanceMode, ConductanceNetwork};
