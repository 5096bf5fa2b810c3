//! Finite solvability of structure-from-motion viewing graphs.
//!
//! A viewing graph is finite solvable when its fundamental matrices pin down
//! the cameras up to finitely many projective-equivalence classes. The test
//! assembles the Jacobian of the per-edge skew-symmetry constraints at a
//! random generic configuration, augments it with gauge and scale rows, and
//! checks for full column rank. Unsolvable graphs can be split into maximal
//! finite-solvable components.

pub mod calculus;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod miner;
pub mod ring;
pub mod solvability;

pub use error::{Error, Result};
pub use graph::{necessary_conditions, NecessaryConditionResult, ViewingGraph};
pub use miner::{density_sweep, mine_minimal, MiningResult, SweepResult};
pub use solvability::{finite_solvability, maximal_components, SolvabilityReport};
