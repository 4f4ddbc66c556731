//! Sparse QUBO optimization by iterative belief propagation.
//!
//! The solver repeatedly picks a random induced sub-tree of the coupling
//! graph, conditions it on the rest of the current state, and resamples it
//! exactly from its Boltzmann law with a two-sweep log-domain belief
//! propagation. A Metropolis simulated-annealing baseline, benchmark
//! instance generators and exhaustive oracles share the same types.

pub mod bench;
pub mod bp;
mod ensemble;
mod error;
pub mod generate;
pub mod ibp;
pub mod oracle;
pub mod qubo;
pub mod sa;
pub mod schedule;
pub mod subtree;

pub use ensemble::{percentile, Checkpoint, ReplicaEnsemble, RunConfig, RunTrace};
pub use error::{Error, Result};
pub use qubo::{Assignment, QuboInstance};
pub use schedule::AnnealSchedule;
