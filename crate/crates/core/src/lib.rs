//! Community detection by modularity maximization over a sparse, low-rank,
//! completely-positive relaxation.
//!
//! The pipeline is: load or generate a [`Graph`], run the row-by-row
//! solver from several random starting points ([`solver::detect`]),
//! recover a hard [`Partition`] from each factor, keep the one with the
//! highest modularity and score it with [`metrics`].

pub mod bench;
pub mod cluster;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod solver;
pub mod synth;

pub use cluster::{Partition, Recovery};
pub use error::{Error, Result};
pub use graph::{load_edge_list, parse_edge_list, Graph};
pub use metrics::MetricsReport;
pub use solver::{detect, Detection, FactorMatrix, SolverConfig};
pub use synth::{generate_dcsbm, GroundTruth, SynthConfig};
