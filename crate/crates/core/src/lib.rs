//! Expected first meeting times of two independent random walkers on
//! weighted undirected graphs.
//!
//! The crate evaluates the spectral meeting-time formula built from the
//! eigendecomposition of `W = D^{-1/2} A D^{-1/2}`, its node-wise
//! decomposition and principal component `s1^2/s2 = n / (1 + (d_std/d_avg)^2)`,
//! and checks them against two independent routes: exact absorbing-chain
//! solves on the product chain ([`oracle`]) and Monte Carlo simulation
//! ([`walk_sim`]). Barabási–Albert and Erdős–Rényi generators
//! ([`generators`]) provide the test graphs.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix it to `f64`.

pub mod csv;
pub mod error;
pub mod generators;
pub mod graph;
pub mod meeting;
pub mod oracle;
pub mod scalar;
pub mod seed;
pub mod spectral;
pub mod walk_sim;

pub use error::{Error, Result};
pub use generators::{generate, generate_ba, generate_er, params_for_target_degree, GeneratorParams, Model};
pub use graph::{check_assumptions, compute_stats, parse_edge_list, write_edge_list, AssumptionReport};
pub use meeting::{principal_component, meeting_error_bound, MeetingKernel};
pub use oracle::{exact_first_meeting_time, exact_hitting_time, exact_meeting_node_distribution, ExactOracle};
pub use scalar::Scalar;
pub use spectral::{decompose, SpectralOptions};
pub use walk_sim::{
    meeting_frequency_fit, monte_carlo_meeting, monte_carlo_random_starts, relative_error, relative_error_principal,
    SimulationReport,
};

pub type Graph = graph::WeightedGraph<f64>;
pub type Stats = graph::GraphStats<f64>;
pub type Decomposition = spectral::SpectralDecomposition<f64>;
pub type Kernel<'a> = meeting::MeetingKernel<'a, f64>;
pub type Analysis = meeting::MeetingAnalysis<f64>;
