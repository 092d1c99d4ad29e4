//! Simulator and analytic-bounds library for randomized network coding (RNC)
//! in acyclic multicast networks.
//!
//! The library models unit-capacity directed acyclic multicast networks in
//! which intermediate nodes either relay packets or combine them with random
//! coefficients drawn from GF(2^u). Three encoding variants are provided:
//!
//! * exhaustive — every outgoing edge gets an independent random combination,
//! * limited — one coefficient vector per round, permuted across outgoing
//!   edges,
//! * broadcast — one coded output copied onto every outgoing edge.
//!
//! On top of the simulator ([`montecarlo`]) the [`bounds`] module evaluates
//! closed-form feasibility-probability lower bounds and the reliability gain
//! obtained by transmitting below max-flow capacity.

pub mod bounds;
pub mod gf;
pub mod montecarlo;
pub mod netgraph;
pub mod rnc;

pub use gf::{CoeffSource, FieldElement, FieldParams};
pub use montecarlo::{ExperimentConfig, OutageEstimate};
pub use netgraph::{GridSpec, Network, NetworkFile, NodeId};
pub use rnc::{DecodingMatrix, Gev, SchemeConfig, Variant};
