//! Classical and quantum walks on chains of coupled ring resonators.
//!
//! A chain of `N` rings is linked by `N + 1` directional couplers and mapped
//! onto a directed graph of `2N + 3` nodes: the input port, two half-ring
//! nodes per ring and the absorbing Drop and Thru ports. The same graph
//! carries a stochastic (classical) and a unitary-weighted (quantum)
//! transition matrix; [`classical`] and [`quantum`] evolve them, [`analysis`]
//! builds parameter sweeps and hitting times on top, and [`coupler`] turns
//! waveguide geometry into the coupling coefficients the chain needs.

// `!(x > 0.0)` style checks are there to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod classical;
pub mod config;
pub mod coupler;
pub mod error;
pub mod export;
pub mod geometry;
pub mod graph;
pub mod quantum;

pub use num_complex::Complex64;

pub use classical::{ClassicalState, PortProbabilities, WalkState};
pub use error::{Error, Result};
pub use graph::{
    build_chain, classical_transfer_matrix, quantum_transfer_matrix, ChainGeometry, ClassicalMatrix,
    NodeGraph, QuantumMatrix, RingChainSpec, TransitionMatrix,
};
pub use quantum::{AmplitudeResult, AmplitudeState, RoundTripFactor};
