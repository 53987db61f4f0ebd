//! Optimization heuristics expressed as spiking-network dynamics.
//!
//! A deterministic tick-driven SNN simulator ([`snn`]) plus solvers built on
//! it: stochastic annealing over LIF networks for QUBO and 3-SAT ([`anneal`]),
//! winner-take-all energy networks for CSP and TSP ([`wta`]), collaborating
//! network swarms, oscillator-network PSO and spiking ACO ([`swarm`]),
//! a gradient/constraint iteration for convex QP ([`qp`]), and delay-encoded
//! spike wavefronts for shortest paths and grid planning ([`wavefront`]).
//! Problem instances, parsers and brute-force oracles live in [`problems`];
//! energy estimation and complexity accounting in [`metrics`].

// matrix-style indexed loops are the house idiom in the numeric code
#![allow(clippy::needless_range_loop)]

pub mod anneal;
pub mod encode;
pub mod error;
pub mod metrics;
pub mod problems;
pub mod qp;
pub mod snn;
pub mod swarm;
pub mod wavefront;
pub mod wta;

pub use error::{Error, Result};
