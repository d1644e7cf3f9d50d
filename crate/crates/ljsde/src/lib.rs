//! Simulation and verification toolkit for Brownian particle systems with a
//! singular pairwise Lennard-Jones drift: closed-form potential/force/
//! Laplacian with a Taylor-splice regularization, Euler-Maruyama integration
//! with first-exit detection, initial-condition samplers, martingale
//! diagnostics, and brute-force oracles for the force inequalities.

pub mod diagnostics;
pub mod error;
pub mod integrator;
pub mod io;
pub mod lemmas;
pub mod potential;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod system;

pub use error::{Error, Result};
