//! Numerical laboratory for finite-volume magnetic Schrödinger operators
//! with random potentials.
//!
//! The crate discretizes operators of the form H = (i∇ + A)²/2 + V on a
//! bounded box with Dirichlet or Neumann boundary conditions, where A is a
//! constant-field vector potential in the symmetric gauge and V is a sampled
//! alloy-type or Gaussian random potential. On top of the discretization it
//! provides
//!
//! - exact dense Hermitian eigensolves, eigenvalue counting and the
//!   finite-volume integrated density of states ([`spectral`]),
//! - Monte Carlo estimators for disorder-averaged spectral statistics
//!   ([`estimators`]),
//! - closed-form Wegner-type upper bounds on the density of states together
//!   with their numerical minimization and asymptotics ([`wegner`]),
//! - reference spectral data of the two-dimensional Landau Hamiltonian
//!   ([`landau`]),
//! - a verification suite for the operator inequalities the bounds rest on:
//!   diamagnetic domination, Dirichlet-Neumann bracketing, decoupling,
//!   spectral averaging and the averaged Golden-Thompson inequality
//!   ([`checks`]).
//!
//! Everything is deterministic: samplers are pure functions of
//! (model, grid, seed), Monte Carlo schedules derive per-realization seeds
//! from a base seed, and reductions run in fixed index order so results do
//! not depend on the worker count.

pub mod checks;
pub mod config;
pub mod error;
pub mod estimators;
pub mod fields;
pub mod grid;
pub mod landau;
pub mod operator;
pub mod output;
pub mod quad;
pub mod seed;
pub mod spectral;
pub mod wegner;

pub use error::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
