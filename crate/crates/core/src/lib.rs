//! Surrogate-assisted multi-objective robust design optimization.
//!
//! The crate covers the full workflow: a maximin Latin hypercube design of
//! experiments, universal Kriging surrogates, Sobol screening of the
//! uncertain variables, and NSGA-II optimization of deterministic,
//! expectation and worst-case formulations followed by posterior
//! perturbation analysis of the resulting Pareto fronts.

mod error;

pub mod seed;
pub mod space;
pub mod sampling;
pub mod surrogate;

pub use error::{Error, Result};
pub mod problems;
pub mod objective;
pub mod moo;
pub mod robust;
pub mod sensitivity;
pub mod config;
pub mod report;
pub mod pipeline;
