//! Simulation and analysis of a one-dimensional wave-particle entity in a
//! sinusoidal potential.
//!
//! The model is a Lorenz-like four-dimensional ODE in dimensionless
//! variables (see [`model`]), together with its two-dimensional low-memory
//! reduction. [`stability`] holds the closed-form linear analysis of the
//! stationary states, [`analysis`] classifies long-time behaviour and
//! [`sweep`] runs parameter-plane and initial-condition grids.
//! [`kernel`] integrates the original memory-kernel equation directly and
//! is used to cross-check the ODE formulation.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod integrator;
pub mod kernel;
pub mod model;
pub mod stability;
pub mod sweep;
pub mod trajectory;

pub use analysis::{BehaviorClass, ClassifierConfig};
pub use error::{Error, Result};
pub use integrator::{IntegratorConfig, OdeSystem};
pub use model::{Params, State2, State4};
pub use num_complex::Complex64;
pub use trajectory::{simulate, simulate_lowmem, Trajectory};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
