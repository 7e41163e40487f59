//! Freely rotating chains and the Kratky-Porod continuum model.
//!
//! The discrete chain is built from rotation matrices, the continuum path
//! from a geometric integrator on SO(3), and both are checked against
//! closed-form statistics by Monte Carlo.

pub mod analytics;
pub mod chain;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod format;
pub mod kp;
pub mod so3;

pub use error::{Error, Result};
