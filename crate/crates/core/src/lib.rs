//! Bayesian-optimization tuning of a Lyapunov path-following controller.
//!
//! The crate couples a kinematic unicycle simulator (the closed-loop "plant")
//! with a Gaussian-process / expected-improvement optimizer that searches the
//! controller's four gains in log space.

// `!(x > y)` is used on purpose so NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bo;
pub mod cli;
pub mod config;
pub mod controller;
pub mod cost;
pub mod error;
pub mod geometry;
pub mod gp;
pub mod io;
pub mod objective;
pub mod sim;
pub mod track;

pub use controller::GainVector;
pub use error::{Error, Result};
