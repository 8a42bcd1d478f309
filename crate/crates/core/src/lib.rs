//! Exact, contour-integral and Monte Carlo solvers for the multi-species
//! q-deformed totally asymmetric zero range process.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod config;
pub mod contour;
pub mod error;
pub mod exact;
pub mod generator;
pub mod montecarlo;
mod numeric;
pub mod qalg;

pub use error::{Error, Result};
