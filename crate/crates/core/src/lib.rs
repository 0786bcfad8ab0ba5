//! Generalized quadratic ARCH (GQARCH) processes and their relatives.
//!
//! The crate simulates LARCH, QARCH, GQARCH and GARCH(1,1) trajectories,
//! evaluates existence and moment conditions, computes closed-form moments
//! and long-memory asymptotics, solves for the leverage function, estimates
//! the matching sample quantities, and fits the models by Gaussian QMLE.
//! A Monte Carlo harness in [`app`] confronts theory with simulation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod cli;
pub mod coeffs;
pub mod conditions;
pub mod error;
pub mod estimate;
pub mod leverage;
pub mod models;
pub mod moments;
pub mod numeric;
pub mod optim;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
