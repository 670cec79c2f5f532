//! Capacity of composite channels with receiver side information.
//!
//! A composite channel draws one component channel at time zero and holds
//! it fixed for the whole block. This crate computes three capacity notions
//! for such channels:
//!
//! * Shannon capacity (rate decodable in every state),
//! * capacity versus outage and outage capacity (rate decodable with
//!   probability at least `1 - q`),
//! * expected capacity (state-averaged rate of a single layered code).
//!
//! Analytic paths exist for BSC and BEC families, discrete state pmfs and
//! gridded crossover densities. Monte Carlo estimators of the information
//! spectrum and a small random-coding simulator cross-check them.

// `!(x >= 0.0)` style checks are how NaN gets rejected here
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod broadcast;
pub mod capacity;
pub mod channel;
mod error;
pub mod mapping;
pub mod numeric;
pub mod rng;
pub mod sim;
pub mod spectrum;

pub use error::{Error, Result};
