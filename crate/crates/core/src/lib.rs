//! Nested occupancy schemes in random environment.
//!
//! A weighted branching process splits `[0, 1)` into nested interval
//! partitions, one per tree level; balls thrown as uniforms are counted in
//! every level at once. This crate samples the environments, computes the
//! log-Laplace spectral apparatus (`lambda`, its critical points and Legendre
//! transform), materializes trees, allocates balls and evaluates the
//! almost-sure asymptotics of the occupancy counts against simulation.
//!
//! Module map:
//!
//! - [`environment`]: fragmentation laws and their closed-form spectra
//! - [`spectral`]: profiles, critical constants, regime classification
//! - [`tree`]: materialized weighted branching trees and martingales
//! - [`occupancy`]: ball allocation, occupancy counts, Poisson kernels
//! - [`predictions`]: leading-order predictions and local-limit checks
//! - [`harness`]: config-driven experiment runner and CSV output

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod environment;
pub mod error;
pub mod harness;
pub mod occupancy;
pub mod predictions;
pub mod rng;
pub mod special;
pub mod spectral;
pub mod tree;

pub use environment::{ClosedForm, EnvironmentSpec, Fragmentation, McEstimate, StickLaw};
pub use error::{Error, Result};
pub use occupancy::{Allocation, AllocationMode, OccupancyCounts};
pub use predictions::{Prediction, PredictionForm, PredictionInput};
pub use spectral::{CriticalConstants, Property, RegimeLabel, SpectralProfile};
pub use tree::{LevelStats, MartingaleValue, WeightedTree};
