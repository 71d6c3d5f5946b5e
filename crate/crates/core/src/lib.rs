//! Bayesian hierarchical measurement-error model for two-channel, replicated
//! RNAi high-throughput screens.
//!
//! The crate covers the whole analysis path:
//!
//! * [`preprocess`] turns raw plate readings into log-scale [`ScreenData`]
//!   (control outlier deletion, edge-effect adjustment, control-anchored
//!   piecewise-linear plate normalization, replicate outlier removal);
//! * [`model`] holds the parameter state and exact log densities;
//! * [`sampler`] runs the Metropolis-within-Gibbs chain with the slab
//!   coefficient integrated out of the indicator update;
//! * [`inference`] produces posterior summaries, hit lists with posterior
//!   false detection rates, predictive checks and the Z-score baseline;
//! * [`simgen`] simulates screens and scores competing methods.

pub mod error;
pub mod inference;
pub mod model;
pub mod preprocess;
pub mod rng;
pub mod sampler;
pub mod simgen;
pub mod stats;

pub use error::{Error, Result};
pub use model::{ModelState, PriorConfig, ScreenData};
