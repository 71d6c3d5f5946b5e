//! Metropolis-within-Gibbs sampler for the joint posterior.
//!
//! Conjugate blocks are drawn exactly from their full conditionals; the
//! indicator `gamma_i` is drawn with `beta_i` integrated out; the variance
//! hyperparameters `(a, b)` move by random-walk Metropolis on the log scale.
//! Every random number comes from a keyed substream (see [`crate::rng`]), so a
//! chain is reproducible from its seed and independent of thread scheduling.

mod chain;
pub mod conditionals;
mod config;
mod diagnostics;
mod draws;
mod init;
mod sweep;

pub use chain::{gaussian_method_chain, run_chain, run_chains};
pub use config::{AlphaUpdate, DofUpdate, FixedParams, InitStrategy, SamplerConfig};
pub use diagnostics::gelman_rubin;
pub use draws::{
    Acceptance, AcceptanceRate, DrawSnapshot, PosteriorDraws, Traces, UnitAccumulators,
};
pub use init::initial_state;
pub use sweep::{update_gamma_beta, Sweeper};
