//! Simulated screens with known truth, and scoring of competing analyses
//! against it by ROC curves and actual-versus-desired false discovery rates.

mod evaluate;
mod scenario;
mod shootout;

pub use evaluate::{fdr_calibration, fdr_grid, mean_fdr_deviation, roc, FdrPoint, Roc, RocPoint};
pub use scenario::{generate, ErrorRegime, InvGammaLaw, Preset, Scenario, Truth};
pub use shootout::{
    method_shootout, run_methods, Method, MethodResult, ShootoutConfig, ShootoutReport,
};
