//! Data model and exact log densities of the two-channel measurement-error
//! model.
//!
//! For unit `i` and replicate `j`, with viability `x` and pathway activity `y`
//! on the natural-log scale:
//!
//! ```text
//! x_ij = mu_i + e_x / sqrt(omega_x_ij),   e_x ~ N(0, sigma2_x_i)
//! y_ij = nu_i + e_y / sqrt(omega_y_ij),   e_y ~ N(0, sigma2_y_i)
//! nu_i = alpha0 + gamma_i * beta_i + alpha1 * mu_i
//! omega ~ Gamma(d/2, rate d/2)
//! ```
//!
//! `sigma2` is the squared scale of the Gaussian inside the mixture, so the
//! marginal error is Student-t with `d` degrees of freedom and scale
//! `sqrt(sigma2)`. This is the only parameterization used in the crate.

mod data;
mod density;
mod prior;
mod state;

pub use data::{ControlKind, ScreenData, Unit, UnitKind, WellPosition};
pub use density::{ig_reparam, log_conditional_density, log_joint_density, reparam_jacobian_det};
pub use prior::{DofSupport, MuPrior, PriorConfig};
pub use state::{ChannelState, ModelState};
