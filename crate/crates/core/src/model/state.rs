use crate::error::{Error, Result};

/// Per-channel error parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    /// Per-unit squared scale of the Gaussian component.
    pub sigma2: Vec<f64>,
    /// Mixing precisions, row-major `units x replicates`.
    pub omega: Vec<f64>,
    /// Degrees of freedom.
    pub dof: u32,
    /// Prior mean of `sigma2`.
    pub a: f64,
    /// Prior variance of `sigma2`.
    pub b: f64,
}

impl ChannelState {
    pub fn omega_row(&self, i: usize, replicates: usize) -> &[f64] {
        &self.omega[i * replicates..(i + 1) * replicates]
    }
}

/// One point in parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub gamma: Vec<bool>,
    /// Only meaningful where `gamma` is set; kept at zero elsewhere.
    pub beta: Vec<f64>,
    pub mu: Vec<f64>,
    pub alpha0: f64,
    pub alpha1: f64,
    pub x: ChannelState,
    pub y: ChannelState,
    /// Prior probability of no activity change.
    pub p: f64,
    /// Slab variance.
    pub v: f64,
}

impl ModelState {
    pub fn n_units(&self) -> usize {
        self.mu.len()
    }

    /// Expected log activity `alpha0 + gamma_i beta_i + alpha1 mu_i`.
    pub fn nu(&self, i: usize) -> f64 {
        self.alpha0 + self.effect(i) + self.alpha1 * self.mu[i]
    }

    /// `gamma_i * beta_i`.
    pub fn effect(&self, i: usize) -> f64 {
        if self.gamma[i] {
            self.beta[i]
        } else {
            0.0
        }
    }

    pub fn active_count(&self) -> usize {
        self.gamma.iter().filter(|&&g| g).count()
    }

    /// Check vector lengths against `units x replicates`.
    pub fn check_shape(&self, units: usize, replicates: usize) -> Result<()> {
        let per_unit = [
            self.gamma.len(),
            self.beta.len(),
            self.mu.len(),
            self.x.sigma2.len(),
            self.y.sigma2.len(),
        ];
        if per_unit.iter().any(|&n| n != units) {
            return Err(Error::Shape(format!(
                "state per-unit vectors must have length {units}"
            )));
        }
        if self.x.omega.len() != units * replicates || self.y.omega.len() != units * replicates {
            return Err(Error::Shape(format!(
                "omega must have {units} x {replicates} entries"
            )));
        }
        Ok(())
    }
}
