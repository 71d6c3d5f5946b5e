use crate::error::{Error, Result};

/// How `(alpha0, alpha1)` are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaUpdate {
    /// One draw from the bivariate normal conditional.
    #[default]
    Joint,
    /// `alpha0 | alpha1` then `alpha1 | alpha0`.
    Scalar,
}

/// How the degrees of freedom are updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DofUpdate {
    /// Exact draw from the categorical conditional over the prior support.
    #[default]
    Categorical,
    /// Held at their initial values.
    Fixed,
}

/// Starting point of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitStrategy {
    /// Moment-based start for every chain.
    #[default]
    Moments,
    /// Chain 0 uses the moment start, later chains jitter the globals.
    Overdispersed,
}

/// Parameters pinned instead of sampled. All unset means the full model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FixedParams {
    /// Hold every mixing precision at 1 (Gaussian errors).
    pub unit_omega: bool,
    /// Shared `(sigma2_x, sigma2_y)` for all units.
    pub shared_sigma2: Option<(f64, f64)>,
    /// Constant slab variance.
    pub slab_variance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub total_iterations: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub chain_count: usize,
    pub seed: u64,
    /// Random-walk step on `(ln a, ln b)`, viability channel.
    pub proposal_scale_x: f64,
    /// Random-walk step on `(ln a, ln b)`, activity channel.
    pub proposal_scale_y: f64,
    /// Tune the random-walk steps during burn-in only.
    pub adapt_proposals: bool,
    pub alpha_update: AlphaUpdate,
    pub dof_update: DofUpdate,
    pub init: InitStrategy,
    pub fixed: FixedParams,
    /// Run per-unit blocks on the rayon pool. Results are identical either way.
    pub parallel_units: bool,
    /// Units whose `beta` and `mu` traces are recorded.
    pub trace_units: Vec<usize>,
    /// Keep a snapshot of every k-th retained draw.
    pub snapshot_every: Option<usize>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            total_iterations: 40_000,
            burn_in: 20_000,
            thinning: 1,
            chain_count: 1,
            seed: 1,
            proposal_scale_x: 0.25,
            proposal_scale_y: 0.25,
            adapt_proposals: true,
            alpha_update: AlphaUpdate::Joint,
            dof_update: DofUpdate::Categorical,
            init: InitStrategy::Moments,
            fixed: FixedParams::default(),
            parallel_units: false,
            trace_units: Vec::new(),
            snapshot_every: None,
        }
    }
}

impl SamplerConfig {
    pub fn with_iterations(mut self, total: usize, burn_in: usize) -> Self {
        self.total_iterations = total;
        self.burn_in = burn_in;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.total_iterations {
            return Err(Error::Config(format!(
                "burn-in ({}) must be smaller than total iterations ({})",
                self.burn_in, self.total_iterations
            )));
        }
        if self.thinning == 0 {
            return Err(Error::Config("thinning must be at least 1".into()));
        }
        if self.chain_count == 0 {
            return Err(Error::Config("chain count must be at least 1".into()));
        }
        if !(self.proposal_scale_x > 0.0 && self.proposal_scale_y > 0.0) {
            return Err(Error::Config("proposal scales must be positive".into()));
        }
        if self.snapshot_every == Some(0) {
            return Err(Error::Config("snapshot interval must be at least 1".into()));
        }
        if let Some((sx, sy)) = self.fixed.shared_sigma2 {
            if !(sx > 0.0 && sy > 0.0) {
                return Err(Error::Config("fixed variances must be positive".into()));
            }
        }
        if let Some(v) = self.fixed.slab_variance {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config("fixed slab variance must be positive".into()));
            }
        }
        Ok(())
    }

    /// Number of draws retained after burn-in and thinning.
    pub fn retained_draws(&self) -> usize {
        (self.total_iterations - self.burn_in).div_ceil(self.thinning)
    }
}
