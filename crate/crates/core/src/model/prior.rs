use crate::error::{Error, Result};
use crate::stats::ln_beta_pdf;

/// Prior on each `mu_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuPrior {
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// `lo + (hi - lo) * Beta(shape1, shape2)`.
    ScaledBeta {
        shape1: f64,
        shape2: f64,
        lo: f64,
        hi: f64,
    },
}

impl MuPrior {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            MuPrior::Uniform { lo, hi } | MuPrior::ScaledBeta { lo, hi, .. } => (lo, hi),
        }
    }

    pub fn contains(&self, mu: f64) -> bool {
        let (lo, hi) = self.bounds();
        mu > lo && mu < hi
    }

    /// Log density; `-inf` outside the open support.
    pub fn ln_pdf(&self, mu: f64) -> f64 {
        if !self.contains(mu) {
            return f64::NEG_INFINITY;
        }
        match *self {
            MuPrior::Uniform { lo, hi } => -(hi - lo).ln(),
            MuPrior::ScaledBeta {
                shape1,
                shape2,
                lo,
                hi,
            } => {
                let w = hi - lo;
                ln_beta_pdf((mu - lo) / w, shape1, shape2) - w.ln()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bounds();
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!(
                "mu prior interval ({lo}, {hi}) is degenerate"
            )));
        }
        if let MuPrior::ScaledBeta { shape1, shape2, .. } = *self {
            if !(shape1 > 0.0 && shape2 > 0.0) {
                return Err(Error::Config("scaled-beta shapes must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Inclusive integer range for the degrees-of-freedom priors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofSupport {
    pub lo: u32,
    pub hi: u32,
}

impl DofSupport {
    pub fn contains(&self, d: u32) -> bool {
        (self.lo..=self.hi).contains(&d)
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> {
        self.lo..=self.hi
    }
}

impl Default for DofSupport {
    fn default() -> Self {
        Self { lo: 1, hi: 100 }
    }
}

/// Hand-set prior hyperparameters.
///
/// `ax_upper .. by_upper` bound the uniform priors on the means and variances
/// of the two per-unit variance priors; `p_shape1/p_shape2` parameterize the
/// Beta prior on the null probability `p`; `v_shape/v_scale` the inverse-gamma
/// prior on the slab variance `V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorConfig {
    pub ax_upper: f64,
    pub bx_upper: f64,
    pub ay_upper: f64,
    pub by_upper: f64,
    pub p_shape1: f64,
    pub p_shape2: f64,
    pub v_shape: f64,
    pub v_scale: f64,
    pub mu: MuPrior,
    pub dof: DofSupport,
}

impl PriorConfig {
    /// Build from the eight hyperparameters in their conventional order.
    pub fn from_phi(phi: [f64; 8], mu: MuPrior) -> Result<Self> {
        let p = Self {
            ax_upper: phi[0],
            bx_upper: phi[1],
            ay_upper: phi[2],
            by_upper: phi[3],
            p_shape1: phi[4],
            p_shape2: phi[5],
            v_shape: phi[6],
            v_scale: phi[7],
            mu,
            dof: DofSupport::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn phi(&self) -> [f64; 8] {
        [
            self.ax_upper,
            self.bx_upper,
            self.ay_upper,
            self.by_upper,
            self.p_shape1,
            self.p_shape2,
            self.v_shape,
            self.v_scale,
        ]
    }

    /// Settings used for the simulated-screen analyses.
    pub fn simulation_default() -> Self {
        Self::from_phi(
            [0.2, 0.2, 1.0, 0.2, 9.0, 1.0, 3.0, 30_000.0],
            MuPrior::Uniform { lo: -3.0, hi: 1.0 },
        )
        .expect("valid defaults")
    }

    /// Settings for a genome-scale screen with tight replicate agreement.
    pub fn screen_default() -> Self {
        Self::from_phi(
            [0.03, 0.03, 0.2, 0.2, 9.0, 1.0, 3.0, 1.9e5],
            MuPrior::Uniform { lo: -3.0, hi: 1.0 },
        )
        .expect("valid defaults")
    }

    /// Empirical viability prior `(0.248 + 2.77) * Beta(6, 2) - 2.77`.
    pub fn empirical_mu() -> MuPrior {
        MuPrior::ScaledBeta {
            shape1: 6.0,
            shape2: 2.0,
            lo: -2.77,
            hi: 0.248,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (k, v) in self.phi().iter().enumerate() {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::Config(format!(
                    "phi{} must be positive, got {v}",
                    k + 1
                )));
            }
        }
        self.mu.validate()?;
        if self.dof.is_empty() || self.dof.lo == 0 {
            return Err(Error::Config(
                "degrees-of-freedom support must be nonempty and >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Upper bounds `(a, b)` for a channel (`false` = viability).
    pub fn hyper_bounds(&self, channel_y: bool) -> (f64, f64) {
        if channel_y {
            (self.ay_upper, self.by_upper)
        } else {
            (self.ax_upper, self.bx_upper)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_hyperparameters() {
        let mu = MuPrior::Uniform { lo: -3.0, hi: 1.0 };
        assert!(PriorConfig::from_phi([0.0, 1., 1., 1., 1., 1., 1., 1.], mu).is_err());
        let flat = MuPrior::Uniform { lo: 1.0, hi: 1.0 };
        assert!(PriorConfig::from_phi([1.0; 8], flat).is_err());
    }

    #[test]
    fn scaled_beta_integrates_to_one() {
        let mu = PriorConfig::empirical_mu();
        let (lo, hi) = mu.bounds();
        let n = 200_000;
        let h = (hi - lo) / n as f64;
        let s: f64 = (0..n)
            .map(|k| mu.ln_pdf(lo + (k as f64 + 0.5) * h).exp() * h)
            .sum();
        assert!((s - 1.0).abs() < 1e-6);
        assert_eq!(mu.ln_pdf(hi + 1.0), f64::NEG_INFINITY);
    }
}
