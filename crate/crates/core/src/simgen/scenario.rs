use std::fmt;

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::model::{MuPrior, PriorConfig, ScreenData, Unit};
use crate::rng::{rng_for, Block};
use crate::stats::{sample_gamma, sample_inv_gamma, sample_normal};

/// Inverse-gamma law `IG(shape, scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvGammaLaw {
    pub shape: f64,
    pub scale: f64,
}

/// Distribution of the measurement errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorRegime {
    /// Student-t errors with unit-specific variances drawn from the laws.
    T {
        dof_x: f64,
        dof_y: f64,
        sigma2_x: InvGammaLaw,
        sigma2_y: InvGammaLaw,
    },
    /// Normal errors with one variance per channel.
    Gaussian { sigma2_x: f64, sigma2_y: f64 },
}

/// Named scenario families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// t errors, two replicates.
    S1,
    /// Gaussian errors, two replicates.
    S2,
    /// t errors, ten replicates.
    S3,
}

impl Preset {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s1" => Some(Preset::S1),
            "s2" => Some(Preset::S2),
            "s3" => Some(Preset::S3),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::S1 => "s1",
            Preset::S2 => "s2",
            Preset::S3 => "s3",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything needed to generate one simulated screen.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub units: usize,
    /// The first `active` units carry a nonzero effect.
    pub active: usize,
    pub replicates: usize,
    /// Active effects are uniform on this interval.
    pub beta_range: (f64, f64),
    pub mu: MuPrior,
    pub alpha0: f64,
    pub alpha1: f64,
    pub errors: ErrorRegime,
    pub seed: u64,
}

impl Scenario {
    /// Full-size preset: 6,130 units with 100 active.
    pub fn preset(preset: Preset) -> Self {
        let t = ErrorRegime::T {
            dof_x: 3.0,
            dof_y: 3.0,
            sigma2_x: InvGammaLaw {
                shape: 3.0,
                scale: 0.2,
            },
            sigma2_y: InvGammaLaw {
                shape: 3.0,
                scale: 1.0,
            },
        };
        let (errors, replicates) = match preset {
            Preset::S1 => (t, 2),
            Preset::S2 => (
                ErrorRegime::Gaussian {
                    sigma2_x: 0.1,
                    sigma2_y: 0.5,
                },
                2,
            ),
            Preset::S3 => (t, 10),
        };
        Self {
            units: 6130,
            active: 100,
            replicates,
            beta_range: (-5.0, 3.0),
            mu: PriorConfig::empirical_mu(),
            alpha0: 12.557,
            alpha1: 2.538,
            errors,
            seed: 1,
        }
    }

    /// Desk-scale preset: 1,000 units with 50 active.
    pub fn desk(preset: Preset) -> Self {
        Self::preset(preset).with_size(1000, 50)
    }

    pub fn with_size(mut self, units: usize, active: usize) -> Self {
        self.units = units;
        self.active = active;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.units == 0 || self.replicates == 0 {
            return Err(Error::Config(
                "a scenario needs at least one unit and one replicate".into(),
            ));
        }
        if self.active > self.units {
            return Err(Error::Config(format!(
                "active count {} exceeds unit count {}",
                self.active, self.units
            )));
        }
        let (lo, hi) = self.beta_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!("effect range ({lo}, {hi}) is empty")));
        }
        let (mlo, mhi) = self.mu.bounds();
        if mlo.is_nan() || mhi.is_nan() || mlo >= mhi {
            return Err(Error::Config("viability range is empty".into()));
        }
        if let MuPrior::ScaledBeta { shape1, shape2, .. } = self.mu {
            if !(shape1 > 0.0 && shape2 > 0.0) {
                return Err(Error::Config("beta shapes must be positive".into()));
            }
        }
        let positive = match self.errors {
            ErrorRegime::T {
                dof_x,
                dof_y,
                sigma2_x,
                sigma2_y,
            } => [
                dof_x,
                dof_y,
                sigma2_x.shape,
                sigma2_x.scale,
                sigma2_y.shape,
                sigma2_y.scale,
            ]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite()),
            ErrorRegime::Gaussian { sigma2_x, sigma2_y } => {
                sigma2_x > 0.0 && sigma2_y > 0.0 && sigma2_x.is_finite() && sigma2_y.is_finite()
            }
        };
        if !positive {
            return Err(Error::Config(
                "error scale parameters must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Parameter values the data were generated from.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub gamma: Vec<bool>,
    pub beta: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma2_x: Vec<f64>,
    pub sigma2_y: Vec<f64>,
}

fn draw_mu<R: Rng + ?Sized>(law: &MuPrior, rng: &mut R) -> f64 {
    match *law {
        MuPrior::Uniform { lo, hi } => rng.random_range(lo..hi),
        MuPrior::ScaledBeta {
            shape1,
            shape2,
            lo,
            hi,
        } => {
            let b: f64 = Beta::new(shape1, shape2)
                .expect("validated beta shapes")
                .sample(rng);
            lo + (hi - lo) * b
        }
    }
}

/// Draw a screen and its truth. A pure function of the scenario, seed
/// included.
pub fn generate(scenario: &Scenario) -> Result<(ScreenData, Truth)> {
    scenario.validate()?;
    let s = scenario;
    let mut rng = rng_for(s.seed, Block::Simulate, 0);
    let (n, reps) = (s.units, s.replicates);
    let mut truth = Truth {
        gamma: Vec::with_capacity(n),
        beta: Vec::with_capacity(n),
        mu: Vec::with_capacity(n),
        sigma2_x: Vec::with_capacity(n),
        sigma2_y: Vec::with_capacity(n),
    };
    let mut x = Vec::with_capacity(n * reps);
    let mut y = Vec::with_capacity(n * reps);
    for i in 0..n {
        let active = i < s.active;
        let mu = draw_mu(&s.mu, &mut rng);
        let beta = if active {
            rng.random_range(s.beta_range.0..s.beta_range.1)
        } else {
            0.0
        };
        let (sx, sy) = match s.errors {
            ErrorRegime::T {
                sigma2_x, sigma2_y, ..
            } => (
                sample_inv_gamma(&mut rng, sigma2_x.shape, sigma2_x.scale),
                sample_inv_gamma(&mut rng, sigma2_y.shape, sigma2_y.scale),
            ),
            ErrorRegime::Gaussian { sigma2_x, sigma2_y } => (sigma2_x, sigma2_y),
        };
        let nu = s.alpha0 + beta + s.alpha1 * mu;
        for (centre, var, out, channel_y) in [(mu, sx, &mut x, false), (nu, sy, &mut y, true)] {
            for _ in 0..reps {
                let omega = match s.errors {
                    ErrorRegime::T { dof_x, dof_y, .. } => {
                        let d = if channel_y { dof_y } else { dof_x };
                        sample_gamma(&mut rng, d / 2.0, d / 2.0)
                    }
                    ErrorRegime::Gaussian { .. } => 1.0,
                };
                out.push(sample_normal(&mut rng, centre, (var / omega).sqrt()));
            }
        }
        truth.gamma.push(active);
        truth.beta.push(beta);
        truth.mu.push(mu);
        truth.sigma2_x.push(sx);
        truth.sigma2_y.push(sy);
    }
    let units = (0..n).map(Unit::synthetic).collect();
    Ok((ScreenData::new(units, reps, x, y)?, truth))
}
