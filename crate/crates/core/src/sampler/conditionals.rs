//! Full conditional distributions of the Gibbs blocks.
//!
//! Each function returns the parameters of a standard distribution so the
//! blocks can be checked against ratios of the joint log density.

/// Gamma `(shape, rate)` for one mixing precision given its residual.
pub fn omega(dof: u32, resid: f64, sigma2: f64) -> (f64, f64) {
    let d = dof as f64;
    ((d + 1.0) / 2.0, (d + resid * resid / sigma2) / 2.0)
}

/// Inverse-gamma `(shape, scale)` for a per-unit variance.
///
/// `weighted_ss` is `sum_j omega_j * resid_j^2`.
pub fn sigma2(
    prior_shape: f64,
    prior_scale: f64,
    replicates: usize,
    weighted_ss: f64,
) -> (f64, f64) {
    (
        prior_shape + replicates as f64 / 2.0,
        prior_scale + weighted_ss / 2.0,
    )
}

/// Likelihood factor of `mu_i`, as a normal `(mean, variance)`.
///
/// Combines the viability replicates with the activity replicates through
/// the slope `alpha1`; `y_offset` is `alpha0 + gamma_i beta_i`.
#[allow(clippy::too_many_arguments)]
pub fn mu_likelihood(
    x: &[f64],
    y: &[f64],
    omega_x: &[f64],
    omega_y: &[f64],
    sigma2_x: f64,
    sigma2_y: f64,
    alpha1: f64,
    y_offset: f64,
) -> (f64, f64) {
    let mut prec = 0.0;
    let mut lin = 0.0;
    for r in 0..x.len() {
        let wx = omega_x[r] / sigma2_x;
        let wy = omega_y[r] / sigma2_y;
        prec += wx + alpha1 * alpha1 * wy;
        lin += wx * x[r] + alpha1 * wy * (y[r] - y_offset);
    }
    (lin / prec, 1.0 / prec)
}

/// Sufficient statistics of the activity residuals `r = y - alpha0 - alpha1 mu`
/// with precisions `w = omega_y / sigma2_y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabStats {
    /// `sum w`
    pub precision: f64,
    /// `sum w r`
    pub weighted_sum: f64,
}

impl SlabStats {
    pub fn new(resid: &[f64], omega_y: &[f64], sigma2_y: f64) -> Self {
        let mut precision = 0.0;
        let mut weighted_sum = 0.0;
        for (r, w) in resid.iter().zip(omega_y) {
            let w = w / sigma2_y;
            precision += w;
            weighted_sum += w * r;
        }
        Self {
            precision,
            weighted_sum,
        }
    }

    /// Log Bayes factor of slab against spike with `beta ~ N(0, v)`
    /// integrated out.
    pub fn ln_bayes_factor(&self, v: f64) -> f64 {
        let post_prec = self.precision + 1.0 / v;
        -0.5 * (1.0 + v * self.precision).ln()
            + self.weighted_sum * self.weighted_sum / (2.0 * post_prec)
    }

    /// Log posterior odds of `gamma = 1` against `gamma = 0`.
    pub fn ln_odds_active(&self, p: f64, v: f64) -> f64 {
        (1.0 - p).ln() - p.ln() + self.ln_bayes_factor(v)
    }

    /// `P(gamma = 1 | rest)` with `beta` integrated out.
    pub fn prob_active(&self, p: f64, v: f64) -> f64 {
        let lo = self.ln_odds_active(p, v);
        if lo == f64::NEG_INFINITY {
            0.0
        } else if lo >= 0.0 {
            1.0 / (1.0 + (-lo).exp())
        } else {
            let e = lo.exp();
            e / (1.0 + e)
        }
    }

    /// Normal `(mean, variance)` of `beta` given `gamma = 1`.
    pub fn beta_conditional(&self, v: f64) -> (f64, f64) {
        let post_prec = self.precision + 1.0 / v;
        (self.weighted_sum / post_prec, 1.0 / post_prec)
    }
}

/// Weighted cross-products for the `(alpha0, alpha1)` regression of
/// `z = y - gamma beta` on `mu` with weights `omega_y / sigma2_y`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AlphaStats {
    pub sw: f64,
    pub swm: f64,
    pub swmm: f64,
    pub swz: f64,
    pub swmz: f64,
}

impl AlphaStats {
    pub fn add(&mut self, w: f64, mu: f64, z: f64) {
        self.sw += w;
        self.swm += w * mu;
        self.swmm += w * mu * mu;
        self.swz += w * z;
        self.swmz += w * mu * z;
    }

    /// Bivariate normal conditional: mean and precision matrix
    /// `[[p00, p01], [p01, p11]]`.
    pub fn joint(&self, v: f64) -> ([f64; 2], [f64; 3]) {
        let p00 = self.sw + 1.0 / v;
        let p01 = self.swm;
        let p11 = self.swmm + 1.0 / v;
        let det = p00 * p11 - p01 * p01;
        let m0 = (p11 * self.swz - p01 * self.swmz) / det;
        let m1 = (p00 * self.swmz - p01 * self.swz) / det;
        ([m0, m1], [p00, p01, p11])
    }

    /// Normal `(mean, variance)` of `alpha0` given `alpha1`.
    pub fn alpha0_given(&self, alpha1: f64, v: f64) -> (f64, f64) {
        let prec = self.sw + 1.0 / v;
        ((self.swz - alpha1 * self.swm) / prec, 1.0 / prec)
    }

    /// Normal `(mean, variance)` of `alpha1` given `alpha0`.
    pub fn alpha1_given(&self, alpha0: f64, v: f64) -> (f64, f64) {
        let prec = self.swmm + 1.0 / v;
        ((self.swmz - alpha0 * self.swm) / prec, 1.0 / prec)
    }
}

/// Inverse-gamma `(shape, scale)` of the slab variance.
pub fn slab_variance(
    prior_shape: f64,
    prior_scale: f64,
    active: usize,
    active_beta_ss: f64,
    alpha0: f64,
    alpha1: f64,
) -> (f64, f64) {
    (
        prior_shape + (active as f64 + 2.0) / 2.0,
        prior_scale + (active_beta_ss + alpha0 * alpha0 + alpha1 * alpha1) / 2.0,
    )
}

/// Beta shapes of the null probability `p`.
pub fn null_probability(shape1: f64, shape2: f64, units: usize, active: usize) -> (f64, f64) {
    ((units - active) as f64 + shape1, active as f64 + shape2)
}

/// Unnormalized log conditional of a degrees-of-freedom value given the
/// count, `sum ln omega` and `sum omega` of one channel's mixing weights.
pub fn dof_log_weight(dof: u32, count: usize, sum_ln_omega: f64, sum_omega: f64) -> f64 {
    let h = dof as f64 / 2.0;
    count as f64 * (h * h.ln() - statrs::function::gamma::ln_gamma(h)) + (h - 1.0) * sum_ln_omega
        - h * sum_omega
}

/// Log target of the `(a, b)` random walk on `(ln a, ln b)`, up to a
/// constant: the inverse-gamma prior of every unit variance, a flat density
/// on the `(a, b)` box, and the `a b` factor from the log-scale proposal.
/// Box membership is checked by the caller.
pub fn hyper_log_target(sigma2: impl IntoIterator<Item = f64>, a: f64, b: f64) -> f64 {
    let Ok((shape, scale)) = crate::model::ig_reparam(a, b) else {
        return f64::NEG_INFINITY;
    };
    let norm = shape * scale.ln() - statrs::function::gamma::ln_gamma(shape);
    let mut acc = 0.0;
    for s in sigma2 {
        acc += norm - (shape + 1.0) * s.ln() - scale / s;
    }
    acc + a.ln() + b.ln()
}
