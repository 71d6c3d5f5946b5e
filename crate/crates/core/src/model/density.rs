use statrs::function::gamma::ln_gamma;

use super::{ChannelState, ModelState, PriorConfig, ScreenData};
use crate::error::{Error, Result};
use crate::stats::{ln_beta_pdf, ln_inv_gamma_pdf, ln_normal_pdf, LN_2PI};

/// Inverse-gamma `(shape, scale)` with mean `a` and variance `b`.
pub fn ig_reparam(a: f64, b: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "mean and variance must be positive, got ({a}, {b})"
        )));
    }
    let k = a * a / b;
    Ok((k + 2.0, (k + 1.0) * a))
}

/// `|det d(A, B) / d(a, b)|` for the map `(a, b) -> (a^2/b + 2, (a^2/b + 1) a)`.
pub fn reparam_jacobian_det(a: f64, b: f64) -> f64 {
    let k = a * a / b;
    (a * a / (b * b)) * (k + 1.0)
}

/// Log-density of the variance hyperprior block for one channel, written in
/// the `(A, B)` coordinates the per-unit inverse-gamma priors use: uniform
/// `(a, b)` on the box, times the Jacobian of `(A, B) -> (a, b)`, times the
/// product of per-unit inverse-gamma densities.
pub(crate) fn ln_channel_hyper_block(ch: &ChannelState, a_upper: f64, b_upper: f64) -> f64 {
    if !(ch.a > 0.0 && ch.a < a_upper && ch.b > 0.0 && ch.b < b_upper) {
        return f64::NEG_INFINITY;
    }
    let (shape, scale) = ig_reparam(ch.a, ch.b).expect("checked positive");
    -(a_upper.ln() + b_upper.ln()) - reparam_jacobian_det(ch.a, ch.b).ln()
        + ln_sigma2_prior(&ch.sigma2, shape, scale)
}

/// `sum_i log IG(sigma2_i | shape, scale)`.
pub(crate) fn ln_sigma2_prior(sigma2: &[f64], shape: f64, scale: f64) -> f64 {
    let n = sigma2.len() as f64;
    let mut acc = n * (shape * scale.ln() - ln_gamma(shape));
    for &s in sigma2 {
        acc -= (shape + 1.0) * s.ln() + scale / s;
    }
    acc
}

/// `sum log Gamma(omega | d/2, rate d/2)` over one channel's mixing weights.
pub(crate) fn ln_omega_prior(omega: &[f64], dof: u32) -> f64 {
    let h = dof as f64 / 2.0;
    let n = omega.len() as f64;
    let mut acc = n * (h * h.ln() - ln_gamma(h));
    for &w in omega {
        acc += (h - 1.0) * w.ln() - h * w;
    }
    acc
}

fn check_shapes(data: &ScreenData, state: &ModelState) -> Result<()> {
    state.check_shape(data.n_units(), data.n_replicates())
}

/// Log of the conditional density of `(x, y)` given every parameter
/// including the mixing precisions.
pub fn log_conditional_density(data: &ScreenData, state: &ModelState) -> Result<f64> {
    check_shapes(data, state)?;
    let j = data.n_replicates();
    let mut acc = 0.0;
    for i in 0..data.n_units() {
        let (sx, sy) = (state.x.sigma2[i], state.y.sigma2[i]);
        let (mu, nu) = (state.mu[i], state.nu(i));
        let wx = state.x.omega_row(i, j);
        let wy = state.y.omega_row(i, j);
        for r in 0..j {
            let dx = data.x_row(i)[r] - mu;
            let dy = data.y_row(i)[r] - nu;
            acc += 0.5 * ((wx[r] / sx).ln() - LN_2PI) - 0.5 * wx[r] * dx * dx / sx;
            acc += 0.5 * ((wy[r] / sy).ln() - LN_2PI) - 0.5 * wy[r] * dy * dy / sy;
        }
    }
    Ok(acc)
}

fn in_support(state: &ModelState, prior: &PriorConfig) -> bool {
    let positive = |v: &[f64]| v.iter().all(|&s| s > 0.0 && s.is_finite());
    state.p > 0.0
        && state.p < 1.0
        && state.v > 0.0
        && state.v.is_finite()
        && state.alpha0.is_finite()
        && state.alpha1.is_finite()
        && state.mu.iter().all(|&m| prior.mu.contains(m))
        && state.beta.iter().all(|b| b.is_finite())
        && positive(&state.x.sigma2)
        && positive(&state.y.sigma2)
        && positive(&state.x.omega)
        && positive(&state.y.omega)
        && prior.dof.contains(state.x.dof)
        && prior.dof.contains(state.y.dof)
}

/// Log joint density of data, latent mixing weights and every parameter.
///
/// Includes all normalizing constants of the priors, so the value is a proper
/// log density. States outside the prior support return `-inf`.
pub fn log_joint_density(
    data: &ScreenData,
    state: &ModelState,
    prior: &PriorConfig,
) -> Result<f64> {
    check_shapes(data, state)?;
    if !in_support(state, prior) {
        return Ok(f64::NEG_INFINITY);
    }
    let n = data.n_units() as f64;
    let active = state.active_count() as f64;
    let mut acc = log_conditional_density(data, state)?;

    acc += ln_omega_prior(&state.x.omega, state.x.dof);
    acc += ln_omega_prior(&state.y.omega, state.y.dof);
    acc -= 2.0 * (prior.dof.len() as f64).ln();

    acc += ln_beta_pdf(state.p, prior.p_shape1, prior.p_shape2);
    acc += (n - active) * state.p.ln() + active * (1.0 - state.p).ln();

    for i in 0..data.n_units() {
        if state.gamma[i] {
            acc += ln_normal_pdf(state.beta[i], 0.0, state.v);
        }
    }
    acc += ln_normal_pdf(state.alpha0, 0.0, state.v);
    acc += ln_normal_pdf(state.alpha1, 0.0, state.v);
    acc += ln_inv_gamma_pdf(state.v, prior.v_shape, prior.v_scale);

    acc += ln_channel_hyper_block(&state.x, prior.ax_upper, prior.bx_upper);
    acc += ln_channel_hyper_block(&state.y, prior.ay_upper, prior.by_upper);

    acc += state.mu.iter().map(|&m| prior.mu.ln_pdf(m)).sum::<f64>();
    Ok(acc)
}
