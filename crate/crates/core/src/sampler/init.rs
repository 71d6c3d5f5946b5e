use rand::Rng;
use rand_distr::{Beta, Distribution};

use super::config::{InitStrategy, SamplerConfig};
use super::sweep::{name_order, unit_stream_id};
use crate::error::{Error, Result};
use crate::model::{log_joint_density, ChannelState, ModelState, PriorConfig, ScreenData};
use crate::rng::{Block, StreamKey};
use crate::stats::{mean, sample_normal, variance};

const DEFAULT_DOF: u32 = 30;

fn clamp_open(v: f64, lo: f64, hi: f64) -> f64 {
    let eps = 1e-6 * (hi - lo);
    v.clamp(lo + eps, hi - eps)
}

fn channel_start(
    data: &ScreenData,
    channel_y: bool,
    prior: &PriorConfig,
    shared: Option<f64>,
    dof: u32,
    order: &[usize],
) -> ChannelState {
    let n = data.n_units();
    let reps = data.n_replicates();
    let sigma2: Vec<f64> = match shared {
        Some(s) => vec![s; n],
        None => (0..n)
            .map(|i| {
                let row = if channel_y {
                    data.y_row(i)
                } else {
                    data.x_row(i)
                };
                if reps >= 2 {
                    variance(row, 1).max(1e-6)
                } else {
                    0.1
                }
            })
            .collect(),
    };
    let (a_upper, b_upper) = prior.hyper_bounds(channel_y);
    let sorted: Vec<f64> = order.iter().map(|&i| sigma2[i]).collect();
    let a = mean(&sorted);
    let b = if n >= 2 { variance(&sorted, 1) } else { 0.0 };
    let pick = |v: f64, upper: f64| {
        if v > 0.0 && v.is_finite() {
            v.clamp(0.01 * upper, 0.99 * upper)
        } else {
            0.5 * upper
        }
    };
    ChannelState {
        sigma2,
        omega: vec![1.0; n * reps],
        dof,
        a: pick(a, a_upper),
        b: pick(b, b_upper),
    }
}

/// Moment-based starting state, optionally jittered for multi-chain runs.
pub fn initial_state(
    data: &ScreenData,
    prior: &PriorConfig,
    config: &SamplerConfig,
    chain: u64,
) -> Result<ModelState> {
    let n = data.n_units();
    if n == 0 {
        return Err(Error::Initialization("no units to fit".into()));
    }
    let (lo, hi) = prior.mu.bounds();
    let mu: Vec<f64> = (0..n)
        .map(|i| clamp_open(mean(data.x_row(i)), lo, hi))
        .collect();
    let order = name_order(data);
    let mu_sorted: Vec<f64> = order.iter().map(|&i| mu[i]).collect();
    let ybar: Vec<f64> = order.iter().map(|&i| mean(data.y_row(i))).collect();
    let (alpha0, alpha1) = least_squares(&mu_sorted, &ybar);

    let dof = DEFAULT_DOF.clamp(prior.dof.lo, prior.dof.hi);
    let shared = config.fixed.shared_sigma2;
    let v = config
        .fixed
        .slab_variance
        .unwrap_or(if prior.v_shape > 1.0 {
            prior.v_scale / (prior.v_shape - 1.0)
        } else {
            prior.v_scale / prior.v_shape
        });
    let mut state = ModelState {
        gamma: vec![false; n],
        beta: vec![0.0; n],
        mu,
        alpha0,
        alpha1,
        x: channel_start(data, false, prior, shared.map(|s| s.0), dof, &order),
        y: channel_start(data, true, prior, shared.map(|s| s.1), dof, &order),
        p: prior.p_shape1 / (prior.p_shape1 + prior.p_shape2),
        v,
    };

    if config.init == InitStrategy::Overdispersed && chain > 0 {
        jitter(
            &mut state,
            data,
            prior,
            config,
            StreamKey::new(config.seed, chain),
        );
    }

    let lp = log_joint_density(data, &state, prior)?;
    if !lp.is_finite() {
        return Err(Error::Initialization(format!(
            "log joint density at the starting state is {lp}"
        )));
    }
    Ok(state)
}

fn jitter(
    state: &mut ModelState,
    data: &ScreenData,
    prior: &PriorConfig,
    config: &SamplerConfig,
    key: StreamKey,
) {
    let mut rng = key.rng(0, Block::Init, 0);
    let (lo, hi) = prior.mu.bounds();
    state.alpha0 += sample_normal(&mut rng, 0.0, 1.0);
    state.alpha1 += sample_normal(&mut rng, 0.0, 0.5);
    for (m, unit) in state.mu.iter_mut().zip(data.units()) {
        let mut unit_rng = key.rng(0, Block::Init, unit_stream_id(&unit.name));
        *m = clamp_open(*m + sample_normal(&mut unit_rng, 0.0, 0.1), lo, hi);
    }
    let p: f64 = Beta::new(prior.p_shape1, prior.p_shape2)
        .expect("validated shapes")
        .sample(&mut rng);
    state.p = p.clamp(0.01, 0.999);
    if config.fixed.slab_variance.is_none() {
        state.v *= sample_normal(&mut rng, 0.0, 1.0).exp();
    }
    if !config.fixed.unit_omega {
        state.x.dof = rng.random_range(prior.dof.lo..=prior.dof.hi);
        state.y.dof = rng.random_range(prior.dof.lo..=prior.dof.hi);
    }
    if config.fixed.shared_sigma2.is_none() {
        for (ch, channel_y) in [(&mut state.x, false), (&mut state.y, true)] {
            let (au, bu) = prior.hyper_bounds(channel_y);
            ch.a = rng.random_range(0.05 * au..0.95 * au);
            ch.b = rng.random_range(0.05 * bu..0.95 * bu);
        }
    }
}

/// Ordinary least squares of `y` on `x`; slope 0 when `x` is constant.
fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx <= 0.0 {
        return (my, 0.0);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}
