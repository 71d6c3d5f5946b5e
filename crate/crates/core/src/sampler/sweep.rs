use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use rayon::prelude::*;

use super::conditionals::{self, AlphaStats, SlabStats};
use super::config::{AlphaUpdate, DofUpdate, FixedParams, SamplerConfig};
use super::draws::{Acceptance, AcceptanceRate};
use crate::model::{ig_reparam, ModelState, MuPrior, PriorConfig, ScreenData};
use crate::rng::{self, Block, StreamKey};
use crate::stats::{
    sample_gamma, sample_inv_gamma, sample_log_categorical, sample_normal, sample_truncated_normal,
};

const ADAPT_WINDOW: u64 = 50;

/// Stable per-unit stream identifier derived from the unit name, so that
/// reordering units reorders results without changing them.
pub(crate) fn unit_stream_id(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    rng::key(&[h, name.len() as u64])
}

/// Unit indices sorted by name; every cross-unit reduction runs in this order.
pub(crate) fn name_order(data: &ScreenData) -> Vec<usize> {
    let mut order: Vec<usize> = (0..data.n_units()).collect();
    order.sort_by(|&a, &b| data.units()[a].name.cmp(&data.units()[b].name));
    order
}

#[derive(Debug, Clone, Copy)]
struct Globals {
    alpha0: f64,
    alpha1: f64,
    p: f64,
    v: f64,
    dof_x: u32,
    dof_y: u32,
    ig_x: (f64, f64),
    ig_y: (f64, f64),
}

struct UnitSlot<'s> {
    gamma: &'s mut bool,
    beta: &'s mut f64,
    mu: &'s mut f64,
    sigma2_x: &'s mut f64,
    sigma2_y: &'s mut f64,
    omega_x: &'s mut [f64],
    omega_y: &'s mut [f64],
}

struct UnitContext<'a> {
    key: StreamKey,
    iteration: u64,
    mu_prior: MuPrior,
    fixed: FixedParams,
    globals: Globals,
    data: &'a ScreenData,
    unit_ids: &'a [u64],
}

impl UnitContext<'_> {
    /// Update `omega`, `sigma2`, `mu` and `(gamma, beta)` of one unit in
    /// that order. Returns the outcome of the `mu` Metropolis step when one
    /// was needed.
    fn update(&self, i: usize, s: UnitSlot<'_>) -> Option<bool> {
        let g = &self.globals;
        let x = self.data.x_row(i);
        let y = self.data.y_row(i);
        let id = self.unit_ids[i];
        let reps = x.len();

        if !self.fixed.unit_omega {
            let mut rng = self.key.rng(self.iteration, Block::Omega, id);
            let nu = g.alpha0 + effect(*s.gamma, *s.beta) + g.alpha1 * *s.mu;
            for (w, xr) in s.omega_x.iter_mut().zip(x) {
                let (shape, rate) = conditionals::omega(g.dof_x, xr - *s.mu, *s.sigma2_x);
                *w = sample_gamma(&mut rng, shape, rate);
            }
            for (w, yr) in s.omega_y.iter_mut().zip(y) {
                let (shape, rate) = conditionals::omega(g.dof_y, yr - nu, *s.sigma2_y);
                *w = sample_gamma(&mut rng, shape, rate);
            }
        }

        if self.fixed.shared_sigma2.is_none() {
            let mut rng = self.key.rng(self.iteration, Block::Sigma2, id);
            let nu = g.alpha0 + effect(*s.gamma, *s.beta) + g.alpha1 * *s.mu;
            let ss_x: f64 = (0..reps)
                .map(|r| s.omega_x[r] * (x[r] - *s.mu).powi(2))
                .sum();
            let ss_y: f64 = (0..reps).map(|r| s.omega_y[r] * (y[r] - nu).powi(2)).sum();
            let (shape, scale) = conditionals::sigma2(g.ig_x.0, g.ig_x.1, reps, ss_x);
            *s.sigma2_x = sample_inv_gamma(&mut rng, shape, scale);
            let (shape, scale) = conditionals::sigma2(g.ig_y.0, g.ig_y.1, reps, ss_y);
            *s.sigma2_y = sample_inv_gamma(&mut rng, shape, scale);
        }

        let mu_outcome = {
            let mut rng = self.key.rng(self.iteration, Block::Mu, id);
            let offset = g.alpha0 + effect(*s.gamma, *s.beta);
            let (mean, var) = conditionals::mu_likelihood(
                x,
                y,
                s.omega_x,
                s.omega_y,
                *s.sigma2_x,
                *s.sigma2_y,
                g.alpha1,
                offset,
            );
            let (lo, hi) = self.mu_prior.bounds();
            let proposal = sample_truncated_normal(&mut rng, mean, var.sqrt(), lo, hi);
            match self.mu_prior {
                MuPrior::Uniform { .. } => {
                    *s.mu = proposal;
                    None
                }
                MuPrior::ScaledBeta { .. } => {
                    let ln_ratio = self.mu_prior.ln_pdf(proposal) - self.mu_prior.ln_pdf(*s.mu);
                    let accept = rng.random::<f64>().ln() < ln_ratio;
                    if accept {
                        *s.mu = proposal;
                    }
                    Some(accept)
                }
            }
        };

        {
            let mut rng = self.key.rng(self.iteration, Block::GammaBeta, id);
            let mut stats = SlabStats {
                precision: 0.0,
                weighted_sum: 0.0,
            };
            for (wr, yr) in s.omega_y.iter().zip(y) {
                let w = wr / *s.sigma2_y;
                stats.precision += w;
                stats.weighted_sum += w * (yr - g.alpha0 - g.alpha1 * *s.mu);
            }
            let prob = stats.prob_active(g.p, g.v);
            if rng.random::<f64>() < prob {
                let (m, var) = stats.beta_conditional(g.v);
                *s.gamma = true;
                *s.beta = sample_normal(&mut rng, m, var.sqrt());
            } else {
                *s.gamma = false;
                *s.beta = 0.0;
            }
        }
        mu_outcome
    }
}

#[inline]
fn effect(gamma: bool, beta: f64) -> f64 {
    if gamma {
        beta
    } else {
        0.0
    }
}

/// Draw `(gamma_i, beta_i)` from their joint conditional with `beta_i`
/// integrated out of the indicator step.
pub fn update_gamma_beta<R: Rng + ?Sized>(
    i: usize,
    state: &ModelState,
    data: &ScreenData,
    rng: &mut R,
) -> (bool, f64) {
    let reps = data.n_replicates();
    let resid: Vec<f64> = data
        .y_row(i)
        .iter()
        .map(|y| y - state.alpha0 - state.alpha1 * state.mu[i])
        .collect();
    let stats = SlabStats::new(&resid, state.y.omega_row(i, reps), state.y.sigma2[i]);
    if rng.random::<f64>() < stats.prob_active(state.p, state.v) {
        let (m, var) = stats.beta_conditional(state.v);
        (true, sample_normal(rng, m, var.sqrt()))
    } else {
        (false, 0.0)
    }
}

/// One systematic scan of every block:
/// omega, sigma2, mu, (gamma, beta) per unit; then alpha, V, p, d, (a, b).
pub struct Sweeper<'a> {
    data: &'a ScreenData,
    prior: &'a PriorConfig,
    config: &'a SamplerConfig,
    key: StreamKey,
    unit_ids: Vec<u64>,
    /// Fixed summation order for cross-unit reductions (by unit name).
    order: Vec<usize>,
    pub scales: [f64; 2],
    pub acceptance: Acceptance,
    window: [AcceptanceRate; 2],
}

impl<'a> Sweeper<'a> {
    pub fn new(
        data: &'a ScreenData,
        prior: &'a PriorConfig,
        config: &'a SamplerConfig,
        chain: u64,
    ) -> Self {
        let unit_ids: Vec<u64> = data
            .units()
            .iter()
            .map(|u| unit_stream_id(&u.name))
            .collect();
        Self {
            data,
            prior,
            config,
            key: StreamKey::new(config.seed, chain),
            unit_ids,
            order: name_order(data),
            scales: [config.proposal_scale_x, config.proposal_scale_y],
            acceptance: Acceptance::default(),
            window: Default::default(),
        }
    }

    pub fn key(&self) -> StreamKey {
        self.key
    }

    pub fn sweep(&mut self, state: &mut ModelState, iteration: u64) {
        let reps = self.data.n_replicates();
        let fixed = self.config.fixed;
        let globals = Globals {
            alpha0: state.alpha0,
            alpha1: state.alpha1,
            p: state.p,
            v: state.v,
            dof_x: state.x.dof,
            dof_y: state.y.dof,
            ig_x: ig_reparam(state.x.a, state.x.b).unwrap_or((3.0, 1.0)),
            ig_y: ig_reparam(state.y.a, state.y.b).unwrap_or((3.0, 1.0)),
        };
        let ctx = UnitContext {
            key: self.key,
            iteration,
            mu_prior: self.prior.mu,
            fixed,
            globals,
            data: self.data,
            unit_ids: &self.unit_ids,
        };

        let slots = state
            .gamma
            .iter_mut()
            .zip(state.beta.iter_mut())
            .zip(state.mu.iter_mut())
            .zip(state.x.sigma2.iter_mut())
            .zip(state.y.sigma2.iter_mut())
            .zip(state.x.omega.chunks_mut(reps))
            .zip(state.y.omega.chunks_mut(reps))
            .map(
                |((((((gamma, beta), mu), sigma2_x), sigma2_y), omega_x), omega_y)| UnitSlot {
                    gamma,
                    beta,
                    mu,
                    sigma2_x,
                    sigma2_y,
                    omega_x,
                    omega_y,
                },
            );
        let outcomes: Vec<Option<bool>> = if self.config.parallel_units {
            let slots: Vec<UnitSlot<'_>> = slots.collect();
            slots
                .into_par_iter()
                .enumerate()
                .map(|(i, s)| ctx.update(i, s))
                .collect()
        } else {
            slots.enumerate().map(|(i, s)| ctx.update(i, s)).collect()
        };
        for accepted in outcomes.into_iter().flatten() {
            self.acceptance.mu.record(accepted);
        }

        self.update_alpha(state, iteration);
        if let Some(v) = fixed.slab_variance {
            state.v = v;
        } else {
            self.update_slab_variance(state, iteration);
        }
        self.update_null_probability(state, iteration);
        if self.config.dof_update == DofUpdate::Categorical && !fixed.unit_omega {
            self.update_dof(state, iteration);
        }
        if fixed.shared_sigma2.is_none() {
            self.update_hyper(state, iteration, false);
            self.update_hyper(state, iteration, true);
            self.adapt(iteration);
        }
    }

    fn update_alpha(&self, state: &mut ModelState, iteration: u64) {
        let reps = self.data.n_replicates();
        let mut st = AlphaStats::default();
        for &i in &self.order {
            let w_row = state.y.omega_row(i, reps);
            let z_off = state.effect(i);
            for (r, y) in self.data.y_row(i).iter().enumerate() {
                st.add(w_row[r] / state.y.sigma2[i], state.mu[i], y - z_off);
            }
        }
        let mut rng = self.key.rng(iteration, Block::Alpha, 0);
        match self.config.alpha_update {
            AlphaUpdate::Joint => {
                let (m, [p00, p01, p11]) = st.joint(state.v);
                let l00 = p00.sqrt();
                let l10 = p01 / l00;
                let l11 = (p11 - l10 * l10).sqrt();
                let e0: f64 = StandardNormal.sample(&mut rng);
                let e1: f64 = StandardNormal.sample(&mut rng);
                let u1 = e1 / l11;
                let u0 = (e0 - l10 * u1) / l00;
                state.alpha0 = m[0] + u0;
                state.alpha1 = m[1] + u1;
            }
            AlphaUpdate::Scalar => {
                let (m, var) = st.alpha0_given(state.alpha1, state.v);
                state.alpha0 = sample_normal(&mut rng, m, var.sqrt());
                let (m, var) = st.alpha1_given(state.alpha0, state.v);
                state.alpha1 = sample_normal(&mut rng, m, var.sqrt());
            }
        }
    }

    fn update_slab_variance(&self, state: &mut ModelState, iteration: u64) {
        let mut active = 0;
        let mut ss = 0.0;
        for &i in &self.order {
            if state.gamma[i] {
                active += 1;
                ss += state.beta[i] * state.beta[i];
            }
        }
        let (shape, scale) = conditionals::slab_variance(
            self.prior.v_shape,
            self.prior.v_scale,
            active,
            ss,
            state.alpha0,
            state.alpha1,
        );
        let mut rng = self.key.rng(iteration, Block::V, 0);
        state.v = sample_inv_gamma(&mut rng, shape, scale);
    }

    fn update_null_probability(&self, state: &mut ModelState, iteration: u64) {
        let (s1, s2) = conditionals::null_probability(
            self.prior.p_shape1,
            self.prior.p_shape2,
            state.n_units(),
            state.active_count(),
        );
        let mut rng = self.key.rng(iteration, Block::P, 0);
        let p: f64 = Beta::new(s1, s2).expect("positive shapes").sample(&mut rng);
        state.p = p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
    }

    fn update_dof(&self, state: &mut ModelState, iteration: u64) {
        let reps = self.data.n_replicates();
        let support = self.prior.dof;
        for (tag, channel) in [(0u64, &mut state.x), (1u64, &mut state.y)] {
            let mut sum_ln = 0.0;
            let mut sum = 0.0;
            for &i in &self.order {
                for w in channel.omega_row(i, reps) {
                    sum_ln += w.ln();
                    sum += w;
                }
            }
            let count = channel.omega.len();
            let weights: Vec<f64> = support
                .iter()
                .map(|d| conditionals::dof_log_weight(d, count, sum_ln, sum))
                .collect();
            let mut rng = self.key.rng(iteration, Block::Dof, tag);
            channel.dof = support.lo + sample_log_categorical(&mut rng, &weights) as u32;
        }
    }

    fn ln_hyper_target(&self, sigma2: &[f64], a: f64, b: f64) -> f64 {
        conditionals::hyper_log_target(self.order.iter().map(|&i| sigma2[i]), a, b)
    }

    /// Random-walk Metropolis on `(ln a, ln b)` for one channel.
    fn update_hyper(&mut self, state: &mut ModelState, iteration: u64, channel_y: bool) {
        let (a_upper, b_upper) = self.prior.hyper_bounds(channel_y);
        let tag = channel_y as usize;
        let step = self.scales[tag];
        let mut rng = self.key.rng(iteration, Block::Hyper, tag as u64);
        let ch = if channel_y {
            &mut state.y
        } else {
            &mut state.x
        };
        let e0: f64 = StandardNormal.sample(&mut rng);
        let e1: f64 = StandardNormal.sample(&mut rng);
        let a_new = ch.a * (step * e0).exp();
        let b_new = ch.b * (step * e1).exp();
        let u: f64 = rng.random();
        let accepted = if a_new < a_upper && b_new < b_upper {
            let ln_ratio = self.ln_hyper_target(&ch.sigma2, a_new, b_new)
                - self.ln_hyper_target(&ch.sigma2, ch.a, ch.b);
            ln_ratio.is_finite() && u.ln() < ln_ratio
        } else {
            false
        };
        if accepted {
            ch.a = a_new;
            ch.b = b_new;
        }
        if channel_y {
            self.acceptance.hyper_y.record(accepted);
        } else {
            self.acceptance.hyper_x.record(accepted);
        }
        if self.config.adapt_proposals && (iteration as usize) < self.config.burn_in {
            self.window[tag].record(accepted);
        }
    }

    fn adapt(&mut self, iteration: u64) {
        if !self.config.adapt_proposals || (iteration as usize) >= self.config.burn_in {
            return;
        }
        if !(iteration + 1).is_multiple_of(ADAPT_WINDOW) {
            return;
        }
        for tag in 0..2 {
            if let Some(rate) = self.window[tag].rate() {
                if rate < 0.2 {
                    self.scales[tag] *= 0.7;
                } else if rate > 0.5 {
                    self.scales[tag] *= 1.4;
                }
            }
            self.window[tag] = AcceptanceRate::default();
        }
    }
}
