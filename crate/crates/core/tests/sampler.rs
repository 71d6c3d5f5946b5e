use htsbayes::model::{
    log_joint_density, reparam_jacobian_det, ChannelState, ModelState, MuPrior, PriorConfig,
    ScreenData, Unit,
};
use htsbayes::rng::{rng_for, Block};
use htsbayes::sampler::conditionals::{self, AlphaStats, SlabStats};
use htsbayes::sampler::{gaussian_method_chain, run_chain, update_gamma_beta, SamplerConfig};
use htsbayes::stats::{ln_beta_pdf, ln_gamma_pdf, ln_inv_gamma_pdf, ln_normal_pdf};
use htsbayes::Error;

const TOL: f64 = 1e-10;

fn toy_data() -> ScreenData {
    ScreenData::from_rows(
        &[
            vec![-0.4, -0.2],
            vec![0.3, 0.1],
            vec![-1.1, -0.9],
            vec![0.0, 0.2],
        ],
        &[
            vec![-0.5, -0.1],
            vec![1.4, 1.2],
            vec![-1.0, -1.3],
            vec![-0.2, 0.1],
        ],
    )
    .unwrap()
}

fn toy_prior() -> PriorConfig {
    PriorConfig::simulation_default()
}

fn toy_state() -> ModelState {
    let channel = |s: [f64; 4], w: [f64; 8], dof| ChannelState {
        sigma2: s.to_vec(),
        omega: w.to_vec(),
        dof,
        a: 0.08,
        b: 0.05,
    };
    ModelState {
        gamma: vec![false, true, false, true],
        beta: vec![0.0, 1.1, 0.0, -0.3],
        mu: vec![-0.3, 0.2, -1.0, 0.1],
        alpha0: 0.05,
        alpha1: 0.9,
        x: channel(
            [0.05, 0.07, 0.04, 0.06],
            [1.0, 0.8, 1.3, 0.6, 1.1, 0.9, 1.4, 0.7],
            5,
        ),
        y: channel(
            [0.08, 0.05, 0.09, 0.06],
            [0.7, 1.2, 0.9, 1.0, 1.5, 0.6, 0.8, 1.1],
            7,
        ),
        p: 0.8,
        v: 2.5,
    }
}

fn lj(data: &ScreenData, state: &ModelState) -> f64 {
    log_joint_density(data, state, &toy_prior()).unwrap()
}

/// Assert that the joint density ratio between two states that differ in one
/// block equals the ratio of the claimed conditional density.
fn assert_ratio(lj1: f64, lj2: f64, lc1: f64, lc2: f64) {
    let lhs = lj1 - lj2;
    let rhs = lc1 - lc2;
    assert!(
        (lhs - rhs).abs() < TOL * (1.0 + lhs.abs()),
        "joint ratio {lhs} vs conditional ratio {rhs}"
    );
}

#[test]
fn omega_block_matches_joint() {
    let data = toy_data();
    let s0 = toy_state();
    let (i, r) = (1, 1);
    let resid = data.x_row(i)[r] - s0.mu[i];
    let (shape, rate) = conditionals::omega(s0.x.dof, resid, s0.x.sigma2[i]);
    let mut s1 = s0.clone();
    let mut s2 = s0.clone();
    s1.x.omega[i * 2 + r] = 0.4;
    s2.x.omega[i * 2 + r] = 2.3;
    assert_ratio(
        lj(&data, &s1),
        lj(&data, &s2),
        ln_gamma_pdf(0.4, shape, rate),
        ln_gamma_pdf(2.3, shape, rate),
    );

    let nu = s0.nu(3);
    let resid = data.y_row(3)[0] - nu;
    let (shape, rate) = conditionals::omega(s0.y.dof, resid, s0.y.sigma2[3]);
    s1 = s0.clone();
    s2 = s0.clone();
    s1.y.omega[6] = 0.1;
    s2.y.omega[6] = 1.7;
    assert_ratio(
        lj(&data, &s1),
        lj(&data, &s2),
        ln_gamma_pdf(0.1, shape, rate),
        ln_gamma_pdf(1.7, shape, rate),
    );
}

#[test]
fn omega_block_example() {
    let r = 0.7;
    assert_eq!(conditionals::omega(3, r, 1.0), (2.0, (3.0 + r * r) / 2.0));
}

#[test]
fn sigma2_block_matches_joint() {
    let data = toy_data();
    let s0 = toy_state();
    let i = 2;
    let (ig_shape, ig_scale) = htsbayes::model::ig_reparam(s0.y.a, s0.y.b).unwrap();
    let w = s0.y.omega_row(i, 2);
    let ss: f64 = data
        .y_row(i)
        .iter()
        .zip(w)
        .map(|(y, w)| w * (y - s0.nu(i)).powi(2))
        .sum();
    let (shape, scale) = conditionals::sigma2(ig_shape, ig_scale, 2, ss);
    let mut s1 = s0.clone();
    let mut s2 = s0.clone();
    s1.y.sigma2[i] = 0.03;
    s2.y.sigma2[i] = 0.2;
    assert_ratio(
        lj(&data, &s1),
        lj(&data, &s2),
        ln_inv_gamma_pdf(0.03, shape, scale),
        ln_inv_gamma_pdf(0.2, shape, scale),
    );
}

#[test]
fn mu_block_matches_joint() {
    let data = toy_data();
    let s0 = toy_state();
    for i in [0, 1] {
        let (m, var) = conditionals::mu_likelihood(
            data.x_row(i),
            data.y_row(i),
            s0.x.omega_row(i, 2),
            s0.y.omega_row(i, 2),
            s0.x.sigma2[i],
            s0.y.sigma2[i],
            s0.alpha1,
            s0.alpha0 + s0.effect(i),
        );
        let mut s1 = s0.clone();
        let mut s2 = s0.clone();
        s1.mu[i] = -0.8;
        s2.mu[i] = 0.6;
        assert_ratio(
            lj(&data, &s1),
            lj(&data, &s2),
            ln_normal_pdf(-0.8, m, var),
            ln_normal_pdf(0.6, m, var),
        );
    }
}

#[test]
fn beta_block_matches_joint() {
    let data = toy_data();
    let s0 = toy_state();
    let i = 1;
    let resid: Vec<f64> = data
        .y_row(i)
        .iter()
        .map(|y| y - s0.alpha0 - s0.alpha1 * s0.mu[i])
        .collect();
    let stats = SlabStats::new(&resid, s0.y.omega_row(i, 2), s0.y.sigma2[i]);
    let (m, var) = stats.beta_conditional(s0.v);
    let mut s1 = s0.clone();
    let mut s2 = s0.clone();
    s1.beta[i] = 0.2;
    s2.beta[i] = 1.9;
    assert_ratio(
        lj(&data, &s1),
        lj(&data, &s2),
        ln_normal_pdf(0.2, m, var),
        ln_normal_pdf(1.9, m, var),
    );
}

#[test]
fn alpha_block_matches_joint() {
    let data = toy_data();
    let s0 = toy_state();
    let mut st = AlphaStats::default();
    for i in 0..4 {
        for (r, y) in data.y_row(i).iter().enumerate() {
            st.add(
                s0.y.omega_row(i, 2)[r] / s0.y.sigma2[i],
                s0.mu[i],
                y - s0.effect(i),
            );
        }
    }
    let (m, [p00, p01, p11]) = st.joint(s0.v);
    let quad = |a0: f64, a1: f64| {
        let d0 = a0 - m[0];
        let d1 = a1 - m[1];
        -0.5 * (p00 * d0 * d0 + 2.0 * p01 * d0 * d1 + p11 * d1 * d1)
    };
    let mut s1 = s0.clone();
    let mut s2 = s0.clone();
    (s1.alpha0, s1.alpha1) = (0.3, 0.5);
    (s2.alpha0, s2.alpha1) = (-0.2, 1.4);
    assert_ratio(
        lj(&data, &s1),
        lj(&data, &s2),
        quad(0.3, 0.5),
        quad(-0.2, 1.4),
    );

    let (m0, v0) = st.alpha0_given(s0.alpha1, s0.v);
    s1 = s0.clone();
    s2 = s0.clone();
    s1.alpha0 = 0.4;
    s2.alpha0 = -0.6;
    assert_ratio(
        lj(&data, &s1),
        lj(&data, &s2),
        ln_normal_pdf(0.4, m0, v0),
        ln_normal_pdf(-0.6, m0, v0),
    );

    let (m1, v1) = st.alpha1_given(s0.alpha0, s0.v);
    s1 = s0.clone();
    s2 = s0.clone();
    s1.alpha1 = 0.1;
    s2.alpha1 = 1.3;
    assert_ratio(
        lj(&data, &s1),
        lj(&data, &s2),
        ln_normal_pdf(0.1, m1, v1),
        ln_normal_pdf(1.3, m1, v1),
    );
}

#[test]
fn slab_variance_block_matches_joint() {
    let data = toy_data();
    let s0 = toy_state();
    let prior = toy_prior();
    let ss = 1.1f64.powi(2) + 0.3f64.powi(2);
    let (shape, scale) =
        conditionals::slab_variance(prior.v_shape, prior.v_scale, 2, ss, s0.alpha0, s0.alpha1);
    let mut s1 = s0.clone();
    let mut s2 = s0.clone();
    s1.v = 0.7;
    s2.v = 40.0;
    assert_ratio(
        lj(&data, &s1),
        lj(&data, &s2),
        ln_inv_gamma_pdf(0.7, shape, scale),
        ln_inv_gamma_pdf(40.0, shape, scale),
    );
}

#[test]
fn null_probability_block_matches_joint() {
    let data = toy_data();
    let s0 = toy_state();
    let prior = toy_prior();
    let (a, b) = conditionals::null_probability(prior.p_shape1, prior.p_shape2, 4, 2);
    let mut s1 = s0.clone();
    let mut s2 = s0.clone();
    s1.p = 0.35;
    s2.p = 0.93;
    assert_ratio(
        lj(&data, &s1),
        lj(&data, &s2),
        ln_beta_pdf(0.35, a, b),
        ln_beta_pdf(0.93, a, b),
    );
}

#[test]
fn null_probability_example() {
    assert_eq!(conditionals::null_probability(9.0, 1.0, 10, 3), (16.0, 4.0));
}

#[test]
fn dof_block_matches_joint() {
    let data = toy_data();
    let s0 = toy_state();
    let sum_ln: f64 = s0.y.omega.iter().map(|w| w.ln()).sum();
    let sum: f64 = s0.y.omega.iter().sum();
    let n = s0.y.omega.len();
    let mut s1 = s0.clone();
    let mut s2 = s0.clone();
    s1.y.dof = 2;
    s2.y.dof = 61;
    assert_ratio(
        lj(&data, &s1),
        lj(&data, &s2),
        conditionals::dof_log_weight(2, n, sum_ln, sum),
        conditionals::dof_log_weight(61, n, sum_ln, sum),
    );
}

#[test]
fn hyper_target_matches_joint() {
    // The random walk runs on (ln a, ln b); its target is the joint density
    // expressed in (a, b) coordinates times a*b.
    let data = toy_data();
    let s0 = toy_state();
    let target = |s: &ModelState| {
        lj(&data, s) + reparam_jacobian_det(s.x.a, s.x.b).ln() + s.x.a.ln() + s.x.b.ln()
    };
    let mut s1 = s0.clone();
    let mut s2 = s0.clone();
    (s1.x.a, s1.x.b) = (0.06, 0.02);
    (s2.x.a, s2.x.b) = (0.15, 0.11);
    assert_ratio(
        target(&s1),
        target(&s2),
        conditionals::hyper_log_target(s0.x.sigma2.iter().copied(), 0.06, 0.02),
        conditionals::hyper_log_target(s0.x.sigma2.iter().copied(), 0.15, 0.11),
    );
}

/// Adaptive Simpson integration of `f` on `[a, b]`.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= (15.0 * tol).max(1e-10 * (left + right).abs()) {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[test]
fn gamma_probability_matches_quadrature() {
    let data = toy_data();
    for (i, v) in [(0, 2.5), (1, 2.5), (1, 0.3), (2, 8.0)] {
        let mut base = toy_state();
        base.v = v;
        base.gamma[i] = false;
        base.beta[i] = 0.0;
        let l0 = lj(&data, &base);
        let slab = |b: f64| {
            let mut s = base.clone();
            s.gamma[i] = true;
            s.beta[i] = b;
            (lj(&data, &s) - l0).exp()
        };
        let panels = 400;
        let (lo, hi) = (-20.0, 20.0);
        let h = (hi - lo) / panels as f64;
        let integral: f64 = (0..panels)
            .map(|k| adaptive_simpson(&slab, lo + k as f64 * h, lo + (k + 1) as f64 * h, 1e-13))
            .sum();
        let oracle = integral / (1.0 + integral);

        let resid: Vec<f64> = data
            .y_row(i)
            .iter()
            .map(|y| y - base.alpha0 - base.alpha1 * base.mu[i])
            .collect();
        let stats = SlabStats::new(&resid, base.y.omega_row(i, 2), base.y.sigma2[i]);
        let got = stats.prob_active(base.p, v);
        assert!((got - oracle).abs() < 1e-8, "unit {i}: {got} vs {oracle}");
    }
}

#[test]
fn very_wide_slab_favours_the_spike() {
    let stats = SlabStats::new(&[0.6, 0.4], &[1.0, 1.0], 0.1);
    assert!(stats.ln_odds_active(0.8, 1e8) < stats.ln_odds_active(0.8, 1e2));
}

#[test]
fn certain_null_forces_the_spike() {
    let data = toy_data();
    let mut state = toy_state();
    state.p = 1.0;
    let mut rng = rng_for(3, Block::GammaBeta, 0);
    for i in 0..4 {
        for _ in 0..200 {
            assert_eq!(update_gamma_beta(i, &state, &data, &mut rng), (false, 0.0));
        }
    }
}

#[test]
fn inactive_draws_have_zero_beta() {
    let data = toy_data();
    let state = toy_state();
    let mut rng = rng_for(4, Block::GammaBeta, 0);
    let mut saw_both = [false; 2];
    for _ in 0..2000 {
        let (g, b) = update_gamma_beta(3, &state, &data, &mut rng);
        saw_both[g as usize] = true;
        if !g {
            assert_eq!(b, 0.0);
        }
    }
    assert!(saw_both[0] && saw_both[1]);
}

fn short_config() -> SamplerConfig {
    SamplerConfig {
        trace_units: vec![0, 1],
        snapshot_every: Some(1),
        ..SamplerConfig::default().with_iterations(300, 100)
    }
}

#[test]
fn burn_in_must_be_shorter_than_the_run() {
    let cfg = SamplerConfig::default().with_iterations(100, 100);
    let err = run_chain(&toy_data(), &toy_prior(), &cfg, 0).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
}

#[test]
fn same_seed_gives_identical_draws() {
    let data = toy_data();
    let a = run_chain(&data, &toy_prior(), &short_config(), 0).unwrap();
    let b = run_chain(&data, &toy_prior(), &short_config(), 0).unwrap();
    assert_eq!(a, b);
    let c = run_chain(&data, &toy_prior(), &short_config(), 1).unwrap();
    assert_ne!(a.traces.alpha0, c.traces.alpha0);
}

#[test]
fn parallel_and_sequential_sweeps_agree() {
    let data = toy_data();
    let seq = run_chain(&data, &toy_prior(), &short_config(), 0).unwrap();
    let cfg = SamplerConfig {
        parallel_units: true,
        ..short_config()
    };
    let par = run_chain(&data, &toy_prior(), &cfg, 0).unwrap();
    assert_eq!(seq, par);
}

#[test]
fn permuting_units_permutes_the_summaries() {
    let data = toy_data();
    let perm = [2usize, 0, 3, 1];
    let shuffled = data.select(&perm);
    let cfg = SamplerConfig {
        trace_units: vec![],
        ..short_config()
    };
    let a = run_chain(&data, &toy_prior(), &cfg, 0).unwrap();
    let b = run_chain(&shuffled, &toy_prior(), &cfg, 0).unwrap();
    assert_eq!(a.traces, b.traces);
    for (new, &old) in perm.iter().enumerate() {
        assert_eq!(a.units.null_count[old], b.units.null_count[new]);
        assert_eq!(a.units.active_beta_sum[old], b.units.active_beta_sum[new]);
        assert_eq!(a.units.mu_sum[old], b.units.mu_sum[new]);
    }
}

#[test]
fn mu_stays_inside_its_prior_support() {
    let data = toy_data();
    for mu in [
        MuPrior::Uniform { lo: -1.0, hi: 0.25 },
        PriorConfig::empirical_mu(),
    ] {
        let prior = PriorConfig { mu, ..toy_prior() };
        let draws = run_chain(&data, &prior, &short_config(), 0).unwrap();
        assert!(!draws.snapshots.is_empty());
        for s in &draws.snapshots {
            assert!(s.mu.iter().all(|&m| mu.contains(m)));
        }
    }
}

#[test]
fn hyper_metropolis_accepts_and_rejects() {
    let data = toy_data();
    let cfg = SamplerConfig::default().with_iterations(1000, 500);
    let draws = run_chain(&data, &toy_prior(), &cfg, 0).unwrap();
    for rate in [draws.acceptance.hyper_x, draws.acceptance.hyper_y] {
        let r = rate.rate().unwrap();
        assert!(r > 0.0 && r < 1.0, "acceptance {r}");
        assert_eq!(rate.proposed, 1000);
    }
}

#[test]
fn summaries_are_well_formed() {
    let data = toy_data();
    let draws = run_chain(&data, &toy_prior(), &short_config(), 0).unwrap();
    assert_eq!(draws.retained, 200);
    assert_eq!(draws.traces.len(), 200);
    for i in 0..4 {
        let p = draws.null_probability(i);
        assert!((0.0..=1.0).contains(&p));
        assert_eq!(draws.active_beta_mean(i).is_none(), p == 1.0);
    }
    assert_eq!(draws.traces.column("beta[1]").unwrap().len(), 200);
}

#[test]
fn thinning_keeps_every_kth_draw() {
    let cfg = SamplerConfig {
        thinning: 7,
        ..short_config()
    };
    let draws = run_chain(&toy_data(), &toy_prior(), &cfg, 0).unwrap();
    assert_eq!(draws.retained, cfg.retained_draws());
    assert_eq!(draws.retained, 29);
}

#[test]
fn gaussian_method_fixes_the_error_model() {
    let data = toy_data();
    let cfg = short_config();
    let a = gaussian_method_chain(&data, &toy_prior(), &cfg, 1.5).unwrap();
    let b = gaussian_method_chain(&data, &toy_prior(), &cfg, 1.5).unwrap();
    assert_eq!(a, b);
    let sx = data.replicate_variance(false).unwrap();
    let sy = data.replicate_variance(true).unwrap();
    let s = &a.final_state;
    assert!(s.x.sigma2.iter().all(|&v| v == sx));
    assert!(s.y.sigma2.iter().all(|&v| v == sy));
    assert!(s.x.omega.iter().chain(&s.y.omega).all(|&w| w == 1.0));
    assert!(a.traces.v.iter().all(|&v| v == 1.5));
}

#[test]
fn gaussian_method_plug_in_variance() {
    let data = ScreenData::from_rows(
        &[vec![0.0, 1.0], vec![2.0, 2.0], vec![-1.0, 1.0]],
        &[vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]],
    )
    .unwrap();
    // (1/2 + 0 + 4/2) / 3
    assert!((data.replicate_variance(false).unwrap() - 2.5 / 3.0).abs() < 1e-15);
}

#[test]
fn gaussian_method_needs_replicates() {
    let data = ScreenData::from_rows(&[vec![0.1], vec![0.2]], &[vec![0.0], vec![0.3]]).unwrap();
    let err = gaussian_method_chain(&data, &toy_prior(), &short_config(), 1.0).unwrap_err();
    assert!(matches!(err, Error::Estimation(_)));
}

#[test]
fn single_replicate_data_still_runs_the_full_model() {
    let data = ScreenData::from_rows(&[vec![0.1], vec![-0.2]], &[vec![0.0], vec![0.3]]).unwrap();
    run_chain(&data, &toy_prior(), &short_config(), 0).unwrap();
}

#[test]
fn trace_unit_out_of_range_is_rejected() {
    let cfg = SamplerConfig {
        trace_units: vec![9],
        ..short_config()
    };
    assert!(run_chain(&toy_data(), &toy_prior(), &cfg, 0).is_err());
}

#[test]
fn duplicate_unit_names_are_rejected() {
    let units = vec![Unit::synthetic(0), Unit::synthetic(0)];
    assert!(ScreenData::new(units, 1, vec![0.0, 0.0], vec![0.0, 0.0]).is_err());
}
