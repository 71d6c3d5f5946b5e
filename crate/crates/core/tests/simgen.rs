use htsbayes::model::MuPrior;
use htsbayes::sampler::SamplerConfig;
use htsbayes::simgen::{
    fdr_calibration, fdr_grid, generate, method_shootout, roc, ErrorRegime, Method, Preset,
    Scenario, ShootoutConfig,
};
use htsbayes::stats::{mean, variance};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

#[test]
fn gaussian_null_residual_variance_matches_the_scenario() {
    let s = Scenario::preset(Preset::S2)
        .with_size(20_000, 0)
        .with_seed(3);
    let (data, truth) = generate(&s).unwrap();
    let mut resid = Vec::new();
    for i in 0..data.n_units() {
        for y in data.y_row(i) {
            resid.push(y - s.alpha0 - s.alpha1 * truth.mu[i]);
        }
    }
    let v = variance(&resid, 1);
    assert!((v - 0.5).abs() < 0.025, "residual variance {v}");
    let mut xres = Vec::new();
    for i in 0..data.n_units() {
        xres.extend(data.x_row(i).iter().map(|x| x - truth.mu[i]));
    }
    let vx = variance(&xres, 1);
    assert!((vx - 0.1).abs() < 0.005, "viability variance {vx}");
}

#[test]
fn same_seed_same_screen() {
    let s = Scenario::desk(Preset::S1).with_seed(7);
    assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
    let other = generate(&s.clone().with_seed(8)).unwrap();
    assert_ne!(generate(&s).unwrap().0, other.0);
}

#[test]
fn viability_draws_follow_the_scaled_beta_law() {
    let s = Scenario::preset(Preset::S1)
        .with_size(10_000, 100)
        .with_seed(11);
    let (_, truth) = generate(&s).unwrap();
    let (lo, hi) = (-2.77, 0.248);
    assert!(truth.mu.iter().all(|m| *m > lo && *m < hi));
    let w: f64 = hi - lo;
    let law_mean = lo + w * 6.0 / 8.0;
    let law_sd = w * (6.0f64 * 2.0 / (64.0 * 9.0)).sqrt();
    let se = law_sd / (truth.mu.len() as f64).sqrt();
    assert!((mean(&truth.mu) - law_mean).abs() < 3.0 * se);
}

#[test]
fn active_units_are_exactly_the_requested_share() {
    let s = Scenario::desk(Preset::S3).with_seed(2);
    let (data, truth) = generate(&s).unwrap();
    assert_eq!(data.n_replicates(), 10);
    assert_eq!(truth.gamma.iter().filter(|g| **g).count(), 50);
    for (g, b) in truth.gamma.iter().zip(&truth.beta) {
        if *g {
            assert!(*b > -5.0 && *b < 3.0);
        } else {
            assert_eq!(*b, 0.0);
        }
    }
}

#[test]
fn t_regime_variances_have_the_stated_means() {
    let s = Scenario::preset(Preset::S1)
        .with_size(20_000, 0)
        .with_seed(5);
    let (_, truth) = generate(&s).unwrap();
    // IG(3, 0.2) and IG(3, 1) have means 0.1 and 0.5 and variances 0.01 and 0.25.
    let se_x = (0.01f64 / 20_000.0).sqrt();
    let se_y = (0.25f64 / 20_000.0).sqrt();
    assert!((mean(&truth.sigma2_x) - 0.1).abs() < 4.0 * se_x);
    assert!((mean(&truth.sigma2_y) - 0.5).abs() < 4.0 * se_y);
    assert!(matches!(s.errors, ErrorRegime::T { .. }));
}

#[test]
fn invalid_scenarios_are_rejected() {
    let s = Scenario::desk(Preset::S1).with_size(10, 11);
    assert!(generate(&s).is_err());
    let mut s = Scenario::desk(Preset::S1);
    s.mu = MuPrior::Uniform { lo: 1.0, hi: 1.0 };
    assert!(generate(&s).is_err());
    let mut s = Scenario::desk(Preset::S2);
    s.errors = ErrorRegime::Gaussian {
        sigma2_x: 0.0,
        sigma2_y: 1.0,
    };
    assert!(generate(&s).is_err());
}

#[test]
fn random_scores_give_chance_auc() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(99);
    let truth: Vec<bool> = (0..1000).map(|i| i < 500).collect();
    let scores: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
    let auc = roc(&truth, &scores).unwrap().auc;
    assert!(auc > 0.45 && auc < 0.55, "auc {auc}");
}

#[test]
fn null_only_screen_selections_are_all_false() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(4);
    let truth = vec![false; 500];
    let scores: Vec<f64> = (0..500).map(|_| rng.random::<f64>()).collect();
    let curve = fdr_calibration(&truth, &scores, &fdr_grid()).unwrap();
    assert!(curve.iter().any(|p| p.selected > 0));
    for p in curve {
        if p.selected > 0 {
            assert_eq!(p.actual, 1.0);
        } else {
            assert_eq!(p.actual, 0.0);
        }
    }
}

#[test]
fn shootout_scores_every_method() {
    let s = Scenario::desk(Preset::S1).with_size(150, 15).with_seed(1);
    let config = ShootoutConfig {
        sampler: SamplerConfig::default().with_iterations(400, 200),
        ..ShootoutConfig::default()
    };
    let report = method_shootout(&s, &config).unwrap();
    assert_eq!(report.results.len(), 3);
    for m in Method::ALL {
        let r = report.result(m).unwrap();
        assert_eq!(r.scores.len(), 150);
        assert!((0.0..=1.0).contains(&r.auc()));
        assert_eq!(r.fdr.is_some(), m != Method::ZScore);
    }
    let t = report.result(Method::T).unwrap();
    let g = report.result(Method::Gaussian).unwrap();
    assert_eq!(t.slab_variance, g.slab_variance);
    assert!(t.scores.iter().all(|s| (0.0..=1.0).contains(s)));
    let text = report.to_text();
    assert!(text.contains("method=t ") && text.contains("method=zscore "));
}

#[test]
fn shootout_runs_the_full_model_for_the_gaussian_arm() {
    let s = Scenario::desk(Preset::S2).with_size(120, 12).with_seed(2);
    let config = ShootoutConfig {
        sampler: SamplerConfig::default().with_iterations(300, 150),
        methods: vec![Method::Gaussian],
        ..ShootoutConfig::default()
    };
    let report = method_shootout(&s, &config).unwrap();
    assert_eq!(report.results.len(), 1);
    assert_eq!(report.results[0].method, Method::Gaussian);
    assert!(report.results[0].slab_variance.unwrap() > 0.0);
}

proptest! {
    #[test]
    fn auc_of_negated_scores_is_the_complement(
        cells in prop::collection::vec((any::<bool>(), 0u8..20), 2..200)
    ) {
        prop_assume!(cells.iter().any(|c| c.0) && cells.iter().any(|c| !c.0));
        let truth: Vec<bool> = cells.iter().map(|c| c.0).collect();
        let scores: Vec<f64> = cells.iter().map(|c| c.1 as f64).collect();
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let a = roc(&truth, &scores).unwrap().auc;
        let b = roc(&truth, &neg).unwrap().auc;
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fdr_curve_points_lie_in_the_unit_interval(
        cells in prop::collection::vec((any::<bool>(), 0.0f64..=1.0), 1..200)
    ) {
        let truth: Vec<bool> = cells.iter().map(|c| c.0).collect();
        let scores: Vec<f64> = cells.iter().map(|c| c.1).collect();
        for p in fdr_calibration(&truth, &scores, &fdr_grid()).unwrap() {
            prop_assert!((0.0..=1.0).contains(&p.actual));
        }
    }

    #[test]
    fn oracle_scores_are_exactly_calibrated(
        truth in prop::collection::vec(any::<bool>(), 1..200)
    ) {
        // With null probabilities in {0, 1} the posterior rate of a list is
        // its realised false discovery rate, and a maximal list only admits
        // a null unit once one null among the positives stays below the rate.
        let scores: Vec<f64> = truth.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
        let positives = truth.iter().filter(|t| **t).count();
        for p in fdr_calibration(&truth, &scores, &fdr_grid()).unwrap() {
            prop_assert!(p.actual < p.desired || p.selected == 0);
            if p.desired * (positives + 1) as f64 <= 1.0 {
                prop_assert_eq!(p.actual, 0.0);
            }
        }
    }
}
