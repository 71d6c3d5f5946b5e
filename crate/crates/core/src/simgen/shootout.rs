use std::fmt::{self, Write as _};
use std::time::{Duration, Instant};

use super::evaluate::{fdr_calibration, fdr_grid, mean_fdr_deviation, roc, FdrPoint, Roc};
use super::scenario::{generate, Scenario, Truth};
use crate::error::{Error, Result};
use crate::inference::{summarize, zscore_baseline, SdConvention};
use crate::model::{PriorConfig, ScreenData};
use crate::sampler::{gaussian_method_chain, run_chain, PosteriorDraws, SamplerConfig};
use crate::stats::mean;

/// Analyses compared on simulated screens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Full model: t errors and unit-specific variances.
    T,
    /// Normal errors, one plug-in variance per channel and a fixed slab
    /// variance taken from the posterior mean of the full model.
    Gaussian,
    /// Robust activity Z-scores ranked by magnitude.
    ZScore,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::T, Method::Gaussian, Method::ZScore];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::T => "t",
            Method::Gaussian => "gaussian",
            Method::ZScore => "zscore",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "t" => Some(Method::T),
            "gaussian" => Some(Method::Gaussian),
            "zscore" | "z" => Some(Method::ZScore),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootoutConfig {
    pub prior: PriorConfig,
    pub sampler: SamplerConfig,
    pub methods: Vec<Method>,
    pub fdr_grid: Vec<f64>,
}

impl Default for ShootoutConfig {
    fn default() -> Self {
        Self {
            prior: PriorConfig::simulation_default(),
            sampler: SamplerConfig::default().with_iterations(5000, 2500),
            methods: Method::ALL.to_vec(),
            fdr_grid: fdr_grid(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    /// Higher means more likely active: `1 - p_i`, or `|Z_i|`.
    pub scores: Vec<f64>,
    pub roc: Roc,
    /// Absent for the Z-score, whose scores are not probabilities.
    pub fdr: Option<Vec<FdrPoint>>,
    pub runtime: Duration,
    /// Posterior mean of the slab variance (full model) or the fixed value
    /// used (Gaussian method).
    pub slab_variance: Option<f64>,
}

impl MethodResult {
    pub fn auc(&self) -> f64 {
        self.roc.auc
    }

    pub fn fdr_deviation(&self) -> Option<f64> {
        self.fdr.as_deref().map(mean_fdr_deviation)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootoutReport {
    pub scenario: Scenario,
    pub truth: Truth,
    pub results: Vec<MethodResult>,
}

impl ShootoutReport {
    pub fn result(&self, method: Method) -> Option<&MethodResult> {
        self.results.iter().find(|r| r.method == method)
    }

    /// Structured `key=value` summary, one line per method. Runtimes are left
    /// out so that reruns produce identical text.
    pub fn to_text(&self) -> String {
        let s = &self.scenario;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "units={} active={} replicates={} seed={}",
            s.units, s.active, s.replicates, s.seed
        );
        let _ = writeln!(out, "empty_selection_fdr=0");
        for r in &self.results {
            let dev = r
                .fdr_deviation()
                .map_or_else(|| "na".to_string(), |d| format!("{d:.6}"));
            let v = r
                .slab_variance
                .map_or_else(|| "na".to_string(), |v| format!("{v:.6}"));
            let _ = writeln!(
                out,
                "method={} auc={:.6} mean_fdr_deviation={dev} slab_variance={v}",
                r.method, r.roc.auc
            );
        }
        out
    }
}

fn bayes_result(
    method: Method,
    draws: &PosteriorDraws,
    truth: &[bool],
    grid: &[f64],
    runtime: Duration,
    slab_variance: f64,
) -> Result<MethodResult> {
    let scores: Vec<f64> = summarize(draws)?
        .iter()
        .map(|u| u.activity_prob())
        .collect();
    Ok(MethodResult {
        method,
        roc: roc(truth, &scores)?,
        fdr: Some(fdr_calibration(truth, &scores, grid)?),
        scores,
        runtime,
        slab_variance: Some(slab_variance),
    })
}

fn run_t(
    data: &ScreenData,
    truth: &[bool],
    config: &ShootoutConfig,
) -> Result<(MethodResult, f64)> {
    let start = Instant::now();
    let draws = run_chain(data, &config.prior, &config.sampler, 0)?;
    let v = mean(&draws.traces.v);
    let r = bayes_result(
        Method::T,
        &draws,
        truth,
        &config.fdr_grid,
        start.elapsed(),
        v,
    )?;
    Ok((r, v))
}

fn run_zscore(data: &ScreenData, truth: &[bool]) -> Result<MethodResult> {
    let start = Instant::now();
    let scores: Vec<f64> = zscore_baseline(data, SdConvention::default())?
        .iter()
        .map(|z| z.mean.abs())
        .collect();
    Ok(MethodResult {
        method: Method::ZScore,
        roc: roc(truth, &scores)?,
        fdr: None,
        scores,
        runtime: start.elapsed(),
        slab_variance: None,
    })
}

/// Run the requested methods on one dataset. The full model runs whenever
/// the Gaussian method is requested, since it supplies the slab variance.
pub fn run_methods(
    data: &ScreenData,
    truth: &Truth,
    config: &ShootoutConfig,
) -> Result<Vec<MethodResult>> {
    if config.methods.is_empty() {
        return Err(Error::Config("no methods requested".into()));
    }
    let wants = |m: Method| config.methods.contains(&m);
    let labels = &truth.gamma;
    let need_t = wants(Method::T) || wants(Method::Gaussian);
    let (t, z) = rayon::join(
        || need_t.then(|| run_t(data, labels, config)).transpose(),
        || {
            wants(Method::ZScore)
                .then(|| run_zscore(data, labels))
                .transpose()
        },
    );
    let t = t?;
    let z = z?;
    let gaussian = match (&t, wants(Method::Gaussian)) {
        (Some((_, v)), true) => {
            let start = Instant::now();
            let draws = gaussian_method_chain(data, &config.prior, &config.sampler, *v)?;
            Some(bayes_result(
                Method::Gaussian,
                &draws,
                labels,
                &config.fdr_grid,
                start.elapsed(),
                *v,
            )?)
        }
        _ => None,
    };
    let mut results = Vec::new();
    for m in &config.methods {
        let r = match m {
            Method::T => t.as_ref().map(|(r, _)| r.clone()),
            Method::Gaussian => gaussian.clone(),
            Method::ZScore => z.clone(),
        };
        if let Some(r) = r {
            if !results.iter().any(|x: &MethodResult| x.method == r.method) {
                results.push(r);
            }
        }
    }
    Ok(results)
}

/// Generate one screen from the scenario and score every requested method
/// on it.
pub fn method_shootout(scenario: &Scenario, config: &ShootoutConfig) -> Result<ShootoutReport> {
    let (data, truth) = generate(scenario)?;
    let results = run_methods(&data, &truth, config)?;
    Ok(ShootoutReport {
        scenario: scenario.clone(),
        truth,
        results,
    })
}
