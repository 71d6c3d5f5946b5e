use rayon::prelude::*;

use super::config::{FixedParams, SamplerConfig};
use super::draws::{DrawSnapshot, PosteriorDraws, Traces, UnitAccumulators};
use super::init::initial_state;
use super::sweep::Sweeper;
use crate::error::{Error, Result};
use crate::model::{PriorConfig, ScreenData};

/// Run one chain. Output is a pure function of
/// `(data, prior, config, chain)`.
pub fn run_chain(
    data: &ScreenData,
    prior: &PriorConfig,
    config: &SamplerConfig,
    chain: u64,
) -> Result<PosteriorDraws> {
    prior.validate()?;
    config.validate()?;
    if let Some(&u) = config.trace_units.iter().find(|&&u| u >= data.n_units()) {
        return Err(Error::Config(format!("traced unit {u} out of range")));
    }
    let mut state = initial_state(data, prior, config, chain)?;
    let mut sweeper = Sweeper::new(data, prior, config, chain);
    let mut traces = Traces::new(&config.trace_units);
    let mut units = UnitAccumulators::new(data.n_units());
    let mut snapshots = Vec::new();
    let mut retained = 0usize;

    for t in 0..config.total_iterations {
        sweeper.sweep(&mut state, t as u64);
        if t < config.burn_in || !(t - config.burn_in).is_multiple_of(config.thinning) {
            continue;
        }
        traces.push(&state);
        units.push(&state);
        if let Some(k) = config.snapshot_every {
            if retained.is_multiple_of(k) {
                snapshots.push(DrawSnapshot::from(&state));
            }
        }
        retained += 1;
    }

    Ok(PosteriorDraws {
        chain,
        retained,
        traces,
        units,
        acceptance: sweeper.acceptance.clone(),
        snapshots,
        final_state: state,
        proposal_scales: (sweeper.scales[0], sweeper.scales[1]),
    })
}

/// Run `config.chain_count` chains concurrently; chain `k` uses stream `k`.
pub fn run_chains(
    data: &ScreenData,
    prior: &PriorConfig,
    config: &SamplerConfig,
) -> Result<Vec<PosteriorDraws>> {
    config.validate()?;
    (0..config.chain_count as u64)
        .into_par_iter()
        .map(|c| run_chain(data, prior, config, c))
        .collect()
}

/// Comparator with Gaussian errors: every mixing weight fixed at 1, one
/// shared variance per channel set to the replicate plug-in estimate, and a
/// constant slab variance. Only `gamma`, `beta`, `mu`, `alpha` and `p` move.
pub fn gaussian_method_chain(
    data: &ScreenData,
    prior: &PriorConfig,
    config: &SamplerConfig,
    slab_variance: f64,
) -> Result<PosteriorDraws> {
    let sx = data.replicate_variance(false)?;
    let sy = data.replicate_variance(true)?;
    if !(sx > 0.0 && sy > 0.0) {
        return Err(Error::Estimation(
            "replicate variance estimate is zero".into(),
        ));
    }
    let mut cfg = config.clone();
    cfg.fixed = FixedParams {
        unit_omega: true,
        shared_sigma2: Some((sx, sy)),
        slab_variance: Some(slab_variance),
    };
    run_chain(data, prior, &cfg, 0)
}
