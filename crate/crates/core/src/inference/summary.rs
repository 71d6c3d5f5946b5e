use crate::error::{Error, Result};
use crate::sampler::{DrawSnapshot, PosteriorDraws};

/// Posterior summary of one unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSummary {
    /// `P(gamma_i = 0 | data)`.
    pub null_prob: f64,
    /// `E(beta_i | gamma_i = 1, data)`; `None` when no draw was active.
    pub active_beta: Option<f64>,
    /// `E(mu_i | data)`.
    pub mu_mean: f64,
}

impl UnitSummary {
    /// Posterior probability of an activity change, `1 - p_i`.
    pub fn activity_prob(&self) -> f64 {
        1.0 - self.null_prob
    }
}

fn finish(retained: u64, null: &[u64], beta_sum: &[f64], mu_sum: &[f64]) -> Vec<UnitSummary> {
    (0..null.len())
        .map(|i| {
            let active = retained - null[i];
            UnitSummary {
                null_prob: null[i] as f64 / retained as f64,
                active_beta: (active > 0).then(|| beta_sum[i] / active as f64),
                mu_mean: mu_sum[i] / retained as f64,
            }
        })
        .collect()
}

/// Summaries from the streaming accumulators of one chain.
pub fn summarize(draws: &PosteriorDraws) -> Result<Vec<UnitSummary>> {
    summarize_chains(std::slice::from_ref(draws))
}

/// Summaries pooled over several chains of the same data set.
pub fn summarize_chains(chains: &[PosteriorDraws]) -> Result<Vec<UnitSummary>> {
    let first = chains
        .first()
        .ok_or_else(|| Error::Config("no chains to summarize".into()))?;
    let n = first.n_units();
    if chains.iter().any(|c| c.n_units() != n) {
        return Err(Error::Shape("chains cover different unit counts".into()));
    }
    let retained: usize = chains.iter().map(|c| c.retained).sum();
    if retained == 0 {
        return Err(Error::Config("no retained draws".into()));
    }
    let mut null = vec![0u64; n];
    let mut beta_sum = vec![0.0; n];
    let mut mu_sum = vec![0.0; n];
    for c in chains {
        for i in 0..n {
            null[i] += c.units.null_count[i];
            beta_sum[i] += c.units.active_beta_sum[i];
            mu_sum[i] += c.units.mu_sum[i];
        }
    }
    Ok(finish(retained as u64, &null, &beta_sum, &mu_sum))
}

/// Summaries recomputed from stored draws.
pub fn summarize_snapshots(draws: &[DrawSnapshot]) -> Result<Vec<UnitSummary>> {
    let first = draws
        .first()
        .ok_or_else(|| Error::Config("no retained draws".into()))?;
    let n = first.mu.len();
    if draws
        .iter()
        .any(|d| d.mu.len() != n || d.gamma.len() != n || d.beta.len() != n)
    {
        return Err(Error::Shape("draws cover different unit counts".into()));
    }
    let mut null = vec![0u64; n];
    let mut beta_sum = vec![0.0; n];
    let mut mu_sum = vec![0.0; n];
    for d in draws {
        for i in 0..n {
            if d.gamma[i] {
                beta_sum[i] += d.beta[i];
            } else {
                null[i] += 1;
            }
            mu_sum[i] += d.mu[i];
        }
    }
    Ok(finish(draws.len() as u64, &null, &beta_sum, &mu_sum))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(gamma: bool, beta: f64, mu: f64) -> DrawSnapshot {
        DrawSnapshot {
            gamma: vec![gamma],
            beta: vec![beta],
            mu: vec![mu],
            sigma2_x: vec![1.0],
            sigma2_y: vec![1.0],
            alpha0: 0.0,
            alpha1: 1.0,
            dof_x: 5,
            dof_y: 5,
        }
    }

    #[test]
    fn direct_averages() {
        let draws = [
            snap(true, 2.0, 0.0),
            snap(true, 4.0, 1.0),
            snap(false, 0.0, 2.0),
            snap(false, 0.0, 3.0),
        ];
        let s = summarize_snapshots(&draws).unwrap();
        assert_eq!(s[0].null_prob, 0.5);
        assert_eq!(s[0].active_beta, Some(3.0));
        assert_eq!(s[0].mu_mean, 1.5);
    }

    #[test]
    fn never_active_is_flagged() {
        let draws = [snap(false, 0.0, 0.0), snap(false, 0.0, 0.0)];
        let s = summarize_snapshots(&draws).unwrap();
        assert_eq!(s[0].null_prob, 1.0);
        assert_eq!(s[0].active_beta, None);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(summarize_snapshots(&[]).is_err());
        assert!(summarize_chains(&[]).is_err());
    }
}
