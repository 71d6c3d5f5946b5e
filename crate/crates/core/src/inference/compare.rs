use super::summary::UnitSummary;
use crate::error::{Error, Result};
use crate::stats::pearson;

/// Agreement between two fits of the same units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunCorrelation {
    /// Pearson correlation of `1 - p_i`.
    pub activity: f64,
    /// Pearson correlation of `E(beta_i | gamma_i = 1)` over units where
    /// both runs define it.
    pub effect: f64,
    pub effect_units: usize,
}

pub fn compare_runs(a: &[UnitSummary], b: &[UnitSummary]) -> Result<RunCorrelation> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "runs cover {} and {} units",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 3 {
        return Err(Error::Degenerate("fewer than 3 common units".into()));
    }
    let pa: Vec<f64> = a.iter().map(UnitSummary::activity_prob).collect();
    let pb: Vec<f64> = b.iter().map(UnitSummary::activity_prob).collect();
    let activity = pearson(&pa, &pb)
        .ok_or_else(|| Error::Degenerate("activity probabilities are constant".into()))?;
    let (ea, eb): (Vec<f64>, Vec<f64>) = a
        .iter()
        .zip(b)
        .filter_map(|(u, v)| Some((u.active_beta?, v.active_beta?)))
        .unzip();
    if ea.len() < 3 {
        return Err(Error::Degenerate(
            "fewer than 3 units have an effect estimate in both runs".into(),
        ));
    }
    let effect = pearson(&ea, &eb)
        .ok_or_else(|| Error::Degenerate("effect estimates are constant".into()))?;
    Ok(RunCorrelation {
        activity,
        effect,
        effect_units: ea.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(shift: f64, scale: f64) -> Vec<UnitSummary> {
        [(0.1, 1.0), (0.5, -0.5), (0.9, 0.2), (0.3, 2.0)]
            .iter()
            .map(|&(p, b)| UnitSummary {
                null_prob: p,
                active_beta: Some(shift + scale * b),
                mu_mean: 0.0,
            })
            .collect()
    }

    #[test]
    fn identical_runs_correlate_perfectly() {
        let r = compare_runs(&run(0.0, 1.0), &run(0.0, 1.0)).unwrap();
        assert!((r.activity - 1.0).abs() < 1e-12);
        assert!((r.effect - 1.0).abs() < 1e-12);
        assert_eq!(r.effect_units, 4);
    }

    #[test]
    fn affine_invariance() {
        let r = compare_runs(&run(0.0, 1.0), &run(3.0, 2.5)).unwrap();
        assert!((r.effect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_defined_effects() {
        let mut b = run(0.0, 1.0);
        b[0].active_beta = None;
        b[1].active_beta = None;
        assert!(compare_runs(&run(0.0, 1.0), &b).is_err());
    }
}
