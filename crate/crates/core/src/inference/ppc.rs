use crate::error::{Error, Result};
use crate::model::ScreenData;
use crate::rng::{self, rng_for, Block};
use crate::sampler::DrawSnapshot;
use crate::stats::{sample_gamma, sample_normal};

/// Realized and replicated discrepancy for one posterior draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictivePair {
    pub realized: f64,
    pub predictive: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PpcResult {
    pub pairs: Vec<PredictivePair>,
    /// Fraction of pairs with `predictive >= realized`.
    pub p_value: f64,
    /// Draws left out because a degrees-of-freedom value was at most 2.
    pub skipped: usize,
}

/// Chi-square type discrepancy of activity readings around the regression
/// on observed viability, scaled by the implied t variances. `None` when
/// either degrees of freedom is at most 2 (infinite variance).
pub fn discrepancy(x: &[f64], y: &[f64], replicates: usize, draw: &DrawSnapshot) -> Option<f64> {
    if draw.dof_x <= 2 || draw.dof_y <= 2 {
        return None;
    }
    let dx = draw.dof_x as f64;
    let dy = draw.dof_y as f64;
    let infl_x = dx / (dx - 2.0);
    let infl_y = dy / (dy - 2.0);
    let a1 = draw.alpha1;
    let mut t = 0.0;
    for i in 0..draw.mu.len() {
        let denom = a1 * a1 * draw.sigma2_x[i] * infl_x + draw.sigma2_y[i] * infl_y;
        let effect = if draw.gamma[i] { draw.beta[i] } else { 0.0 };
        for j in 0..replicates {
            let k = i * replicates + j;
            let r = y[k] - draw.alpha0 - effect - a1 * x[k];
            t += r * r / denom;
        }
    }
    Some(t)
}

/// Fraction of pairs with the replicated discrepancy at least the realized one.
pub fn bayesian_p_value(pairs: &[PredictivePair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::DiagnosticUndefined("no predictive pairs".into()));
    }
    let hits = pairs.iter().filter(|p| p.predictive >= p.realized).count();
    Ok(hits as f64 / pairs.len() as f64)
}

/// Stream identifier built from the draw's contents, so that the replicate
/// simulated for a draw does not depend on its position in the input.
fn draw_stream_id(d: &DrawSnapshot) -> u64 {
    let mut words = vec![
        d.alpha0.to_bits(),
        d.alpha1.to_bits(),
        d.dof_x as u64,
        d.dof_y as u64,
    ];
    for i in 0..d.mu.len() {
        words.push(d.mu[i].to_bits());
        words.push(d.beta[i].to_bits() ^ d.gamma[i] as u64);
        words.push(d.sigma2_x[i].to_bits());
        words.push(d.sigma2_y[i].to_bits());
    }
    rng::key(&words)
}

/// Simulate a data set from the observation model at one draw, with fresh
/// mixing weights so that errors are t distributed.
fn replicate(draw: &DrawSnapshot, replicates: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = rng_for(seed, Block::Predictive, draw_stream_id(draw));
    let n = draw.mu.len();
    let mut x = Vec::with_capacity(n * replicates);
    let mut y = Vec::with_capacity(n * replicates);
    let (hx, hy) = (draw.dof_x as f64 / 2.0, draw.dof_y as f64 / 2.0);
    for i in 0..n {
        let effect = if draw.gamma[i] { draw.beta[i] } else { 0.0 };
        let nu = draw.alpha0 + effect + draw.alpha1 * draw.mu[i];
        for _ in 0..replicates {
            let wx = sample_gamma(&mut rng, hx, hx);
            x.push(sample_normal(
                &mut rng,
                draw.mu[i],
                (draw.sigma2_x[i] / wx).sqrt(),
            ));
            let wy = sample_gamma(&mut rng, hy, hy);
            y.push(sample_normal(&mut rng, nu, (draw.sigma2_y[i] / wy).sqrt()));
        }
    }
    (x, y)
}

/// Posterior predictive check over the supplied draws.
pub fn posterior_predictive_check(
    draws: &[DrawSnapshot],
    data: &ScreenData,
    seed: u64,
) -> Result<PpcResult> {
    let reps = data.n_replicates();
    let mut pairs = Vec::with_capacity(draws.len());
    let mut skipped = 0;
    for d in draws {
        if d.mu.len() != data.n_units() {
            return Err(Error::Shape(
                "draw and data cover different unit counts".into(),
            ));
        }
        let Some(realized) = discrepancy(data.x(), data.y(), reps, d) else {
            skipped += 1;
            continue;
        };
        let (xr, yr) = replicate(d, reps, seed);
        let predictive = discrepancy(&xr, &yr, reps, d).expect("dof already checked");
        pairs.push(PredictivePair {
            realized,
            predictive,
        });
    }
    if pairs.is_empty() {
        return Err(Error::DiagnosticUndefined(format!(
            "all {skipped} draws have degrees of freedom at most 2"
        )));
    }
    let p_value = bayesian_p_value(&pairs)?;
    Ok(PpcResult {
        pairs,
        p_value,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draw(dof_x: u32) -> DrawSnapshot {
        DrawSnapshot {
            gamma: vec![true, false],
            beta: vec![0.5, 0.0],
            mu: vec![-0.2, 0.1],
            sigma2_x: vec![0.1, 0.2],
            sigma2_y: vec![0.3, 0.4],
            alpha0: 0.2,
            alpha1: 1.5,
            dof_x,
            dof_y: 6,
        }
    }

    #[test]
    fn discrepancy_by_hand() {
        let d = draw(4);
        let x = [0.0, -0.4];
        let y = [1.0, 0.0];
        let den0 = 2.25 * 0.1 * 2.0 + 0.3 * 1.5;
        let den1 = 2.25 * 0.2 * 2.0 + 0.4 * 1.5;
        let expect = (1.0f64 - 0.2 - 0.5).powi(2) / den0 + (0.0f64 - 0.2 + 0.6).powi(2) / den1;
        let got = discrepancy(&x, &y, 1, &d).unwrap();
        assert!((got - expect).abs() < 1e-14);
    }

    #[test]
    fn equal_pairs_give_one() {
        let pairs = vec![
            PredictivePair {
                realized: 2.0,
                predictive: 2.0
            };
            5
        ];
        assert_eq!(bayesian_p_value(&pairs).unwrap(), 1.0);
    }

    #[test]
    fn low_dof_draws_are_skipped() {
        let data =
            ScreenData::from_rows(&[vec![0.0], vec![-0.4]], &[vec![1.0], vec![0.0]]).unwrap();
        let r = posterior_predictive_check(&[draw(2), draw(5)], &data, 1).unwrap();
        assert_eq!(r.skipped, 1);
        assert_eq!(r.pairs.len(), 1);
        assert!(matches!(
            posterior_predictive_check(&[draw(2)], &data, 1),
            Err(Error::DiagnosticUndefined(_))
        ));
    }

    #[test]
    fn order_of_draws_does_not_matter() {
        let data =
            ScreenData::from_rows(&[vec![0.0], vec![-0.4]], &[vec![1.0], vec![0.0]]).unwrap();
        let mut draws: Vec<DrawSnapshot> = (3..9).map(draw).collect();
        let a = posterior_predictive_check(&draws, &data, 4).unwrap();
        draws.reverse();
        let b = posterior_predictive_check(&draws, &data, 4).unwrap();
        assert_eq!(a.p_value, b.p_value);
        let mut pa = a.pairs.clone();
        pa.reverse();
        assert_eq!(pa, b.pairs);
    }
}
