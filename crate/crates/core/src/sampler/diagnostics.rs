use crate::error::{Error, Result};
use crate::stats::{mean, variance};

/// Classical potential scale reduction factor for one scalar estimand.
///
/// `chains` must hold at least two traces of equal length (>= 10). Chains that
/// are constant and identical leave the statistic undefined; constant but
/// distinct chains give `+inf`.
pub fn gelman_rubin(chains: &[&[f64]]) -> Result<f64> {
    let m = chains.len();
    if m < 2 {
        return Err(Error::Config("R-hat needs at least two chains".into()));
    }
    let n = chains[0].len();
    if n < 10 || chains.iter().any(|c| c.len() != n) {
        return Err(Error::Config(
            "R-hat needs equal chain lengths of at least 10".into(),
        ));
    }
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let within = chains.iter().map(|c| variance(c, 1)).sum::<f64>() / m as f64;
    let between = n as f64 * variance(&means, 1);
    if within == 0.0 {
        if between == 0.0 {
            return Err(Error::DiagnosticUndefined(
                "all chains are constant and identical".into(),
            ));
        }
        return Ok(f64::INFINITY);
    }
    let pooled = (n as f64 - 1.0) / n as f64 * within + between / n as f64;
    Ok((pooled / within).sqrt())
}
