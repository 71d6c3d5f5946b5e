use std::fmt;

use super::summary::UnitSummary;
use crate::error::{Error, Result};

/// Range of normal cell viability on the log scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViabilityRange {
    pub lo: f64,
    pub hi: f64,
}

impl ViabilityRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::Degenerate(format!(
                "viability range ({lo}, {hi}) is empty"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// Closed-interval membership.
    pub fn flag(&self, mu: f64) -> ViabilityFlag {
        if mu < self.lo {
            ViabilityFlag::Below
        } else if mu > self.hi {
            ViabilityFlag::Above
        } else {
            ViabilityFlag::Normal
        }
    }
}

/// Smallest interval containing the posterior viability means of controls.
pub fn viability_range(control_mu_means: &[f64]) -> Result<ViabilityRange> {
    if control_mu_means.len() < 2 {
        return Err(Error::Degenerate(
            "at least two controls are needed for a viability range".into(),
        ));
    }
    let lo = control_mu_means
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = control_mu_means
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    ViabilityRange::new(lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViabilityFlag {
    Below,
    Normal,
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActivityFlag {
    None,
    Decrease,
    Increase,
    /// The evidence rule fired but the direction is unknown (the unit was
    /// never active in any retained draw, or its mean effect is exactly 0).
    Indeterminate,
}

impl ViabilityFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViabilityFlag::Below => "below",
            ViabilityFlag::Normal => "normal",
            ViabilityFlag::Above => "above",
        }
    }
}

impl ActivityFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ActivityFlag::None => "none",
            ActivityFlag::Decrease => "decrease",
            ActivityFlag::Increase => "increase",
            ActivityFlag::Indeterminate => "indeterminate",
        }
    }

    pub fn is_change(&self) -> bool {
        *self != ActivityFlag::None
    }
}

impl fmt::Display for ViabilityFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for ActivityFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A unit changes activity when `p_i < null_prob` or when its
/// `E(beta_i | gamma_i = 1)` falls outside `[beta_lo, beta_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitThresholds {
    pub null_prob: f64,
    pub beta_lo: f64,
    pub beta_hi: f64,
}

impl Default for HitThresholds {
    /// Values derived from the evaluation controls of one published screen.
    /// They are specific to that data set; prefer [`HitThresholds::from_controls`].
    fn default() -> Self {
        Self {
            null_prob: 0.7468,
            beta_lo: -0.806,
            beta_hi: 0.392,
        }
    }
}

impl HitThresholds {
    /// Thresholds at the extremes of the evaluation controls: no control is
    /// called by the probability rule, and the effect interval is the range
    /// of the controls' defined effect means.
    pub fn from_controls(controls: &[UnitSummary]) -> Result<Self> {
        if controls.len() < 2 {
            return Err(Error::Degenerate(
                "at least two evaluation controls are needed".into(),
            ));
        }
        let null_prob = controls
            .iter()
            .map(|c| c.null_prob)
            .fold(f64::INFINITY, f64::min);
        let betas: Vec<f64> = controls.iter().filter_map(|c| c.active_beta).collect();
        if betas.is_empty() {
            return Err(Error::Degenerate(
                "no evaluation control was ever active; effect interval undefined".into(),
            ));
        }
        Ok(Self {
            null_prob,
            beta_lo: betas.iter().copied().fold(f64::INFINITY, f64::min),
            beta_hi: betas.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Activity and viability calls for one unit.
pub fn classify(
    s: &UnitSummary,
    viability: &ViabilityRange,
    t: &HitThresholds,
) -> (ActivityFlag, ViabilityFlag) {
    let prob_rule = s.null_prob < t.null_prob;
    let activity = match s.active_beta {
        None if prob_rule => ActivityFlag::Indeterminate,
        None => ActivityFlag::None,
        Some(b) => {
            let effect_rule = b < t.beta_lo || b > t.beta_hi;
            if !(prob_rule || effect_rule) {
                ActivityFlag::None
            } else if b < 0.0 {
                ActivityFlag::Decrease
            } else if b > 0.0 {
                ActivityFlag::Increase
            } else {
                ActivityFlag::Indeterminate
            }
        }
    };
    (activity, viability.flag(s.mu_mean))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(activity_prob: f64, beta: Option<f64>, mu: f64) -> UnitSummary {
        UnitSummary {
            null_prob: 1.0 - activity_prob,
            active_beta: beta,
            mu_mean: mu,
        }
    }

    #[test]
    fn range_of_control_means() {
        let r = viability_range(&[-0.5, -0.2, -0.3]).unwrap();
        assert_eq!((r.lo, r.hi), (-0.5, -0.2));
        assert!(viability_range(&[-0.5]).is_err());
        assert!(viability_range(&[0.1, 0.1]).is_err());
    }

    #[test]
    fn strong_knockdown_with_low_viability() {
        let range = ViabilityRange::new(-0.635, -0.007).unwrap();
        let s = unit(0.993, Some(-2.323), -0.657);
        assert_eq!(
            classify(&s, &range, &HitThresholds::default()),
            (ActivityFlag::Decrease, ViabilityFlag::Below)
        );
    }

    #[test]
    fn weak_evidence_is_no_change() {
        let range = ViabilityRange::new(-0.635, -0.007).unwrap();
        let s = unit(0.005, Some(-0.088), -0.3);
        let (a, v) = classify(&s, &range, &HitThresholds::default());
        assert_eq!(a, ActivityFlag::None);
        assert_eq!(v, ViabilityFlag::Normal);
    }

    #[test]
    fn never_active_units() {
        let range = ViabilityRange::new(-1.0, 0.0).unwrap();
        let t = HitThresholds::default();
        assert_eq!(
            classify(&unit(0.0, None, -0.5), &range, &t).0,
            ActivityFlag::None
        );
        // Probability rule fires but there is no effect estimate.
        let odd = UnitSummary {
            null_prob: 0.5,
            active_beta: None,
            mu_mean: -0.5,
        };
        assert_eq!(classify(&odd, &range, &t).0, ActivityFlag::Indeterminate);
    }

    #[test]
    fn effect_rule_alone_fires() {
        let range = ViabilityRange::new(-1.0, 0.0).unwrap();
        let t = HitThresholds::default();
        assert_eq!(
            classify(&unit(0.1, Some(0.5), -0.5), &range, &t).0,
            ActivityFlag::Increase
        );
        assert_eq!(
            classify(&unit(0.1, Some(0.392), -0.5), &range, &t).0,
            ActivityFlag::None
        );
    }

    #[test]
    fn viability_range_is_closed() {
        let range = ViabilityRange::new(-1.0, 0.0).unwrap();
        assert_eq!(range.flag(-1.0), ViabilityFlag::Normal);
        assert_eq!(range.flag(0.0), ViabilityFlag::Normal);
        assert_eq!(range.flag(0.01), ViabilityFlag::Above);
    }

    #[test]
    fn thresholds_from_controls() {
        let controls = [
            unit(0.2532, Some(-0.8), -0.3),
            unit(0.01, Some(0.39), -0.2),
            unit(0.0, None, -0.1),
        ];
        let t = HitThresholds::from_controls(&controls).unwrap();
        assert!((t.null_prob - 0.7468).abs() < 1e-12);
        assert_eq!((t.beta_lo, t.beta_hi), (-0.8, 0.39));
        let range = ViabilityRange::new(-1.0, 0.0).unwrap();
        assert!(controls
            .iter()
            .all(|c| !classify(c, &range, &t).0.is_change()));
    }
}
