use std::cmp::Ordering;

use crate::error::{Error, Result};

/// How the length of a posterior false detection rate list is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ListMode {
    /// Top `k` units.
    FixSize(usize),
    /// Longest prefix whose PFDR is strictly below the rate.
    FixRate(f64),
    /// Every unit with `p_i < kappa`.
    FixKappa(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PfdrList {
    /// Selected unit indices in rank order.
    pub units: Vec<usize>,
    /// Total loss `C = sum of p_i` over the list.
    pub loss: f64,
    /// `C / |list|`, 0 for an empty list.
    pub pfdr: f64,
    /// Set when a requested size exceeded the unit count.
    pub warning: Option<String>,
}

/// Rank units by ascending `p_i`; ties go to the larger `|effect|`, then to
/// the lower index. NaN effects count as zero.
pub fn rank_units(null_probs: &[f64], effect: Option<&[f64]>) -> Vec<usize> {
    let mag = |i: usize| {
        effect
            .map(|e| e[i].abs())
            .filter(|m| !m.is_nan())
            .unwrap_or(0.0)
    };
    let mut order: Vec<usize> = (0..null_probs.len()).collect();
    order.sort_by(|&a, &b| {
        null_probs[a]
            .total_cmp(&null_probs[b])
            .then_with(|| mag(b).partial_cmp(&mag(a)).unwrap_or(Ordering::Equal))
            .then(a.cmp(&b))
    });
    order
}

/// PFDR of every prefix of `order`. The sequence is mathematically
/// nondecreasing; a running maximum removes rounding wobble.
pub fn cumulative_pfdr(null_probs: &[f64], order: &[usize]) -> Vec<f64> {
    let mut sum = 0.0;
    let mut prev = 0.0f64;
    order
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            sum += null_probs[i];
            prev = prev.max(sum / (k + 1) as f64);
            prev
        })
        .collect()
}

/// Build a ranked list and its posterior false detection rate.
pub fn pfdr_list(null_probs: &[f64], effect: Option<&[f64]>, mode: ListMode) -> Result<PfdrList> {
    if let Some(p) = null_probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    if let Some(e) = effect {
        if e.len() != null_probs.len() {
            return Err(Error::Shape(
                "effect and probability vectors differ in length".into(),
            ));
        }
    }
    let order = rank_units(null_probs, effect);
    let cum = cumulative_pfdr(null_probs, &order);
    let mut warning = None;
    let size = match mode {
        ListMode::FixSize(k) => {
            if k > order.len() {
                warning = Some(format!(
                    "requested list size {k} exceeds the {} available units",
                    order.len()
                ));
            }
            k.min(order.len())
        }
        ListMode::FixRate(alpha) => cum.iter().take_while(|&&v| v < alpha).count(),
        ListMode::FixKappa(kappa) => order.iter().take_while(|&&i| null_probs[i] < kappa).count(),
    };
    let units = order[..size].to_vec();
    let loss = units.iter().map(|&i| null_probs[i]).sum();
    let pfdr = if size == 0 { 0.0 } else { cum[size - 1] };
    Ok(PfdrList {
        units,
        loss,
        pfdr,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_example() {
        let l = pfdr_list(&[0.1, 0.2, 0.3], None, ListMode::FixKappa(0.25)).unwrap();
        assert_eq!(l.units, vec![0, 1]);
        assert!((l.loss - 0.3).abs() < 1e-15);
        assert!((l.pfdr - 0.15).abs() < 1e-15);
    }

    #[test]
    fn all_zero_gives_zero() {
        for k in 0..5 {
            let l = pfdr_list(&[0.0; 4], None, ListMode::FixSize(k)).unwrap();
            assert_eq!(l.pfdr, 0.0);
        }
    }

    #[test]
    fn rate_boundary_is_strict() {
        let l = pfdr_list(&[0.04, 0.06], None, ListMode::FixRate(0.05)).unwrap();
        assert_eq!(l.units, vec![0]);
        assert_eq!(l.pfdr, 0.04);
    }

    #[test]
    fn oversized_request_is_clamped() {
        let l = pfdr_list(&[0.1, 0.2], None, ListMode::FixSize(5)).unwrap();
        assert_eq!(l.units.len(), 2);
        assert!(l.warning.is_some());
    }

    #[test]
    fn ties_prefer_larger_effects() {
        let p = [0.1, 0.1, 0.1, 0.0];
        let e = [0.5, -2.0, f64::NAN, 0.0];
        assert_eq!(rank_units(&p, Some(&e)), vec![3, 1, 0, 2]);
    }

    #[test]
    fn out_of_range_probability_is_rejected() {
        assert!(pfdr_list(&[1.2], None, ListMode::FixSize(1)).is_err());
    }
}
