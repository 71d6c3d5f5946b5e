use super::plates::{Channel, PlateSet};
use crate::error::{Error, Result};
use crate::model::{ControlKind, ScreenData};

/// Spread of replicate readings relative to their mean. For two readings
/// this is `|m1 - m2| / ((m1 + m2) / 2)`; for more it is `(max - min) / mean`.
pub fn replicate_ratio(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Degenerate("no replicate readings".into()));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean == 0.0 {
        return Err(Error::Degenerate("replicate mean is zero".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((hi - lo) / mean)
}

/// A control position removed before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlDeletion {
    pub plate: String,
    pub row: usize,
    pub col: usize,
    pub kind: ControlKind,
    pub channel: Channel,
    pub ratio: f64,
}

/// Mark control positions whose replicate ratio in either channel exceeds
/// `threshold`. Marked controls anchor nothing and leave the analysis.
pub fn delete_control_outliers(
    plates: &PlateSet,
    threshold: f64,
) -> Result<(PlateSet, Vec<ControlDeletion>)> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::Config(format!(
            "control outlier threshold must be positive, got {threshold}"
        )));
    }
    let mut out = plates.clone();
    let mut log = Vec::new();
    for plate in out.plates_mut() {
        for w in &mut plate.wells {
            let crate::model::UnitKind::Control(kind) = w.kind else {
                continue;
            };
            for c in Channel::BOTH {
                let ratio = replicate_ratio(w.channel(c))?;
                if ratio > threshold {
                    w.deleted = true;
                    log.push(ControlDeletion {
                        plate: plate.id.clone(),
                        row: w.row,
                        col: w.col,
                        kind,
                        channel: c,
                        ratio,
                    });
                }
            }
        }
    }
    Ok((out, log))
}

/// A unit dropped for discordant replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitExclusion {
    pub name: String,
    pub viability_ratio: f64,
    pub activity_ratio: f64,
    /// Channels in whose top fraction the unit fell.
    pub channels: Vec<Channel>,
}

/// Indices of the `floor(fraction * n)` largest ratios; ties go to the
/// lower index.
fn top_fraction(ratios: &[f64], fraction: f64) -> Vec<usize> {
    let k = ((fraction * ratios.len() as f64) + 1e-9).floor() as usize;
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&a, &b| ratios[b].total_cmp(&ratios[a]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

/// Drop the units whose replicate ratio is among the top `fraction` in
/// either channel. `data` must still be on the raw (positive) scale.
pub fn remove_unit_outliers(
    data: &ScreenData,
    fraction: f64,
) -> Result<(ScreenData, Vec<UnitExclusion>)> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::Config(format!(
            "outlier fraction must lie in [0, 1), got {fraction}"
        )));
    }
    let n = data.n_units();
    let ratios = |y: bool| -> Result<Vec<f64>> {
        (0..n)
            .map(|i| replicate_ratio(if y { data.y_row(i) } else { data.x_row(i) }))
            .collect()
    };
    let rx = ratios(false)?;
    let ry = ratios(true)?;
    let mut flagged: Vec<Vec<Channel>> = vec![Vec::new(); n];
    for i in top_fraction(&rx, fraction) {
        flagged[i].push(Channel::Viability);
    }
    for i in top_fraction(&ry, fraction) {
        flagged[i].push(Channel::Activity);
    }
    let mut keep = Vec::with_capacity(n);
    let mut log = Vec::new();
    for (i, channels) in flagged.into_iter().enumerate() {
        if channels.is_empty() {
            keep.push(i);
        } else {
            log.push(UnitExclusion {
                name: data.units()[i].name.clone(),
                viability_ratio: rx[i],
                activity_ratio: ry[i],
                channels,
            });
        }
    }
    Ok((data.select(&keep), log))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_examples() {
        assert_eq!(replicate_ratio(&[1.0, 1.0]).unwrap(), 0.0);
        assert!((replicate_ratio(&[2.0, 1.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            replicate_ratio(&[0.0, 0.0]),
            Err(Error::Degenerate(_))
        ));
    }

    fn data_with_ratios(x_spread: &[f64], y_spread: &[f64]) -> ScreenData {
        let x: Vec<Vec<f64>> = x_spread.iter().map(|d| vec![10.0 + d, 10.0 - d]).collect();
        let y: Vec<Vec<f64>> = y_spread.iter().map(|d| vec![10.0 + d, 10.0 - d]).collect();
        ScreenData::from_rows(&x, &y).unwrap()
    }

    #[test]
    fn zero_fraction_keeps_everything() {
        let d = data_with_ratios(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]);
        let (kept, log) = remove_unit_outliers(&d, 0.0).unwrap();
        assert_eq!(kept, d);
        assert!(log.is_empty());
    }

    #[test]
    fn two_percent_of_a_hundred() {
        let spread: Vec<f64> = (0..100).map(|i| i as f64 / 20.0).collect();
        let d = data_with_ratios(&spread, &[0.0; 100]);
        let (_, log) = remove_unit_outliers(&d, 0.02).unwrap();
        let names: Vec<&str> = log
            .iter()
            .filter(|e| e.channels.contains(&Channel::Viability))
            .map(|e| e.name.as_str())
            .collect();
        assert_eq!(names, vec!["u98", "u99"]);
    }

    #[test]
    fn viability_outlier_leaves_the_whole_analysis() {
        let mut xs = vec![0.1; 50];
        xs[7] = 5.0;
        let mut ys = vec![0.1; 50];
        ys[0] = 4.0;
        let d = data_with_ratios(&xs, &ys);
        let (kept, log) = remove_unit_outliers(&d, 0.02).unwrap();
        assert_eq!(kept.n_units(), 48);
        assert!(kept.units().iter().all(|u| u.name != "u7"));
        let u7 = log.iter().find(|e| e.name == "u7").unwrap();
        assert_eq!(u7.channels, vec![Channel::Viability]);
    }

    #[test]
    fn ties_go_to_the_earlier_unit() {
        assert_eq!(top_fraction(&[1.0, 3.0, 3.0, 0.5], 0.25), vec![1]);
    }
}
