use crate::error::{Error, Result};
use crate::model::ScreenData;
use crate::stats::{median, variance};

/// Divisor used for the per-column standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SdConvention {
    /// `n - 1`.
    #[default]
    Sample,
    /// `n`.
    Population,
}

/// Z-scores of one unit: one per replicate and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitZ {
    pub per_replicate: Vec<f64>,
    pub mean: f64,
}

/// Robustly centred activity Z-scores, `(y_ij - M_j) / S_j` with `M_j` the
/// median and `S_j` the standard deviation of replicate column `j`.
pub fn zscore_baseline(data: &ScreenData, sd: SdConvention) -> Result<Vec<UnitZ>> {
    let n = data.n_units();
    let reps = data.n_replicates();
    let ddof = match sd {
        SdConvention::Sample => 1,
        SdConvention::Population => 0,
    };
    if n <= ddof {
        return Err(Error::Degenerate(
            "too few units for a standard deviation".into(),
        ));
    }
    let mut centre = Vec::with_capacity(reps);
    let mut scale = Vec::with_capacity(reps);
    for j in 0..reps {
        let col: Vec<f64> = (0..n).map(|i| data.y_row(i)[j]).collect();
        let s = variance(&col, ddof).sqrt();
        if s.is_nan() || s <= 0.0 {
            return Err(Error::Degenerate(format!(
                "replicate column {j} has zero standard deviation"
            )));
        }
        centre.push(median(&col));
        scale.push(s);
    }
    Ok((0..n)
        .map(|i| {
            let per_replicate: Vec<f64> = data
                .y_row(i)
                .iter()
                .enumerate()
                .map(|(j, y)| (y - centre[j]) / scale[j])
                .collect();
            let mean = per_replicate.iter().sum::<f64>() / reps as f64;
            UnitZ {
                per_replicate,
                mean,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(ys: &[f64]) -> ScreenData {
        let x: Vec<Vec<f64>> = ys.iter().map(|_| vec![0.0, 0.0]).collect();
        let y: Vec<Vec<f64>> = ys.iter().map(|&v| vec![v, v]).collect();
        ScreenData::from_rows(&x, &y).unwrap()
    }

    #[test]
    fn hand_example() {
        let z = zscore_baseline(&column(&[1.0, 2.0, 3.0, 4.0, 5.0]), SdConvention::Sample).unwrap();
        // median 3, sample sd sqrt(2.5)
        let expect = 2.0 / 2.5f64.sqrt();
        assert!((z[4].per_replicate[0] - expect).abs() < 1e-15);
        assert!((z[4].mean - expect).abs() < 1e-15);
        assert_eq!(z[2].mean, 0.0);
        let pop = zscore_baseline(
            &column(&[1.0, 2.0, 3.0, 4.0, 5.0]),
            SdConvention::Population,
        )
        .unwrap();
        assert!((pop[4].mean - 2.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constant_column_is_degenerate() {
        assert!(matches!(
            zscore_baseline(&column(&[1.0, 1.0, 1.0]), SdConvention::Sample),
            Err(Error::Degenerate(_))
        ));
    }
}
