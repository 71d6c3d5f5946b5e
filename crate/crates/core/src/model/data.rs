use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControlKind {
    /// Spike negative (non-human hairpin).
    Sn,
    /// No transduction, no puromycin.
    Ntnp,
    /// No transduction, with puromycin.
    Ntwp,
}

impl ControlKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControlKind::Sn => "SN",
            ControlKind::Ntnp => "NTNP",
            ControlKind::Ntwp => "NTWP",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SN" => Some(ControlKind::Sn),
            "NTNP" => Some(ControlKind::Ntnp),
            "NTWP" => Some(ControlKind::Ntwp),
            _ => None,
        }
    }
}

impl fmt::Display for ControlKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum UnitKind {
    Shrna { id: String, gene: String },
    Control(ControlKind),
}

impl UnitKind {
    pub fn is_control(&self) -> bool {
        matches!(self, UnitKind::Control(_))
    }

    pub fn gene(&self) -> Option<&str> {
        match self {
            UnitKind::Shrna { gene, .. } => Some(gene),
            UnitKind::Control(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WellPosition {
    pub plate: String,
    pub row: usize,
    pub col: usize,
}

/// Metadata for one analysed unit (an shRNA or a control well position).
#[derive(Debug, Clone, PartialEq)]
pub struct Unit {
    pub name: String,
    pub kind: UnitKind,
    pub position: Option<WellPosition>,
    /// Control consumed as a normalization anchor (not available for evaluation).
    pub anchor: bool,
}

impl Unit {
    pub fn synthetic(i: usize) -> Self {
        Unit {
            name: format!("u{i}"),
            kind: UnitKind::Shrna {
                id: format!("u{i}"),
                gene: format!("g{i}"),
            },
            position: None,
            anchor: false,
        }
    }
}

/// Log-scale two-channel replicate matrices, row-major `units x replicates`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreenData {
    units: Vec<Unit>,
    replicates: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl ScreenData {
    pub fn new(units: Vec<Unit>, replicates: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if replicates == 0 {
            return Err(Error::Shape("at least one replicate is required".into()));
        }
        let n = units.len() * replicates;
        if x.len() != n || y.len() != n {
            return Err(Error::Shape(format!(
                "expected {} x {} values per channel, got x={} y={}",
                units.len(),
                replicates,
                x.len(),
                y.len()
            )));
        }
        if let Some(k) = x.iter().chain(&y).position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite measurement at flat index {}",
                k % n
            )));
        }
        let mut names: Vec<&str> = units.iter().map(|u| u.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Shape(format!("duplicate unit name {:?}", w[0])));
        }
        Ok(Self {
            units,
            replicates,
            x,
            y,
        })
    }

    /// Build from nested rows with synthetic unit labels.
    pub fn from_rows(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Shape("x and y have different unit counts".into()));
        }
        let j = x.first().map_or(0, Vec::len);
        if x.iter().chain(y).any(|r| r.len() != j) {
            return Err(Error::Shape("ragged replicate rows".into()));
        }
        let units = (0..x.len()).map(Unit::synthetic).collect();
        Self::new(units, j, x.concat(), y.concat())
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    pub fn n_replicates(&self) -> usize {
        self.replicates
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x_row(&self, i: usize) -> &[f64] {
        &self.x[i * self.replicates..(i + 1) * self.replicates]
    }

    pub fn y_row(&self, i: usize) -> &[f64] {
        &self.y[i * self.replicates..(i + 1) * self.replicates]
    }

    /// Require replication, which the plug-in and outlier steps depend on.
    pub fn require_replicated(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::Estimation(format!(
                "need at least 2 replicates, data has {}",
                self.replicates
            )));
        }
        Ok(())
    }

    /// Keep the listed units, in the given order.
    pub fn select(&self, keep: &[usize]) -> Self {
        let mut x = Vec::with_capacity(keep.len() * self.replicates);
        let mut y = Vec::with_capacity(keep.len() * self.replicates);
        for &i in keep {
            x.extend_from_slice(self.x_row(i));
            y.extend_from_slice(self.y_row(i));
        }
        Self {
            units: keep.iter().map(|&i| self.units[i].clone()).collect(),
            replicates: self.replicates,
            x,
            y,
        }
    }

    /// Plug-in channel variance: mean over units of the within-unit sample
    /// variance. For two replicates this is `mean((r1 - r2)^2 / 2)`.
    pub fn replicate_variance(&self, channel_y: bool) -> Result<f64> {
        self.require_replicated()?;
        let n = self.n_units();
        if n == 0 {
            return Err(Error::Estimation("no units".into()));
        }
        let total: f64 = (0..n)
            .map(|i| {
                let row = if channel_y {
                    self.y_row(i)
                } else {
                    self.x_row(i)
                };
                crate::stats::variance(row, 1)
            })
            .sum();
        Ok(total / n as f64)
    }
}
