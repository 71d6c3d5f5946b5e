use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::UnitKind;

/// Measurement channel of a plate reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    /// Constitutive reporter (cell viability), the model's `x`.
    Viability = 0,
    /// Pathway-specific reporter (e.g. luciferase), the model's `y`.
    Activity = 1,
}

impl Channel {
    pub const BOTH: [Channel; 2] = [Channel::Viability, Channel::Activity];

    pub fn as_str(&self) -> &'static str {
        match self {
            Channel::Viability => "viability",
            Channel::Activity => "activity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "viability" | "x" => Some(Channel::Viability),
            "activity" | "y" => Some(Channel::Activity),
            _ => None,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One well position with all of its replicate readings.
#[derive(Debug, Clone, PartialEq)]
pub struct Well {
    /// 0-based row.
    pub row: usize,
    /// 0-based column.
    pub col: usize,
    pub kind: UnitKind,
    /// `values[channel][replicate]`, raw scale.
    pub values: [Vec<f64>; 2],
    /// Removed by control outlier deletion.
    pub deleted: bool,
    /// Control used to anchor normalization.
    pub anchor: bool,
}

impl Well {
    pub fn channel(&self, c: Channel) -> &[f64] {
        &self.values[c as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plate {
    pub id: String,
    /// Sorted by `(row, col)`.
    pub wells: Vec<Well>,
}

/// Every plate of a screen, sorted by plate id, sharing one grid geometry
/// and one replicate count.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateSet {
    rows: usize,
    cols: usize,
    replicates: usize,
    plates: Vec<Plate>,
}

impl PlateSet {
    pub fn new(
        rows: usize,
        cols: usize,
        replicates: usize,
        mut plates: Vec<Plate>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 || replicates == 0 {
            return Err(Error::Config(
                "plate geometry and replicate count must be positive".into(),
            ));
        }
        plates.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = plates.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::DataQuality(format!(
                "plate {} appears twice",
                w[0].id
            )));
        }
        let mut shrna_at: HashMap<&str, (&str, usize, usize)> = HashMap::new();
        for plate in &mut plates {
            plate.wells.sort_by_key(|w| (w.row, w.col));
            if let Some(w) = plate
                .wells
                .windows(2)
                .find(|w| (w[0].row, w[0].col) == (w[1].row, w[1].col))
            {
                return Err(Error::DataQuality(format!(
                    "plate {} has two wells at row {} col {}",
                    plate.id,
                    w[0].row + 1,
                    w[0].col + 1
                )));
            }
        }
        for plate in &plates {
            for w in &plate.wells {
                let at = format!("(plate {}, row {}, col {})", plate.id, w.row + 1, w.col + 1);
                if w.row >= rows || w.col >= cols {
                    return Err(Error::DataQuality(format!(
                        "{at} lies outside the {rows}x{cols} grid"
                    )));
                }
                for c in Channel::BOTH {
                    let v = w.channel(c);
                    if v.len() != replicates {
                        return Err(Error::DataQuality(format!(
                            "{at} has {} {c} replicates, expected {replicates}",
                            v.len()
                        )));
                    }
                    if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                        return Err(Error::Domain(format!(
                            "{at} has non-positive {c} reading {x}"
                        )));
                    }
                }
                if let UnitKind::Shrna { id, .. } = &w.kind {
                    if let Some((p, r, c)) = shrna_at.insert(id, (&plate.id, w.row, w.col)) {
                        return Err(Error::DataQuality(format!(
                            "shRNA {id} occupies both (plate {p}, row {}, col {}) and {at}",
                            r + 1,
                            c + 1
                        )));
                    }
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            replicates,
            plates,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn plates(&self) -> &[Plate] {
        &self.plates
    }

    pub(crate) fn plates_mut(&mut self) -> &mut [Plate] {
        &mut self.plates
    }

    pub fn well_count(&self) -> usize {
        self.plates.iter().map(|p| p.wells.len()).sum()
    }

    pub fn wells(&self) -> impl Iterator<Item = (&Plate, &Well)> {
        self.plates
            .iter()
            .flat_map(|p| p.wells.iter().map(move |w| (p, w)))
    }
}

type WellKey = (String, usize, usize);
type Readings = BTreeMap<(Channel, usize), f64>;

/// Assembles a [`PlateSet`] from individual readings, checking that every
/// replicate plate uses the same layout.
#[derive(Debug, Default)]
pub struct PlateSetBuilder {
    /// (plate, row, col) -> (kind, channel/replicate -> value)
    wells: BTreeMap<WellKey, (UnitKind, Readings)>,
}

impl PlateSetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add one reading. `row`, `col` and `replicate` are 0-based.
    #[allow(clippy::too_many_arguments)]
    pub fn add(
        &mut self,
        plate: &str,
        row: usize,
        col: usize,
        channel: Channel,
        replicate: usize,
        kind: UnitKind,
        value: f64,
    ) -> Result<()> {
        let at = || format!("(plate {plate}, row {}, col {})", row + 1, col + 1);
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Domain(format!(
                "non-positive reading {value} at {}",
                at()
            )));
        }
        let entry = self
            .wells
            .entry((plate.to_string(), row, col))
            .or_insert_with(|| (kind.clone(), BTreeMap::new()));
        if entry.0 != kind {
            return Err(Error::DataQuality(format!(
                "layout differs across replicates at {}: {:?} vs {:?}",
                at(),
                entry.0,
                kind
            )));
        }
        if entry.1.insert((channel, replicate), value).is_some() {
            return Err(Error::DataQuality(format!(
                "duplicate {channel} reading for replicate {} at {}",
                replicate + 1,
                at()
            )));
        }
        Ok(())
    }

    /// Finish with an explicit grid, or the smallest grid that holds every
    /// well when `geometry` is `None`.
    pub fn build(self, geometry: Option<(usize, usize)>) -> Result<PlateSet> {
        let replicates = self
            .wells
            .values()
            .flat_map(|(_, v)| v.keys().map(|(_, r)| r + 1))
            .max()
            .unwrap_or(0);
        let (rows, cols) = geometry.unwrap_or_else(|| {
            let r = self.wells.keys().map(|k| k.1 + 1).max().unwrap_or(0);
            let c = self.wells.keys().map(|k| k.2 + 1).max().unwrap_or(0);
            (r, c)
        });
        let mut plates: BTreeMap<String, Vec<Well>> = BTreeMap::new();
        for ((plate, row, col), (kind, readings)) in self.wells {
            let mut values = [Vec::new(), Vec::new()];
            for c in Channel::BOTH {
                for r in 0..replicates {
                    let v = readings.get(&(c, r)).ok_or_else(|| {
                        Error::DataQuality(format!(
                            "missing {c} replicate {} at (plate {plate}, row {}, col {})",
                            r + 1,
                            row + 1,
                            col + 1
                        ))
                    })?;
                    values[c as usize].push(*v);
                }
            }
            plates.entry(plate).or_default().push(Well {
                row,
                col,
                kind,
                values,
                deleted: false,
                anchor: false,
            });
        }
        let plates = plates
            .into_iter()
            .map(|(id, wells)| Plate { id, wells })
            .collect();
        PlateSet::new(rows, cols, replicates, plates)
    }
}
