use super::plates::{Channel, PlateSet};
use crate::error::{Error, Result};
use crate::model::{ControlKind, UnitKind};

/// Position class of a well relative to the plate boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeGroup {
    /// On the boundary.
    G1,
    /// Adjacent to the boundary.
    G2,
    /// Interior.
    G3,
}

pub fn edge_group(row: usize, col: usize, rows: usize, cols: usize) -> EdgeGroup {
    let ring = row.min(col).min(rows - 1 - row).min(cols - 1 - col);
    match ring {
        0 => EdgeGroup::G1,
        1 => EdgeGroup::G2,
        _ => EdgeGroup::G3,
    }
}

/// Scope over which the edge constants are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeMode {
    /// One constant per group and channel for the whole screen.
    #[default]
    Experiment,
    /// One constant per group, channel and physical plate
    /// (plate id and replicate).
    PerPlate,
}

/// Constants added in one scope and channel.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAdjustment {
    /// `None` for the experiment-wide scope, else `(plate id, replicate)`.
    pub plate: Option<(String, usize)>,
    pub channel: Channel,
    pub g2_shift: f64,
    pub g1_shift: f64,
}

fn is_ntwp(kind: &UnitKind) -> bool {
    matches!(kind, UnitKind::Control(ControlKind::Ntwp))
}

#[derive(Default)]
struct Acc {
    sum: [f64; 3],
    n: [usize; 3],
}

impl Acc {
    fn mean(&self, g: usize) -> Option<f64> {
        (self.n[g] > 0).then(|| self.sum[g] / self.n[g] as f64)
    }
}

/// Shift G2 wells, then G1 wells other than NTWP controls, so that each
/// group's mean equals the G3 mean. Deleted controls do not enter the means.
pub fn adjust_edge_effect(
    plates: &PlateSet,
    mode: EdgeMode,
) -> Result<(PlateSet, Vec<EdgeAdjustment>)> {
    let (rows, cols) = (plates.rows(), plates.cols());
    if rows < 5 || cols < 5 {
        return Err(Error::Config(format!(
            "a {rows}x{cols} grid has no interior wells for edge adjustment"
        )));
    }
    let reps = plates.replicates();
    let mut out = plates.clone();
    let mut log = Vec::new();

    let scopes: Vec<Option<(usize, usize)>> = match mode {
        EdgeMode::Experiment => vec![None],
        EdgeMode::PerPlate => (0..plates.plates().len())
            .flat_map(|p| (0..reps).map(move |r| Some((p, r))))
            .collect(),
    };
    for scope in scopes {
        let in_scope = |p: usize, r: usize| scope.is_none_or(|(sp, sr)| sp == p && sr == r);
        for channel in Channel::BOTH {
            let mut acc = Acc::default();
            for (p, plate) in plates.plates().iter().enumerate() {
                for w in plate.wells.iter().filter(|w| !w.deleted) {
                    let g = edge_group(w.row, w.col, rows, cols) as usize;
                    if g == 0 && is_ntwp(&w.kind) {
                        continue;
                    }
                    for (r, v) in w.channel(channel).iter().enumerate() {
                        if in_scope(p, r) {
                            acc.sum[g] += v;
                            acc.n[g] += 1;
                        }
                    }
                }
            }
            let g3 = acc.mean(2).ok_or_else(|| {
                Error::Config("no interior wells with readings for edge adjustment".into())
            })?;
            let g2_shift = acc.mean(1).map_or(0.0, |m| g3 - m);
            let g1_shift = acc.mean(0).map_or(0.0, |m| g3 - m);
            for (p, plate) in out.plates_mut().iter_mut().enumerate() {
                for w in &mut plate.wells {
                    let shift = match edge_group(w.row, w.col, rows, cols) {
                        EdgeGroup::G3 => continue,
                        EdgeGroup::G2 => g2_shift,
                        EdgeGroup::G1 if is_ntwp(&w.kind) => continue,
                        EdgeGroup::G1 => g1_shift,
                    };
                    for (r, v) in w.values[channel as usize].iter_mut().enumerate() {
                        if in_scope(p, r) {
                            *v += shift;
                        }
                    }
                }
            }
            log.push(EdgeAdjustment {
                plate: scope.map(|(p, r)| (plates.plates()[p].id.clone(), r)),
                channel,
                g2_shift,
                g1_shift,
            });
        }
    }
    Ok((out, log))
}
