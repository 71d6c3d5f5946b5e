use super::plates::{Channel, PlateSet};
use crate::error::{Error, Result};
use crate::model::{ControlKind, UnitKind};

/// Mean readings of the anchor controls of one physical plate, or of the
/// whole screen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchors {
    /// NTNP mean (`a`).
    pub ntnp: f64,
    /// SN mean (`b`).
    pub sn: f64,
    /// NTWP mean (`c`), absent when the plate has no NTWP controls.
    pub ntwp: Option<f64>,
}

/// Continuous piecewise-linear map taking plate anchors to global anchors,
/// with unit slope outside the outermost anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseMap {
    /// `(plate anchor, global anchor)`, ascending in both coordinates.
    knots: Vec<(f64, f64)>,
}

impl PiecewiseMap {
    /// Build the map. When either side lacks an NTWP mean the map uses the
    /// NTNP and SN anchors only. Plate and global anchors must be strictly
    /// ordered the same way.
    pub fn new(plate: &Anchors, global: &Anchors) -> Result<Self> {
        let mut knots = vec![(plate.ntnp, global.ntnp), (plate.sn, global.sn)];
        if let (Some(ch), Some(c)) = (plate.ntwp, global.ntwp) {
            knots.push((ch, c));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        let ordered = knots.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1);
        if !ordered {
            return Err(Error::DataQuality(format!(
                "plate anchors {:?} are not ordered like the global anchors {:?}",
                plate, global
            )));
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// Evaluate segment `s` (0 = below the first knot, `knots.len()` = above
    /// the last) at `x`, regardless of whether `x` lies in it.
    pub fn segment_value(&self, s: usize, x: f64) -> f64 {
        let k = &self.knots;
        if s == 0 {
            x - k[0].0 + k[0].1
        } else if s >= k.len() {
            let (p, g) = k[k.len() - 1];
            x - p + g
        } else {
            let (p0, g0) = k[s - 1];
            let (p1, g1) = k[s];
            (g1 - g0) * (x - p0) / (p1 - p0) + g0
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        let s = self.knots.iter().take_while(|(p, _)| x > *p).count();
        self.segment_value(s, x)
    }
}

/// Normalize one reading of a plate.
pub fn normalize_plate(value: f64, plate: &Anchors, global: &Anchors) -> Result<f64> {
    Ok(PiecewiseMap::new(plate, global)?.apply(value))
}

fn anchor_kind(kind: &UnitKind) -> Option<ControlKind> {
    match kind {
        UnitKind::Control(k) => Some(*k),
        UnitKind::Shrna { .. } => None,
    }
}

#[derive(Default)]
struct KindSums {
    sum: [f64; 3],
    n: [usize; 3],
}

impl KindSums {
    fn add(&mut self, k: ControlKind, v: f64) {
        self.sum[k as usize] += v;
        self.n[k as usize] += 1;
    }

    fn finish(&self, label: &str) -> Result<Anchors> {
        let mean = |k: ControlKind| {
            let i = k as usize;
            (self.n[i] > 0).then(|| self.sum[i] / self.n[i] as f64)
        };
        let need = |k: ControlKind| {
            mean(k).ok_or_else(|| Error::DataQuality(format!("{label} has no {k} anchor controls")))
        };
        Ok(Anchors {
            ntnp: need(ControlKind::Ntnp)?,
            sn: need(ControlKind::Sn)?,
            ntwp: mean(ControlKind::Ntwp),
        })
    }
}

/// Anchor means of one physical plate (`plate` index, `replicate`), or of
/// every plate when `plate` is `None`.
pub fn plate_anchors(
    set: &PlateSet,
    plate: Option<usize>,
    replicate: Option<usize>,
    channel: Channel,
) -> Result<Anchors> {
    let mut sums = KindSums::default();
    for (p, pl) in set.plates().iter().enumerate() {
        if plate.is_some_and(|q| q != p) {
            continue;
        }
        for w in pl.wells.iter().filter(|w| w.anchor && !w.deleted) {
            let Some(k) = anchor_kind(&w.kind) else {
                continue;
            };
            for (r, v) in w.channel(channel).iter().enumerate() {
                if replicate.is_none_or(|q| q == r) {
                    sums.add(k, *v);
                }
            }
        }
    }
    let label = match (plate, replicate) {
        (Some(p), Some(r)) => format!(
            "plate {} replicate {} ({channel})",
            set.plates()[p].id,
            r + 1
        ),
        (Some(p), None) => format!("plate {} ({channel})", set.plates()[p].id),
        _ => format!("the screen ({channel})"),
    };
    sums.finish(&label)
}

/// Plate anchors of one physical plate and channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateNormalization {
    pub plate: String,
    pub replicate: usize,
    pub channel: Channel,
    pub anchors: Anchors,
}

/// Map every physical plate (plate id and replicate) of each channel onto
/// the screen-wide anchor means. Returns the normalized set, the global
/// anchors per channel and the plate anchors used.
#[allow(clippy::type_complexity)]
pub fn normalize_plates(
    set: &PlateSet,
) -> Result<(PlateSet, Vec<(Channel, Anchors)>, Vec<PlateNormalization>)> {
    let mut out = set.clone();
    let mut globals = Vec::new();
    let mut used = Vec::new();
    for ch in Channel::BOTH {
        let global = plate_anchors(set, None, None, ch)?;
        globals.push((ch, global));
        for p in 0..set.plates().len() {
            for r in 0..set.replicates() {
                let local = plate_anchors(set, Some(p), Some(r), ch)?;
                let id = &set.plates()[p].id;
                let map = PiecewiseMap::new(&local, &global).map_err(|e| {
                    Error::DataQuality(format!("plate {id} replicate {} ({ch}): {e}", r + 1))
                })?;
                for w in &mut out.plates_mut()[p].wells {
                    let v = &mut w.values[ch as usize][r];
                    *v = map.apply(*v);
                }
                used.push(PlateNormalization {
                    plate: id.clone(),
                    replicate: r,
                    channel: ch,
                    anchors: local,
                });
            }
        }
    }
    Ok((out, globals, used))
}

/// Choose anchor controls: every surviving NTWP control, and a share
/// `fraction` of the surviving SN and NTNP controls of each plate taken by
/// alternation in `(row, col)` order, starting with the first.
pub fn designate_anchors(set: &PlateSet, fraction: f64) -> Result<PlateSet> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!(
            "anchor fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let mut out = set.clone();
    for plate in out.plates_mut() {
        let mut seen = [0usize; 3];
        for w in &mut plate.wells {
            w.anchor = false;
            if w.deleted {
                continue;
            }
            let Some(k) = anchor_kind(&w.kind) else {
                continue;
            };
            w.anchor = match k {
                ControlKind::Ntwp => true,
                ControlKind::Sn | ControlKind::Ntnp => {
                    let i = seen[k as usize] as f64;
                    seen[k as usize] += 1;
                    ((i + 1.0) * fraction).ceil() > (i * fraction).ceil()
                }
            };
        }
    }
    Ok(out)
}
