use std::fmt::Write as _;

use super::edge::{adjust_edge_effect, EdgeAdjustment, EdgeMode};
use super::normalize::{designate_anchors, normalize_plates, Anchors, PlateNormalization};
use super::outliers::{
    delete_control_outliers, remove_unit_outliers, ControlDeletion, UnitExclusion,
};
use super::plates::{Channel, PlateSet};
use crate::error::Result;
use crate::model::{ScreenData, Unit, UnitKind, WellPosition};

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    /// Replicate ratio above which a control position is deleted.
    pub control_outlier_threshold: f64,
    /// Share of units removed per channel for discordant replicates.
    pub unit_outlier_fraction: f64,
    /// Share of SN and NTNP controls per plate used as anchors.
    pub anchor_fraction: f64,
    pub adjust_edges: bool,
    pub edge_mode: EdgeMode,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            control_outlier_threshold: 0.5,
            unit_outlier_fraction: 0.02,
            anchor_fraction: 0.5,
            adjust_edges: true,
            edge_mode: EdgeMode::Experiment,
        }
    }
}

/// What each stage did, for the run manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ProvenanceReport {
    pub config: PreprocessConfig,
    pub input_wells: usize,
    pub input_controls: usize,
    pub deleted_controls: Vec<ControlDeletion>,
    pub edge: Vec<EdgeAdjustment>,
    pub global_anchors: Vec<(Channel, Anchors)>,
    pub plate_anchors: Vec<PlateNormalization>,
    pub anchor_controls: usize,
    pub evaluation_controls: usize,
    /// Units with a non-positive reading after normalization.
    pub nonpositive: Vec<String>,
    pub unit_exclusions: Vec<UnitExclusion>,
    pub output_shrnas: usize,
    pub output_controls: usize,
}

impl ProvenanceReport {
    /// Flat `key=value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let c = &self.config;
        let _ = writeln!(
            s,
            "control_outlier_threshold={}",
            c.control_outlier_threshold
        );
        let _ = writeln!(s, "unit_outlier_fraction={}", c.unit_outlier_fraction);
        let _ = writeln!(s, "anchor_fraction={}", c.anchor_fraction);
        let _ = writeln!(s, "adjust_edges={}", c.adjust_edges);
        let mode = match c.edge_mode {
            EdgeMode::Experiment => "experiment",
            EdgeMode::PerPlate => "plate",
        };
        let _ = writeln!(s, "edge_mode={mode}");
        let _ = writeln!(s, "input_wells={}", self.input_wells);
        let _ = writeln!(s, "input_controls={}", self.input_controls);
        let _ = writeln!(s, "deleted_controls={}", self.deleted_controls.len());
        for d in &self.deleted_controls {
            let _ = writeln!(
                s,
                "deleted_control={}:{}:{} kind={} channel={} ratio={}",
                d.plate,
                d.row + 1,
                d.col + 1,
                d.kind,
                d.channel,
                d.ratio
            );
        }
        for e in &self.edge {
            let scope = e
                .plate
                .as_ref()
                .map_or_else(|| "all".to_string(), |(p, r)| format!("{p}/{}", r + 1));
            let _ = writeln!(
                s,
                "edge_shift scope={scope} channel={} g2={} g1={}",
                e.channel, e.g2_shift, e.g1_shift
            );
        }
        let fmt_anchor = |a: &Anchors| match a.ntwp {
            Some(c) => format!("ntnp={} sn={} ntwp={}", a.ntnp, a.sn, c),
            None => format!("ntnp={} sn={} ntwp=none", a.ntnp, a.sn),
        };
        for (ch, a) in &self.global_anchors {
            let _ = writeln!(s, "global_anchor channel={ch} {}", fmt_anchor(a));
        }
        for n in &self.plate_anchors {
            let _ = writeln!(
                s,
                "plate_anchor plate={} replicate={} channel={} {}",
                n.plate,
                n.replicate + 1,
                n.channel,
                fmt_anchor(&n.anchors)
            );
        }
        let _ = writeln!(s, "anchor_controls={}", self.anchor_controls);
        let _ = writeln!(s, "evaluation_controls={}", self.evaluation_controls);
        let _ = writeln!(
            s,
            "nonpositive_after_normalization={}",
            self.nonpositive.len()
        );
        for n in &self.nonpositive {
            let _ = writeln!(s, "nonpositive_unit={n}");
        }
        let _ = writeln!(s, "excluded_units={}", self.unit_exclusions.len());
        for e in &self.unit_exclusions {
            let chans: Vec<&str> = e.channels.iter().map(Channel::as_str).collect();
            let _ = writeln!(
                s,
                "excluded_unit={} channels={} viability_ratio={} activity_ratio={}",
                e.name,
                chans.join("+"),
                e.viability_ratio,
                e.activity_ratio
            );
        }
        let _ = writeln!(s, "output_shrnas={}", self.output_shrnas);
        let _ = writeln!(s, "output_controls={}", self.output_controls);
        s
    }
}

fn unit_name(plate: &str, row: usize, col: usize, kind: &UnitKind) -> String {
    match kind {
        UnitKind::Shrna { id, .. } => id.clone(),
        UnitKind::Control(k) => format!("{k}:{plate}:{}:{}", row + 1, col + 1),
    }
}

/// Full preprocessing: control outlier deletion, anchor designation, edge
/// adjustment, plate normalization, replicate outlier removal, natural log.
pub fn run_pipeline(
    raw: &PlateSet,
    config: &PreprocessConfig,
) -> Result<(ScreenData, ProvenanceReport)> {
    let input_controls = raw.wells().filter(|(_, w)| w.kind.is_control()).count();
    let (set, deleted_controls) = delete_control_outliers(raw, config.control_outlier_threshold)?;
    let set = designate_anchors(&set, config.anchor_fraction)?;
    let (set, edge) = if config.adjust_edges {
        adjust_edge_effect(&set, config.edge_mode)?
    } else {
        (set, Vec::new())
    };

    let reps = set.replicates();
    let (set, global_anchors, plate_anchors) = normalize_plates(&set)?;

    let mut units = Vec::new();
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut nonpositive = Vec::new();
    let mut anchor_controls = 0;
    for (plate, w) in set.wells().filter(|(_, w)| !w.deleted) {
        let name = unit_name(&plate.id, w.row, w.col, &w.kind);
        let vx = w.channel(Channel::Viability);
        let vy = w.channel(Channel::Activity);
        if vx.iter().chain(vy).any(|v| v.is_nan() || *v <= 0.0) {
            nonpositive.push(name);
            continue;
        }
        anchor_controls += w.anchor as usize;
        units.push(Unit {
            name,
            kind: w.kind.clone(),
            position: Some(WellPosition {
                plate: plate.id.clone(),
                row: w.row,
                col: w.col,
            }),
            anchor: w.anchor,
        });
        x.extend_from_slice(vx);
        y.extend_from_slice(vy);
    }
    let normalized = ScreenData::new(units, reps, x, y)?;
    let (kept, unit_exclusions) = remove_unit_outliers(&normalized, config.unit_outlier_fraction)?;
    let logged = ScreenData::new(
        kept.units().to_vec(),
        reps,
        kept.x().iter().map(|v| v.ln()).collect(),
        kept.y().iter().map(|v| v.ln()).collect(),
    )?;

    let output_controls = logged
        .units()
        .iter()
        .filter(|u| u.kind.is_control())
        .count();
    let evaluation_controls = logged
        .units()
        .iter()
        .filter(|u| u.kind.is_control() && !u.anchor)
        .count();
    let report = ProvenanceReport {
        config: config.clone(),
        input_wells: raw.well_count(),
        input_controls,
        deleted_controls,
        edge,
        global_anchors,
        plate_anchors,
        anchor_controls,
        evaluation_controls,
        nonpositive,
        unit_exclusions,
        output_shrnas: logged.n_units() - output_controls,
        output_controls,
    };
    Ok((logged, report))
}
