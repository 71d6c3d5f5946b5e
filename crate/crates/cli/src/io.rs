//! CSV readers and writers. Floating-point fields are written in shortest
//! round-trip form, so every emitted file loads back without loss.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use htsbayes::inference::UnitSummary;
use htsbayes::model::{ControlKind, ScreenData, Unit, UnitKind, WellPosition};
use htsbayes::preprocess::{Channel, PlateSet, PlateSetBuilder};
use htsbayes::sampler::Traces;
use htsbayes::simgen::Truth;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub fn write_records<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize()
        .map(|row| row.with_context(|| format!("reading {}", path.display())))
        .collect()
}

// ---------------------------------------------------------------------------
// Raw plate readings.

/// One line of the plate file. `row`, `col` and `replicate` are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateRecord {
    pub plate_id: String,
    pub row: usize,
    pub col: usize,
    pub channel: String,
    pub replicate: usize,
    pub well_type: String,
    pub gene_id: String,
    pub shrna_id: String,
    pub value: f64,
}

const PLATE_HEADER: [&str; 9] = [
    "plate_id",
    "row",
    "col",
    "channel",
    "replicate",
    "well_type",
    "gene_id",
    "shrna_id",
    "value",
];

/// `well_type` is `shrna` or a control name (`SN`, `NTNP`, `NTWP`).
fn unit_kind(well_type: &str, shrna: &str, gene: &str) -> Result<UnitKind> {
    if well_type.eq_ignore_ascii_case("shrna") {
        if shrna.is_empty() {
            bail!("shRNA well without an shrna_id");
        }
        return Ok(UnitKind::Shrna {
            id: shrna.to_string(),
            gene: gene.to_string(),
        });
    }
    ControlKind::parse(well_type)
        .map(UnitKind::Control)
        .ok_or_else(|| anyhow!("unknown well_type {well_type:?}"))
}

/// Read a plate file into a [`PlateSet`]. Errors name the offending line.
pub fn load_plate_file(path: &Path, geometry: Option<(usize, usize)>) -> Result<PlateSet> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let found: Vec<&str> = headers.iter().map(str::trim).collect();
    if found != PLATE_HEADER {
        bail!(
            "{}: header must be {}, found {}",
            path.display(),
            PLATE_HEADER.join(","),
            found.join(",")
        );
    }
    let mut builder = PlateSetBuilder::new();
    for record in reader.records() {
        let record = record.with_context(|| format!("reading {}", path.display()))?;
        let line = record.position().map_or(0, |p| p.line());
        let at = || format!("{} line {line}", path.display());
        let r: PlateRecord = record.deserialize(Some(&headers)).with_context(at)?;
        if r.row == 0 || r.col == 0 || r.replicate == 0 {
            return Err(anyhow!("row, col and replicate are 1-based")).with_context(at);
        }
        let channel = Channel::parse(&r.channel)
            .ok_or_else(|| anyhow!("unknown channel {:?}", r.channel))
            .with_context(at)?;
        let kind = unit_kind(&r.well_type, &r.shrna_id, &r.gene_id).with_context(at)?;
        builder
            .add(
                &r.plate_id,
                r.row - 1,
                r.col - 1,
                channel,
                r.replicate - 1,
                kind,
                r.value,
            )
            .with_context(at)?;
    }
    Ok(builder.build(geometry)?)
}

pub fn write_plate_file(path: &Path, set: &PlateSet) -> Result<()> {
    let mut rows = Vec::new();
    for (plate, well) in set.wells() {
        let (well_type, shrna, gene) = match &well.kind {
            UnitKind::Shrna { id, gene } => ("shrna".to_string(), id.clone(), gene.clone()),
            UnitKind::Control(k) => (k.as_str().to_string(), String::new(), String::new()),
        };
        for c in Channel::BOTH {
            for (r, v) in well.channel(c).iter().enumerate() {
                rows.push(PlateRecord {
                    plate_id: plate.id.clone(),
                    row: well.row + 1,
                    col: well.col + 1,
                    channel: c.as_str().to_string(),
                    replicate: r + 1,
                    well_type: well_type.clone(),
                    gene_id: gene.clone(),
                    shrna_id: shrna.clone(),
                    value: *v,
                });
            }
        }
    }
    write_records(path, &rows)
}

// ---------------------------------------------------------------------------
// Log-scale screen data, one row per unit and replicate.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenRecord {
    pub unit: String,
    /// `shrna` or a control name.
    pub kind: String,
    pub shrna_id: String,
    pub gene_id: String,
    pub plate_id: String,
    pub row: Option<usize>,
    pub col: Option<usize>,
    pub anchor: bool,
    pub replicate: usize,
    pub x: f64,
    pub y: f64,
}

pub fn write_screen(path: &Path, data: &ScreenData) -> Result<()> {
    let mut rows = Vec::with_capacity(data.n_units() * data.n_replicates());
    for (i, u) in data.units().iter().enumerate() {
        let (kind, shrna, gene) = match &u.kind {
            UnitKind::Shrna { id, gene } => ("shrna".to_string(), id.clone(), gene.clone()),
            UnitKind::Control(k) => (k.as_str().to_string(), String::new(), String::new()),
        };
        for (j, (x, y)) in data.x_row(i).iter().zip(data.y_row(i)).enumerate() {
            rows.push(ScreenRecord {
                unit: u.name.clone(),
                kind: kind.clone(),
                shrna_id: shrna.clone(),
                gene_id: gene.clone(),
                plate_id: u
                    .position
                    .as_ref()
                    .map_or(String::new(), |p| p.plate.clone()),
                row: u.position.as_ref().map(|p| p.row + 1),
                col: u.position.as_ref().map(|p| p.col + 1),
                anchor: u.anchor,
                replicate: j + 1,
                x: *x,
                y: *y,
            });
        }
    }
    write_records(path, &rows)
}

/// Rows of one unit must be consecutive with replicates `1..=J` in order.
pub fn read_screen(path: &Path) -> Result<ScreenData> {
    let rows: Vec<ScreenRecord> = read_records(path)?;
    let mut units = Vec::new();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut reps: Option<usize> = None;
    let mut k = 0;
    while k < rows.len() {
        let first = &rows[k];
        let mut end = k;
        while end < rows.len() && rows[end].unit == first.unit {
            if rows[end].replicate != end - k + 1 {
                bail!(
                    "{} data line {}: unit {} replicate {} out of order",
                    path.display(),
                    end + 2,
                    first.unit,
                    rows[end].replicate
                );
            }
            xs.push(rows[end].x);
            ys.push(rows[end].y);
            end += 1;
        }
        let j = end - k;
        if *reps.get_or_insert(j) != j {
            bail!(
                "{}: unit {} has {j} replicates, earlier units have {}",
                path.display(),
                first.unit,
                reps.unwrap_or(0)
            );
        }
        let kind = unit_kind(&first.kind, &first.shrna_id, &first.gene_id)
            .with_context(|| format!("{} unit {}", path.display(), first.unit))?;
        let position = match (first.row, first.col) {
            (Some(r), Some(c)) if r > 0 && c > 0 => Some(WellPosition {
                plate: first.plate_id.clone(),
                row: r - 1,
                col: c - 1,
            }),
            (None, None) => None,
            _ => bail!(
                "{}: unit {} has a partial position",
                path.display(),
                first.unit
            ),
        };
        units.push(Unit {
            name: first.unit.clone(),
            kind,
            position,
            anchor: first.anchor,
        });
        k = end;
    }
    let reps = reps.ok_or_else(|| anyhow!("{} holds no units", path.display()))?;
    Ok(ScreenData::new(units, reps, xs, ys)?)
}

// ---------------------------------------------------------------------------
// Posterior summaries.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub unit: String,
    pub null_prob: f64,
    pub active_beta: Option<f64>,
    pub mu_mean: f64,
}

pub fn write_summaries(path: &Path, units: &[Unit], s: &[UnitSummary]) -> Result<()> {
    let rows: Vec<SummaryRecord> = units
        .iter()
        .zip(s)
        .map(|(u, s)| SummaryRecord {
            unit: u.name.clone(),
            null_prob: s.null_prob,
            active_beta: s.active_beta,
            mu_mean: s.mu_mean,
        })
        .collect();
    write_records(path, &rows)
}

/// Summaries aligned to `units` by name.
pub fn read_summaries(path: &Path, units: &[Unit]) -> Result<Vec<UnitSummary>> {
    let rows: Vec<SummaryRecord> = read_records(path)?;
    let by_name: BTreeMap<&str, &SummaryRecord> =
        rows.iter().map(|r| (r.unit.as_str(), r)).collect();
    if by_name.len() != rows.len() {
        bail!("{} lists a unit twice", path.display());
    }
    if rows.len() != units.len() {
        bail!(
            "{} has {} units, the screen has {}",
            path.display(),
            rows.len(),
            units.len()
        );
    }
    units
        .iter()
        .map(|u| {
            let r = by_name
                .get(u.name.as_str())
                .ok_or_else(|| anyhow!("{} has no row for unit {}", path.display(), u.name))?;
            Ok(UnitSummary {
                null_prob: r.null_prob,
                active_beta: r.active_beta,
                mu_mean: r.mu_mean,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Simulation truth and method scores.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub unit: String,
    pub gamma: bool,
    pub beta: f64,
    pub mu: f64,
    pub sigma2_x: f64,
    pub sigma2_y: f64,
}

pub fn write_truth(path: &Path, units: &[Unit], t: &Truth) -> Result<()> {
    let rows: Vec<TruthRecord> = units
        .iter()
        .enumerate()
        .map(|(i, u)| TruthRecord {
            unit: u.name.clone(),
            gamma: t.gamma[i],
            beta: t.beta[i],
            mu: t.mu[i],
            sigma2_x: t.sigma2_x[i],
            sigma2_y: t.sigma2_y[i],
        })
        .collect();
    write_records(path, &rows)
}

pub fn read_truth(path: &Path) -> Result<(Vec<String>, Truth)> {
    let rows: Vec<TruthRecord> = read_records(path)?;
    let names = rows.iter().map(|r| r.unit.clone()).collect();
    let t = Truth {
        gamma: rows.iter().map(|r| r.gamma).collect(),
        beta: rows.iter().map(|r| r.beta).collect(),
        mu: rows.iter().map(|r| r.mu).collect(),
        sigma2_x: rows.iter().map(|r| r.sigma2_x).collect(),
        sigma2_y: rows.iter().map(|r| r.sigma2_y).collect(),
    };
    Ok((names, t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub unit: String,
    pub score: f64,
}

/// Scores keyed by unit name. A summary file is also accepted, scored by
/// `1 - null_prob`.
pub fn read_scores(path: &Path) -> Result<BTreeMap<String, f64>> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let is_summary = reader.headers()?.iter().any(|h| h == "null_prob");
    drop(reader);
    let pairs: Vec<(String, f64)> = if is_summary {
        read_records::<SummaryRecord>(path)?
            .into_iter()
            .map(|r| (r.unit, 1.0 - r.null_prob))
            .collect()
    } else {
        read_records::<ScoreRecord>(path)?
            .into_iter()
            .map(|r| (r.unit, r.score))
            .collect()
    };
    let n = pairs.len();
    let map: BTreeMap<String, f64> = pairs.into_iter().collect();
    if map.len() != n {
        bail!("{} lists a unit twice", path.display());
    }
    Ok(map)
}

// ---------------------------------------------------------------------------
// Draw traces: one row per retained iteration, one column per scalar.

pub fn write_traces(path: &Path, traces: &Traces) -> Result<()> {
    let cols = traces.columns();
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header = vec!["draw".to_string()];
    header.extend(cols.iter().map(|(n, _)| n.clone()));
    w.write_record(&header)?;
    for t in 0..traces.len() {
        let mut row = vec![t.to_string()];
        row.extend(cols.iter().map(|(_, c)| c[t].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns by name, in file order, without the draw index.
pub fn read_traces(path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let names: Vec<String> = r.headers()?.iter().skip(1).map(str::to_string).collect();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for rec in r.records() {
        let rec = rec?;
        for (c, field) in cols.iter_mut().zip(rec.iter().skip(1)) {
            c.push(
                field
                    .parse()
                    .with_context(|| format!("{}: bad number {field:?}", path.display()))?,
            );
        }
    }
    Ok(names.into_iter().zip(cols).collect())
}

// ---------------------------------------------------------------------------
// Report and evaluation tables.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitRecord {
    pub rank: usize,
    pub unit: String,
    pub gene: Option<String>,
    pub null_prob: f64,
    pub activity_prob: f64,
    pub active_beta: Option<f64>,
    pub mu_mean: f64,
    pub activity: String,
    pub viability: String,
    pub cumulative_pfdr: f64,
    pub hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListRecord {
    pub rank: usize,
    pub unit: String,
    pub gene: Option<String>,
    pub null_prob: f64,
    pub cumulative_pfdr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolcanoRecord {
    pub unit: String,
    pub active_beta: Option<f64>,
    pub activity_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpcRecord {
    pub draw: usize,
    pub realized: f64,
    pub predictive: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhatRecord {
    pub parameter: String,
    /// Empty when the diagnostic is undefined.
    pub rhat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocRecord {
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdrRecord {
    pub desired: f64,
    pub actual: f64,
    pub selected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRecord {
    pub quantity: String,
    pub pearson: f64,
    pub units: usize,
}
