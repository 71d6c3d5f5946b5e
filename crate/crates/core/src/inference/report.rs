use std::collections::BTreeMap;

use super::classify::{classify, ActivityFlag, HitThresholds, ViabilityFlag, ViabilityRange};
use super::pfdr::{cumulative_pfdr, pfdr_list, rank_units, ListMode, PfdrList};
use super::summary::UnitSummary;
use crate::error::{Error, Result};
use crate::model::Unit;

/// One unit of a hit report.
#[derive(Debug, Clone, PartialEq)]
pub struct HitRow {
    pub unit: usize,
    pub name: String,
    pub gene: Option<String>,
    pub summary: UnitSummary,
    pub activity: ActivityFlag,
    pub viability: ViabilityFlag,
    /// 1-based position in the ranking by `p_i`.
    pub rank: usize,
    /// PFDR of the list made of this unit and all units ranked above it.
    pub cumulative_pfdr: f64,
}

/// Every unit, ranked by `p_i`, with activity and viability calls.
#[derive(Debug, Clone, PartialEq)]
pub struct HitReport {
    pub rows: Vec<HitRow>,
    pub thresholds: HitThresholds,
    pub viability: ViabilityRange,
}

fn effects(summaries: &[UnitSummary]) -> Vec<f64> {
    summaries
        .iter()
        .map(|s| s.active_beta.unwrap_or(f64::NAN))
        .collect()
}

impl HitReport {
    pub fn build(
        units: &[Unit],
        summaries: &[UnitSummary],
        viability: ViabilityRange,
        thresholds: HitThresholds,
    ) -> Result<Self> {
        if units.len() != summaries.len() {
            return Err(Error::Shape(format!(
                "{} units but {} summaries",
                units.len(),
                summaries.len()
            )));
        }
        let p: Vec<f64> = summaries.iter().map(|s| s.null_prob).collect();
        let order = rank_units(&p, Some(&effects(summaries)));
        let cum = cumulative_pfdr(&p, &order);
        let rows = order
            .iter()
            .zip(cum)
            .enumerate()
            .map(|(k, (&i, cumulative_pfdr))| {
                let (activity, viability_flag) = classify(&summaries[i], &viability, &thresholds);
                HitRow {
                    unit: i,
                    name: units[i].name.clone(),
                    gene: units[i].kind.gene().map(str::to_string),
                    summary: summaries[i],
                    activity,
                    viability: viability_flag,
                    rank: k + 1,
                    cumulative_pfdr,
                }
            })
            .collect();
        Ok(Self {
            rows,
            thresholds,
            viability,
        })
    }

    /// Rows called as changing activity with normal viability.
    pub fn hits(&self) -> impl Iterator<Item = &HitRow> {
        self.rows
            .iter()
            .filter(|r| r.activity.is_change() && r.viability == ViabilityFlag::Normal)
    }
}

/// Gene key of a unit: its target gene, or its own name when it has none.
fn gene_key(u: &Unit) -> String {
    u.kind.gene().map_or_else(|| u.name.clone(), str::to_string)
}

/// Number of listed units per target gene.
pub fn gene_rollup(units: &[Unit], listed: &[usize]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for &i in listed {
        *out.entry(gene_key(&units[i])).or_insert(0) += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixSizeRow {
    pub size: usize,
    pub pfdr: f64,
    pub genes: usize,
    pub units: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixRateRow {
    pub rate: f64,
    pub pfdr: f64,
    pub genes: usize,
    pub units: usize,
    /// Units-per-gene value mapped to the number of genes with that many.
    pub multiplicity: BTreeMap<usize, usize>,
}

/// Lists of candidate units at fixed sizes and at fixed PFDR levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ListSummary {
    pub candidates: usize,
    pub fix_size: Vec<FixSizeRow>,
    pub fix_rate: Vec<FixRateRow>,
}

/// Summarize ranked lists drawn from `candidates` (unit indices), as
/// PFDR at fixed list sizes and list sizes at fixed PFDR levels.
pub fn list_summary(
    units: &[Unit],
    summaries: &[UnitSummary],
    candidates: &[usize],
    sizes: &[usize],
    rates: &[f64],
) -> Result<ListSummary> {
    if units.len() != summaries.len() {
        return Err(Error::Shape("units and summaries differ in length".into()));
    }
    if let Some(&i) = candidates.iter().find(|&&i| i >= units.len()) {
        return Err(Error::Shape(format!("candidate {i} out of range")));
    }
    let p: Vec<f64> = candidates.iter().map(|&i| summaries[i].null_prob).collect();
    let e: Vec<f64> = candidates
        .iter()
        .map(|&i| summaries[i].active_beta.unwrap_or(f64::NAN))
        .collect();
    let to_units =
        |l: &PfdrList| -> Vec<usize> { l.units.iter().map(|&k| candidates[k]).collect() };

    let mut fix_size = Vec::with_capacity(sizes.len());
    for &k in sizes {
        let l = pfdr_list(&p, Some(&e), ListMode::FixSize(k))?;
        let listed = to_units(&l);
        fix_size.push(FixSizeRow {
            size: k,
            pfdr: l.pfdr,
            genes: gene_rollup(units, &listed).len(),
            units: listed.len(),
        });
    }
    let mut fix_rate = Vec::with_capacity(rates.len());
    for &rate in rates {
        let l = pfdr_list(&p, Some(&e), ListMode::FixRate(rate))?;
        let listed = to_units(&l);
        let genes = gene_rollup(units, &listed);
        let mut multiplicity = BTreeMap::new();
        for &count in genes.values() {
            *multiplicity.entry(count).or_insert(0) += 1;
        }
        fix_rate.push(FixRateRow {
            rate,
            pfdr: l.pfdr,
            genes: genes.len(),
            units: listed.len(),
            multiplicity,
        });
    }
    Ok(ListSummary {
        candidates: candidates.len(),
        fix_size,
        fix_rate,
    })
}
