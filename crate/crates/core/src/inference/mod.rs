//! Post-processing of sampler output: per-unit summaries, hit calls,
//! posterior false detection rate lists, predictive checks, the Z-score
//! baseline and comparisons between runs.

mod classify;
mod compare;
mod pfdr;
mod ppc;
mod report;
mod summary;
mod zscore;

pub use classify::{
    classify, viability_range, ActivityFlag, HitThresholds, ViabilityFlag, ViabilityRange,
};
pub use compare::{compare_runs, RunCorrelation};
pub use pfdr::{cumulative_pfdr, pfdr_list, rank_units, ListMode, PfdrList};
pub use ppc::{
    bayesian_p_value, discrepancy, posterior_predictive_check, PpcResult, PredictivePair,
};
pub use report::{
    gene_rollup, list_summary, FixRateRow, FixSizeRow, HitReport, HitRow, ListSummary,
};
pub use summary::{summarize, summarize_chains, summarize_snapshots, UnitSummary};
pub use zscore::{zscore_baseline, SdConvention, UnitZ};
