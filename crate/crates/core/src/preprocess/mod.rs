//! Raw plate readings to log-scale [`ScreenData`](crate::ScreenData).
//!
//! Stages, in order: control outlier deletion, edge-effect adjustment,
//! control-anchored piecewise-linear plate normalization, replicate outlier
//! removal and the natural-log transform. Every stage is deterministic and
//! independent of the order in which plates are supplied.

mod edge;
mod normalize;
mod outliers;
mod pipeline;
mod plates;

pub use edge::{adjust_edge_effect, edge_group, EdgeAdjustment, EdgeGroup, EdgeMode};
pub use normalize::{
    designate_anchors, normalize_plate, normalize_plates, plate_anchors, Anchors, PiecewiseMap,
    PlateNormalization,
};
pub use outliers::{
    delete_control_outliers, remove_unit_outliers, replicate_ratio, ControlDeletion, UnitExclusion,
};
pub use pipeline::{run_pipeline, PreprocessConfig, ProvenanceReport};
pub use plates::{Channel, Plate, PlateSet, PlateSetBuilder, Well};
