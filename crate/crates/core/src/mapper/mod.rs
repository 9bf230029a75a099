//! Packing of weight clusters onto the module grid.

pub mod baseline;
mod pack;
mod plan;

pub use baseline::{
    array_size_for_budget, interleaving_baseline_cost, interleaving_waste, svd_form_mzis,
    BaselineMode, BaselineReport, WasteReport,
};
pub use pack::{pack, pack_monotone};
pub use plan::{
    eo_conversions, mapping_cost, ClusterShape, MappingPlan, ModuleRole, Placement,
    PLAN_SCHEMA_VERSION,
};
