//! Network shapes, conv reshaping, block partitioning and depth adjustment.

mod adjust;
mod layers;
mod partition;

pub use adjust::{adjust_depths, choose_delta, slack, AdjustedNetwork, DepthAdjustment};
pub use layers::{reshape_conv, weight_shape, LayerKind, LayerSpec, Network, NETWORK_SCHEMA_VERSION};
pub use partition::{partition, Cluster, WeightMatrix};
