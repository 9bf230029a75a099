use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GoaError, Result};
use crate::mapper::{ClusterShape, MappingPlan};

/// One module column of a cluster: every block sharing `block_row`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ColumnRef {
    pub cluster: usize,
    pub block_row: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnError {
    pub column: ColumnRef,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RestorationSelection {
    /// Descending by accumulated error.
    pub columns: Vec<ColumnError>,
    /// Set when fewer admissible columns existed than the budget asked for.
    #[serde(default)]
    pub shortfall: bool,
}

impl RestorationSelection {
    pub fn refs(&self) -> Vec<ColumnRef> {
        self.columns.iter().map(|c| c.column).collect()
    }
}

/// Sums block residuals per module column and orders the columns by
/// decreasing total. `residuals[c]` is `block_rows × block_cols` for cluster `c`.
pub fn rank_columns(
    shapes: &[ClusterShape],
    residuals: &[DMatrix<f64>],
) -> Result<RestorationSelection> {
    if shapes.len() != residuals.len() {
        return Err(GoaError::DimensionMismatch {
            context: "residual tables per cluster",
            expected: shapes.len(),
            actual: residuals.len(),
        });
    }
    let mut columns = Vec::new();
    for (shape, res) in shapes.iter().zip(residuals) {
        if res.shape() != (shape.block_rows, shape.block_cols) {
            return Err(GoaError::DimensionMismatch {
                context: "residual table size",
                expected: shape.block_rows * shape.block_cols,
                actual: res.len(),
            });
        }
        for block_row in 0..shape.block_rows {
            columns.push(ColumnError {
                column: ColumnRef {
                    cluster: shape.id,
                    block_row,
                },
                error: res.row(block_row).sum(),
            });
        }
    }
    columns.sort_by(|a, b| b.error.total_cmp(&a.error));
    Ok(RestorationSelection {
        columns,
        shortfall: false,
    })
}

/// Takes the highest-error columns whose cluster still has a free module
/// column to its right in every segment; columns at the grid edge are skipped.
pub fn select_restorations(
    ranking: &RestorationSelection,
    budget: usize,
    plan: &MappingPlan,
) -> Result<RestorationSelection> {
    let n = plan.arch.n;
    let mut extra: Vec<usize> = plan.clusters.iter().map(|c| c.restored.len()).collect();
    let mut picked = Vec::new();
    for entry in &ranking.columns {
        if picked.len() == budget {
            break;
        }
        let ColumnRef { cluster, block_row } = entry.column;
        let shape = plan.clusters.get(cluster).ok_or_else(|| {
            GoaError::InvalidConfig(format!("ranking names unknown cluster {cluster}"))
        })?;
        if block_row >= shape.block_rows || shape.is_restored(block_row) {
            continue;
        }
        let width = shape.block_rows + extra[cluster];
        let segments = plan.segments_of(cluster);
        if segments.is_empty() || segments.iter().any(|p| p.origin_col + width + 1 > n) {
            continue;
        }
        extra[cluster] += 1;
        picked.push(*entry);
    }
    Ok(RestorationSelection {
        shortfall: picked.len() < budget,
        columns: picked,
    })
}

/// Cluster shapes widened by the selected restorations.
pub fn apply_restorations(
    shapes: &[ClusterShape],
    selection: &RestorationSelection,
) -> Vec<ClusterShape> {
    let mut out = shapes.to_vec();
    for c in &selection.columns {
        if let Some(s) = out.get_mut(c.column.cluster) {
            if let Err(pos) = s.restored.binary_search(&c.column.block_row) {
                s.restored.insert(pos, c.column.block_row);
            }
        }
    }
    out
}
