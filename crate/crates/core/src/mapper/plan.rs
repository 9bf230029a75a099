use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{GoaError, Result};
use crate::photonic::GoaArch;

pub const PLAN_SCHEMA_VERSION: u32 = 1;

/// Module footprint of one weight matrix before rotation.
///
/// `block_rows` (output chunks) become grid columns and `block_cols` (input
/// chunks) become grid rows once the cluster is rotated onto the grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterShape {
    pub id: usize,
    pub layer: usize,
    pub rows: usize,
    pub cols: usize,
    pub block_rows: usize,
    pub block_cols: usize,
    /// Block rows implemented as two-module restored pairs, ascending.
    #[serde(default)]
    pub restored: Vec<usize>,
}

impl ClusterShape {
    pub fn new(id: usize, layer: usize, rows: usize, cols: usize, k: usize) -> Self {
        Self {
            id,
            layer,
            rows,
            cols,
            block_rows: rows.div_ceil(k),
            block_cols: cols.div_ceil(k),
            restored: Vec::new(),
        }
    }

    /// Grid columns needed after rotation, one extra per restored block row.
    pub fn width(&self) -> usize {
        self.block_rows + self.restored.len()
    }

    pub fn height(&self) -> usize {
        self.block_cols
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn is_restored(&self, block_row: usize) -> bool {
        self.restored.binary_search(&block_row).is_ok()
    }
}

/// What a grid module does for the placement that owns it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModuleRole {
    /// Single `UΣ` module for block `(block_row, block_col)`.
    Single { block_row: usize, block_col: usize },
    /// First module of a restored pair (`V*`), passes light to its right neighbour.
    RestoreFirst { block_row: usize, block_col: usize },
    /// Second module of a restored pair (`U Σ_svd`), accumulates downwards.
    RestoreSecond { block_row: usize, block_col: usize },
}

impl ModuleRole {
    pub fn block(&self) -> (usize, usize) {
        match *self {
            ModuleRole::Single {
                block_row,
                block_col,
            }
            | ModuleRole::RestoreFirst {
                block_row,
                block_col,
            }
            | ModuleRole::RestoreSecond {
                block_row,
                block_col,
            } => (block_row, block_col),
        }
    }
}

/// One segment of a cluster placed on the grid during one pass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub cluster: usize,
    pub layer: usize,
    pub pass: usize,
    pub segment: usize,
    pub origin_row: usize,
    pub origin_col: usize,
    /// Grid rows covered (= block columns in this segment).
    pub height: usize,
    /// Grid columns covered (= block rows plus restored extras).
    pub width: usize,
    /// First block column carried by this segment.
    pub block_col_start: usize,
    #[serde(default)]
    pub restored: Vec<usize>,
}

impl Placement {
    pub fn block_cols(&self) -> std::ops::Range<usize> {
        self.block_col_start..self.block_col_start + self.height
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        (self.origin_row..self.origin_row + self.height).contains(&row)
            && (self.origin_col..self.origin_col + self.width).contains(&col)
    }

    /// Grid column holding block row `block_row` (the `V*` module when restored).
    pub fn grid_column_of(&self, block_row: usize) -> usize {
        let shift = self.restored.iter().take_while(|&&r| r < block_row).count();
        self.origin_col + block_row + shift
    }

    /// Role of grid module `(row, col)` if it belongs to this placement.
    pub fn role_at(&self, row: usize, col: usize) -> Option<ModuleRole> {
        if !self.contains(row, col) {
            return None;
        }
        let block_col = self.block_col_start + (row - self.origin_row);
        let mut offset = col - self.origin_col;
        let mut block_row = 0;
        loop {
            let restored = self.restored.binary_search(&block_row).is_ok();
            match (offset, restored) {
                (0, false) => {
                    return Some(ModuleRole::Single {
                        block_row,
                        block_col,
                    })
                }
                (0, true) => {
                    return Some(ModuleRole::RestoreFirst {
                        block_row,
                        block_col,
                    })
                }
                (1, true) => {
                    return Some(ModuleRole::RestoreSecond {
                        block_row,
                        block_col,
                    })
                }
                (o, true) => offset = o - 2,
                (o, false) => offset = o - 1,
            }
            block_row += 1;
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.origin_row..self.origin_row + self.height).flat_map(move |r| {
            (self.origin_col..self.origin_col + self.width).map(move |c| (r, c))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingPlan {
    pub schema_version: u32,
    pub arch: GoaArch,
    pub clusters: Vec<ClusterShape>,
    pub passes: Vec<Vec<Placement>>,
    pub mapping_cost: usize,
    pub eo_conversions: usize,
}

impl MappingPlan {
    pub fn segments_of(&self, cluster: usize) -> Vec<&Placement> {
        let mut segs: Vec<&Placement> = self
            .passes
            .iter()
            .flatten()
            .filter(|p| p.cluster == cluster)
            .collect();
        segs.sort_by_key(|p| p.segment);
        segs
    }

    /// Modules occupied in `pass`.
    pub fn occupied_modules(&self, pass: usize) -> usize {
        self.passes
            .get(pass)
            .map_or(0, |ps| ps.iter().map(|p| p.height * p.width).sum())
    }

    /// Fraction of module slots (and therefore MZIs) programmed, averaged over passes.
    pub fn utilization(&self) -> f64 {
        if self.passes.is_empty() {
            return 0.0;
        }
        let slots = self.arch.m * self.arch.n;
        let used: usize = (0..self.passes.len()).map(|p| self.occupied_modules(p)).sum();
        used as f64 / (slots * self.passes.len()) as f64
    }

    /// Checks bounds, overlap, segment coverage and the derived totals.
    pub fn validate(&self) -> Result<()> {
        let (m, n) = (self.arch.m, self.arch.n);
        for (pass_idx, pass) in self.passes.iter().enumerate() {
            let mut grid = vec![false; m * n];
            for p in pass {
                if p.pass != pass_idx {
                    return Err(GoaError::Placement(format!(
                        "placement of cluster {} records pass {} but sits in pass {pass_idx}",
                        p.cluster, p.pass
                    )));
                }
                if p.height == 0 || p.width == 0 {
                    return Err(GoaError::Placement(format!(
                        "empty segment for cluster {}",
                        p.cluster
                    )));
                }
                if p.origin_row + p.height > m || p.origin_col + p.width > n {
                    return Err(GoaError::Placement(format!(
                        "segment {} of cluster {} leaves the {m}x{n} grid",
                        p.segment, p.cluster
                    )));
                }
                for (r, c) in p.cells() {
                    if std::mem::replace(&mut grid[r * n + c], true) {
                        return Err(GoaError::Placement(format!(
                            "module ({r}, {c}) used twice in pass {pass_idx}"
                        )));
                    }
                }
            }
        }
        let mut conversions = 0;
        for (idx, shape) in self.clusters.iter().enumerate() {
            if shape.id != idx {
                return Err(GoaError::Placement(format!(
                    "cluster at index {idx} carries id {}",
                    shape.id
                )));
            }
            let segs = self.segments_of(idx);
            if segs.is_empty() && shape.block_cols > 0 && shape.block_rows > 0 {
                return Err(GoaError::Placement(format!("cluster {idx} is not placed")));
            }
            let mut covered = BTreeSet::new();
            for (i, s) in segs.iter().enumerate() {
                if s.segment != i || s.width != shape.width() || s.restored != shape.restored {
                    return Err(GoaError::Placement(format!(
                        "segment {i} of cluster {idx} disagrees with the cluster shape"
                    )));
                }
                for bc in s.block_cols() {
                    if !covered.insert(bc) {
                        return Err(GoaError::Placement(format!(
                            "block column {bc} of cluster {idx} placed twice"
                        )));
                    }
                }
            }
            if covered.len() != shape.block_cols || covered.iter().any(|&c| c >= shape.block_cols)
            {
                return Err(GoaError::Placement(format!(
                    "segments of cluster {idx} do not cover its {} block columns",
                    shape.block_cols
                )));
            }
            conversions += segs.len().saturating_sub(1);
        }
        if self.mapping_cost != self.passes.len() {
            return Err(GoaError::Placement(format!(
                "mapping cost {} but {} passes",
                self.mapping_cost,
                self.passes.len()
            )));
        }
        if self.eo_conversions != conversions {
            return Err(GoaError::Placement(format!(
                "plan records {} E/O conversions, segments imply {conversions}",
                self.eo_conversions
            )));
        }
        Ok(())
    }
}

/// Number of passes (reprogrammings of the grid) the plan needs.
pub fn mapping_cost(plan: &MappingPlan) -> usize {
    plan.passes.len()
}

/// Partial-sum recombinations: one per extra segment of every cluster.
pub fn eo_conversions(plan: &MappingPlan) -> usize {
    (0..plan.clusters.len())
        .map(|c| plan.segments_of(c).len().saturating_sub(1))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn placement(restored: Vec<usize>, block_rows: usize) -> Placement {
        Placement {
            cluster: 0,
            layer: 0,
            pass: 0,
            segment: 0,
            origin_row: 2,
            origin_col: 1,
            height: 2,
            width: block_rows + restored.len(),
            block_col_start: 3,
            restored,
        }
    }

    #[test]
    fn roles_without_restoration() {
        let p = placement(vec![], 3);
        assert_eq!(
            p.role_at(2, 1),
            Some(ModuleRole::Single {
                block_row: 0,
                block_col: 3
            })
        );
        assert_eq!(
            p.role_at(3, 3),
            Some(ModuleRole::Single {
                block_row: 2,
                block_col: 4
            })
        );
        assert_eq!(p.role_at(4, 1), None);
        assert_eq!(p.role_at(2, 4), None);
    }

    #[test]
    fn roles_with_restored_rows() {
        let p = placement(vec![1], 3);
        assert_eq!(p.width, 4);
        let roles: Vec<_> = (1..5).map(|c| p.role_at(2, c).unwrap()).collect();
        assert_eq!(
            roles,
            vec![
                ModuleRole::Single {
                    block_row: 0,
                    block_col: 3
                },
                ModuleRole::RestoreFirst {
                    block_row: 1,
                    block_col: 3
                },
                ModuleRole::RestoreSecond {
                    block_row: 1,
                    block_col: 3
                },
                ModuleRole::Single {
                    block_row: 2,
                    block_col: 3
                },
            ]
        );
        assert_eq!(p.grid_column_of(0), 1);
        assert_eq!(p.grid_column_of(1), 2);
        assert_eq!(p.grid_column_of(2), 4);
    }

    #[test]
    fn shape_dimensions() {
        let s = ClusterShape::new(0, 6, 256, 2304, 63);
        assert_eq!((s.block_rows, s.block_cols), (5, 37));
        assert_eq!(s.width(), 5);
        assert_eq!(s.height(), 37);
    }
}
