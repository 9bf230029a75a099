//! Compiling partitioned weights into module programs and running them on
//! the grid through a mapping plan.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::approx::{approx_module, program_for_approx, restore_pair};
use crate::error::{GoaError, Result};
use crate::mapper::{ClusterShape, MappingPlan, ModuleRole, Placement};
use crate::photonic::{simulate_goa, GoaArch, MeshProgram, ModuleGrid, Route};
use crate::workload::Cluster;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockProgram {
    Single { program: MeshProgram },
    Restored { first: MeshProgram, second: MeshProgram },
}

/// Programs for every block of one cluster, row-major over `(block_row, block_col)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterPrograms {
    pub shape: ClusterShape,
    pub blocks: Vec<BlockProgram>,
}

impl ClusterPrograms {
    pub fn block(&self, block_row: usize, block_col: usize) -> &BlockProgram {
        &self.blocks[block_row * self.shape.block_cols + block_col]
    }
}

/// Approximates every block as `UΣ`, except block rows listed as restored,
/// which get exact two-module programs.
pub fn compile_cluster(cluster: &Cluster, shape: &ClusterShape) -> Result<ClusterPrograms> {
    if (cluster.rows_mod, cluster.cols_mod) != (shape.block_rows, shape.block_cols) {
        return Err(GoaError::DimensionMismatch {
            context: "cluster blocks vs shape",
            expected: shape.block_rows * shape.block_cols,
            actual: cluster.blocks.len(),
        });
    }
    let mut blocks = Vec::with_capacity(cluster.blocks.len());
    for br in 0..cluster.rows_mod {
        for bc in 0..cluster.cols_mod {
            let w = cluster.block(br, bc);
            blocks.push(if shape.is_restored(br) {
                let (first, second) = restore_pair(w)?;
                BlockProgram::Restored { first, second }
            } else {
                BlockProgram::Single {
                    program: program_for_approx(&approx_module(w)?)?,
                }
            });
        }
    }
    Ok(ClusterPrograms {
        shape: shape.clone(),
        blocks,
    })
}

/// Programs the modules of `placements` (all from one pass) and leaves the rest dark.
pub fn grid_for(
    arch: &GoaArch,
    placements: &[Placement],
    programs: &[ClusterPrograms],
) -> Result<ModuleGrid> {
    let mut grid = ModuleGrid::new(arch);
    for p in placements {
        let progs = programs.get(p.cluster).ok_or_else(|| {
            GoaError::Placement(format!("no programs for cluster {}", p.cluster))
        })?;
        for (row, col) in p.cells() {
            let role = p.role_at(row, col).expect("cell inside placement");
            let (br, bc) = role.block();
            let (program, route) = match (role, progs.block(br, bc)) {
                (ModuleRole::Single { .. }, BlockProgram::Single { program }) => {
                    (program.clone(), Route::Down)
                }
                (ModuleRole::RestoreFirst { .. }, BlockProgram::Restored { first, .. }) => {
                    (first.clone(), Route::Through)
                }
                (ModuleRole::RestoreSecond { .. }, BlockProgram::Restored { second, .. }) => {
                    (second.clone(), Route::Down)
                }
                _ => {
                    return Err(GoaError::Placement(format!(
                        "block ({br}, {bc}) of cluster {} disagrees with its restoration state",
                        p.cluster
                    )))
                }
            };
            grid.set(row, col, program, route)?;
        }
    }
    Ok(grid)
}

/// Grid column carrying the detected output of `block_row`.
fn output_column(p: &Placement, block_row: usize) -> usize {
    let c = p.grid_column_of(block_row);
    if p.restored.binary_search(&block_row).is_ok() {
        c + 1
    } else {
        c
    }
}

/// Runs one segment alone on the grid and returns its partial product
/// (length `block_rows · k`, padding included).
pub fn run_segment(
    arch: &GoaArch,
    placement: &Placement,
    programs: &[ClusterPrograms],
    x_padded: &[f64],
    row_wavelengths: Option<&[usize]>,
) -> Result<Vec<f64>> {
    let k = arch.k;
    let shape = &programs[placement.cluster].shape;
    let mut grid = grid_for(arch, std::slice::from_ref(placement), programs)?;
    if let Some(map) = row_wavelengths {
        grid.set_row_wavelengths(map.to_vec())?;
    }
    let mut input = vec![0.0; arch.input_width()];
    for (i, bc) in placement.block_cols().enumerate() {
        let r = placement.origin_row + i;
        input[r * k..(r + 1) * k].copy_from_slice(&x_padded[bc * k..(bc + 1) * k]);
    }
    let out = simulate_goa(arch, &grid, std::slice::from_ref(placement), &input)?;
    let mut y = vec![0.0; shape.block_rows * k];
    for br in 0..shape.block_rows {
        let c = output_column(placement, br);
        y[br * k..(br + 1) * k].copy_from_slice(&out[c * k..(c + 1) * k]);
    }
    Ok(y)
}

/// Computes `W·x` for one cluster by running all its segments and adding
/// the partial sums electrically.
pub fn run_cluster(
    plan: &MappingPlan,
    programs: &[ClusterPrograms],
    cluster: usize,
    x: &[f64],
) -> Result<Vec<f64>> {
    run_cluster_with(plan, programs, cluster, x, None)
}

/// As [`run_cluster`], with the grid rows tuned to `row_wavelengths`.
pub fn run_cluster_with(
    plan: &MappingPlan,
    programs: &[ClusterPrograms],
    cluster: usize,
    x: &[f64],
    row_wavelengths: Option<&[usize]>,
) -> Result<Vec<f64>> {
    let shape = plan
        .clusters
        .get(cluster)
        .ok_or_else(|| GoaError::Placement(format!("unknown cluster {cluster}")))?;
    if x.len() != shape.cols {
        return Err(GoaError::DimensionMismatch {
            context: "cluster input",
            expected: shape.cols,
            actual: x.len(),
        });
    }
    let k = plan.arch.k;
    let mut padded = x.to_vec();
    padded.resize(shape.block_cols * k, 0.0);
    let mut y = vec![0.0; shape.block_rows * k];
    for seg in plan.segments_of(cluster) {
        let part = run_segment(&plan.arch, seg, programs, &padded, row_wavelengths)?;
        for (acc, v) in y.iter_mut().zip(part) {
            *acc += v;
        }
    }
    y.truncate(shape.rows);
    Ok(y)
}

/// The matrix a compiled cluster is expected to realize: `UΣ` blocks, with
/// restored block rows left exact.
pub fn hardware_weights(cluster: &Cluster, shape: &ClusterShape) -> Result<DMatrix<f64>> {
    let mut c = cluster.clone();
    for br in 0..c.rows_mod {
        if shape.is_restored(br) {
            continue;
        }
        for bc in 0..c.cols_mod {
            let hw = approx_module(c.block(br, bc))?.hardware_matrix();
            *c.block_mut(br, bc) = hw;
        }
    }
    Ok(c.reassemble().values)
}
