//! Reference model of a single monolithic interleaved MZI array, used to
//! quantify what the modular grid saves.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{GoaError, Result};
use crate::photonic::mesh::{column_ports, mesh_mzi_count};

/// MZI usage when a `unitary_size` unitary sits in the top-left corner of an
/// `array_size`-port rectangular mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WasteReport {
    pub array_size: usize,
    pub unitary_size: usize,
    pub total: usize,
    /// MZIs that implement the unitary.
    pub used: usize,
    /// MZIs on the light paths of the used inputs that must still be programmed.
    pub affected: usize,
    /// MZIs no input light reaches.
    pub untouched: usize,
}

/// Counts MZIs reached by light entering ports `0..ports` of an `s`-port mesh.
pub(crate) fn light_cone_mzis(ports: usize, s: usize) -> usize {
    let mut lit: Vec<bool> = (0..s).map(|p| p < ports).collect();
    let mut count = 0;
    for col in 0..s {
        for p in column_ports(s, col) {
            if lit[p] || lit[p + 1] {
                count += 1;
                lit[p] = true;
                lit[p + 1] = true;
            }
        }
    }
    count
}

pub fn interleaving_waste(unitary_size: usize, array_size: usize) -> Result<WasteReport> {
    if unitary_size > array_size {
        return Err(GoaError::ExceedsArray {
            rows: unitary_size,
            cols: unitary_size,
            size: array_size,
        });
    }
    let total = mesh_mzi_count(array_size);
    let used = mesh_mzi_count(unitary_size);
    let cone = light_cone_mzis(unitary_size, array_size);
    Ok(WasteReport {
        array_size,
        unitary_size,
        total,
        used,
        affected: cone - used,
        untouched: total - cone,
    })
}

/// Largest port count whose mesh fits in `budget` MZIs.
pub fn array_size_for_budget(budget: usize) -> usize {
    let mut s = ((2.0 * budget as f64).sqrt() as usize).max(1) + 1;
    while mesh_mzi_count(s) > budget {
        s -= 1;
    }
    s
}

/// MZIs for an `rows × cols` matrix in SVD form, `⌈(M² + N²)/2⌉`.
pub fn svd_form_mzis(rows: usize, cols: usize) -> usize {
    (rows * rows + cols * cols).div_ceil(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMode {
    /// Every matrix must fit the array in one pass.
    Strict,
    /// Oversized matrices are cut into the largest square tiles that fit, one tile per pass.
    Tiled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub array_size: usize,
    pub array_mzis: usize,
    pub mapping_cost: usize,
    pub used_mzis: usize,
    /// Unused MZIs summed over all passes.
    pub wasted_mzis: usize,
    /// Unused MZIs that still sit on signal paths and must be programmed.
    pub affected_mzis: usize,
    pub utilization: f64,
}

fn fits(rows: usize, cols: usize, s: usize) -> bool {
    rows.max(cols) <= s && svd_form_mzis(rows, cols) <= mesh_mzi_count(s)
}

/// Maps every matrix alone (one pass per matrix or tile) onto one interleaved
/// array sized from `mzi_budget`.
pub fn interleaving_baseline_cost(
    matrices: &[(usize, usize)],
    mzi_budget: usize,
    mode: BaselineMode,
) -> Result<BaselineReport> {
    let s = array_size_for_budget(mzi_budget);
    let total = mesh_mzi_count(s);
    let tile = (1..=s).rev().find(|&t| fits(t, t, s)).unwrap_or(0);
    let mut passes = 0;
    let mut used = 0;
    let mut affected = 0;
    let mut cones: HashMap<usize, usize> = HashMap::new();
    let mut run_pass = |r: usize, c: usize| {
        let u = svd_form_mzis(r, c);
        let cone = *cones
            .entry(r.max(c))
            .or_insert_with(|| light_cone_mzis(r.max(c), s));
        passes += 1;
        used += u;
        affected += cone.saturating_sub(u);
    };
    for &(rows, cols) in matrices {
        if rows == 0 || cols == 0 {
            continue;
        }
        if fits(rows, cols, s) {
            run_pass(rows, cols);
            continue;
        }
        if mode == BaselineMode::Strict || tile == 0 {
            return Err(GoaError::ExceedsArray { rows, cols, size: s });
        }
        for r0 in (0..rows).step_by(tile) {
            for c0 in (0..cols).step_by(tile) {
                run_pass(tile.min(rows - r0), tile.min(cols - c0));
            }
        }
    }
    let wasted = passes * total - used;
    Ok(BaselineReport {
        array_size: s,
        array_mzis: total,
        mapping_cost: passes,
        used_mzis: used,
        wasted_mzis: wasted,
        affected_mzis: affected,
        utilization: if passes == 0 {
            0.0
        } else {
            used as f64 / (passes * total) as f64
        },
    })
}
