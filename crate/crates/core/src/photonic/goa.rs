//! The module grid: `m × n` meshes whose outputs are dropped onto per-column
//! WDM buses by microrings and summed at the photodiodes.

use serde::{Deserialize, Serialize};

use super::mesh::{mesh_mzi_count, ComplexSignalVector, MeshProgram};
use super::mzi::C64;
use crate::error::{GoaError, Result};
use crate::mapper::{ModuleRole, Placement};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GoaArch {
    /// Module rows.
    pub m: usize,
    /// Module columns.
    pub n: usize,
    /// Ports per module.
    pub k: usize,
    /// WDM channels available.
    pub wavelengths: usize,
}

impl GoaArch {
    pub fn new(m: usize, n: usize, k: usize, wavelengths: usize) -> Result<Self> {
        let arch = Self {
            m,
            n,
            k,
            wavelengths,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(GoaError::InvalidArch(format!(
                "grid must have at least one module row and column (got {}x{})",
                self.m, self.n
            )));
        }
        if self.k < 2 {
            return Err(GoaError::InvalidArch(format!(
                "modules need at least 2 ports (got {})",
                self.k
            )));
        }
        if self.m > self.wavelengths {
            return Err(GoaError::InvalidArch(format!(
                "{} module rows need distinct wavelengths but only {} are available",
                self.m, self.wavelengths
            )));
        }
        Ok(())
    }

    /// Mesh MZIs plus the diagonal input column.
    pub fn mzis_per_module(&self) -> usize {
        mesh_mzi_count(self.k) + self.k
    }

    pub fn total_mzis(&self) -> usize {
        self.m * self.n * self.mzis_per_module()
    }

    pub fn input_width(&self) -> usize {
        self.m * self.k
    }

    pub fn output_width(&self) -> usize {
        self.n * self.k
    }

    /// One channel per module row, row `i` on channel `i`.
    pub fn default_wavelengths(&self) -> Vec<usize> {
        (0..self.m).collect()
    }
}

/// Where a module sends its output light.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Dropped onto the column bus towards the photodiodes.
    Down,
    /// Passed horizontally into the right-hand neighbour (restored pair).
    Through,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleSlot {
    pub program: MeshProgram,
    pub route: Route,
}

/// Programs and routing for every module of the grid during one pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleGrid {
    arch: GoaArch,
    slots: Vec<Option<ModuleSlot>>,
    row_wavelengths: Vec<usize>,
}

impl ModuleGrid {
    pub fn new(arch: &GoaArch) -> Self {
        Self {
            arch: arch.clone(),
            slots: vec![None; arch.m * arch.n],
            row_wavelengths: arch.default_wavelengths(),
        }
    }

    pub fn arch(&self) -> &GoaArch {
        &self.arch
    }

    pub fn set(&mut self, row: usize, col: usize, program: MeshProgram, route: Route) -> Result<()> {
        if row >= self.arch.m || col >= self.arch.n {
            return Err(GoaError::Placement(format!(
                "module ({row}, {col}) is outside the {}x{} grid",
                self.arch.m, self.arch.n
            )));
        }
        if program.size() != self.arch.k {
            return Err(GoaError::DimensionMismatch {
                context: "module program size",
                expected: self.arch.k,
                actual: program.size(),
            });
        }
        self.slots[row * self.arch.n + col] = Some(ModuleSlot { program, route });
        Ok(())
    }

    pub fn get(&self, row: usize, col: usize) -> Option<&ModuleSlot> {
        self.slots.get(row * self.arch.n + col).and_then(Option::as_ref)
    }

    pub fn row_wavelengths(&self) -> &[usize] {
        &self.row_wavelengths
    }

    pub fn set_row_wavelengths(&mut self, map: Vec<usize>) -> Result<()> {
        if map.len() != self.arch.m {
            return Err(GoaError::DimensionMismatch {
                context: "wavelength map",
                expected: self.arch.m,
                actual: map.len(),
            });
        }
        self.row_wavelengths = map;
        Ok(())
    }

    pub fn programmed_modules(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }
}

/// Sums the module outputs dropped onto one column bus and detects them.
///
/// Every entry is `(grid row, output signal)`. Two modules on the same
/// channel are rejected: the lower ring would pull the upper signal off the
/// bus before it reaches the photodiodes.
pub fn accumulate_column(
    column: usize,
    outputs: &[(usize, ComplexSignalVector)],
) -> Result<Vec<f64>> {
    let Some((_, first)) = outputs.first() else {
        return Ok(Vec::new());
    };
    let len = first.len();
    for (i, (row_a, a)) in outputs.iter().enumerate() {
        if a.len() != len {
            return Err(GoaError::DimensionMismatch {
                context: "column accumulation",
                expected: len,
                actual: a.len(),
            });
        }
        if let Some((row_b, _)) = outputs[i + 1..]
            .iter()
            .find(|(_, b)| b.wavelength == a.wavelength)
        {
            return Err(GoaError::RoutingViolation {
                column,
                upper_row: (*row_a).min(*row_b),
                lower_row: (*row_a).max(*row_b),
                wavelength: a.wavelength,
            });
        }
    }
    let mut sum = vec![C64::new(0.0, 0.0); len];
    for (_, out) in outputs {
        for (s, a) in sum.iter_mut().zip(&out.amplitudes) {
            *s += a;
        }
    }
    Ok(sum.into_iter().map(|z| z.re).collect())
}

/// Checks that the grid's programs and routes agree with the placements of one pass.
pub fn check_placement(grid: &ModuleGrid, pass: &[Placement]) -> Result<()> {
    let arch = grid.arch();
    for row in 0..arch.m {
        for col in 0..arch.n {
            let owners: Vec<(usize, ModuleRole)> = pass
                .iter()
                .filter_map(|p| p.role_at(row, col).map(|r| (p.cluster, r)))
                .collect();
            let slot = grid.get(row, col);
            match (owners.as_slice(), slot) {
                ([], None) => {}
                ([], Some(_)) => {
                    return Err(GoaError::Placement(format!(
                        "module ({row}, {col}) is programmed but no placement covers it"
                    )))
                }
                ([(cluster, _)], None) => {
                    return Err(GoaError::Placement(format!(
                        "module ({row}, {col}) of cluster {cluster} has no program"
                    )))
                }
                ([(cluster, role)], Some(slot)) => {
                    let expected = match role {
                        ModuleRole::RestoreFirst { .. } => Route::Through,
                        _ => Route::Down,
                    };
                    if slot.route != expected {
                        return Err(GoaError::Placement(format!(
                            "module ({row}, {col}) of cluster {cluster} routes {:?}, expected {expected:?}",
                            slot.route
                        )));
                    }
                }
                _ => {
                    return Err(GoaError::Placement(format!(
                        "module ({row}, {col}) claimed by {} placements",
                        owners.len()
                    )))
                }
            }
        }
    }
    Ok(())
}

/// Runs one pass of the grid on a real input of length `m·k`, returning the
/// `n·k` detected column sums.
pub fn simulate_goa(
    arch: &GoaArch,
    grid: &ModuleGrid,
    pass: &[Placement],
    input: &[f64],
) -> Result<Vec<f64>> {
    arch.validate()?;
    if grid.arch() != arch {
        return Err(GoaError::Placement(
            "module grid was built for a different architecture".into(),
        ));
    }
    if input.len() != arch.input_width() {
        return Err(GoaError::DimensionMismatch {
            context: "grid input",
            expected: arch.input_width(),
            actual: input.len(),
        });
    }
    if input.iter().any(|v| !v.is_finite()) {
        return Err(GoaError::NonFinite("grid input"));
    }
    for (row, &wl) in grid.row_wavelengths().iter().enumerate() {
        if wl >= arch.wavelengths {
            return Err(GoaError::WavelengthOutOfRange {
                row,
                wavelength: wl,
                available: arch.wavelengths,
            });
        }
    }
    check_placement(grid, pass)?;

    let k = arch.k;
    let mut through: Vec<Option<ComplexSignalVector>> = vec![None; arch.m];
    let mut output = vec![0.0; arch.output_width()];
    for col in 0..arch.n {
        let mut dropped = Vec::new();
        let mut next_through: Vec<Option<ComplexSignalVector>> = vec![None; arch.m];
        for row in 0..arch.m {
            let Some(slot) = grid.get(row, col) else {
                continue;
            };
            let wl = grid.row_wavelengths()[row];
            let signal = match through[row].take() {
                Some(s) => s,
                None => ComplexSignalVector::from_real(&input[row * k..(row + 1) * k], wl),
            };
            let out = slot.program.forward(&signal)?;
            match slot.route {
                Route::Down => dropped.push((row, out)),
                Route::Through => {
                    if col + 1 == arch.n {
                        return Err(GoaError::Placement(format!(
                            "module ({row}, {col}) passes light off the grid edge"
                        )));
                    }
                    next_through[row] = Some(out);
                }
            }
        }
        if let Some(row) = through.iter().position(Option::is_some) {
            return Err(GoaError::Placement(format!(
                "light passed into empty module ({row}, {col})"
            )));
        }
        through = next_through;
        let sums = accumulate_column(col, &dropped)?;
        if !sums.is_empty() {
            output[col * k..(col + 1) * k].copy_from_slice(&sums);
        }
    }
    Ok(output)
}
