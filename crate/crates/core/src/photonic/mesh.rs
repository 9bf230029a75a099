//! Interleaved (rectangular) MZI meshes with a diagonal amplitude column at
//! the inputs. A program for `k` ports has `k` columns; column `c` holds MZIs
//! on port pairs `(p, p + 1)` with `p ≡ c (mod 2)`, for `k(k-1)/2` MZIs total.

use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};

use super::mzi::{MziSetting, C64};
use crate::error::{GoaError, Result};

/// One MZI of a mesh column, coupling ports `port` and `port + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MziPlacement {
    pub port: usize,
    pub setting: MziSetting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshProgram {
    size: usize,
    columns: Vec<Vec<MziPlacement>>,
    diagonal: Vec<f64>,
    /// Per-port phases left over after decomposition, applied at the outputs.
    output_phases: Vec<f64>,
}

/// A block of complex amplitudes travelling on one WDM channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignalVector {
    pub amplitudes: Vec<C64>,
    pub wavelength: usize,
}

impl ComplexSignalVector {
    pub fn new(amplitudes: Vec<C64>, wavelength: usize) -> Self {
        Self {
            amplitudes,
            wavelength,
        }
    }

    pub fn from_real(values: &[f64], wavelength: usize) -> Self {
        Self {
            amplitudes: values.iter().map(|&v| C64::new(v, 0.0)).collect(),
            wavelength,
        }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes
            .iter()
            .all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

/// Number of MZIs in a full `k`-port rectangular mesh.
pub fn mesh_mzi_count(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Ports that start an MZI in column `column` of a `k`-port mesh.
pub(crate) fn column_ports(k: usize, column: usize) -> impl Iterator<Item = usize> {
    (column % 2..k.saturating_sub(1)).step_by(2)
}

impl MeshProgram {
    /// Builds a program and checks the interleaved-layout invariants.
    pub fn new(
        size: usize,
        columns: Vec<Vec<MziPlacement>>,
        diagonal: Vec<f64>,
        output_phases: Vec<f64>,
    ) -> Result<Self> {
        let program = Self {
            size,
            columns,
            diagonal,
            output_phases,
        };
        program.validate()?;
        Ok(program)
    }

    /// All MZIs in the zero-phase bar state: the mesh is exactly `diag(diagonal)`.
    pub fn identity(size: usize) -> Self {
        let columns = (0..size)
            .map(|c| {
                column_ports(size, c)
                    .map(|port| MziPlacement {
                        port,
                        setting: MziSetting::bar(),
                    })
                    .collect()
            })
            .collect();
        Self {
            size,
            columns,
            diagonal: vec![1.0; size],
            output_phases: vec![0.0; size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn columns(&self) -> &[Vec<MziPlacement>] {
        &self.columns
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn output_phases(&self) -> &[f64] {
        &self.output_phases
    }

    pub fn mzi_count(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// Replaces the input amplitude column. Entries must be finite and nonnegative.
    pub fn with_diagonal(mut self, diagonal: Vec<f64>) -> Result<Self> {
        check_diagonal(self.size, &diagonal)?;
        self.diagonal = diagonal;
        Ok(self)
    }

    /// Overrides a single MZI. Used to build partially programmed meshes.
    pub fn set_mzi(&mut self, column: usize, port: usize, setting: MziSetting) -> Result<()> {
        let slot = self
            .columns
            .get_mut(column)
            .and_then(|col| col.iter_mut().find(|p| p.port == port))
            .ok_or_else(|| {
                GoaError::Placement(format!("no MZI at column {column}, port {port}"))
            })?;
        slot.setting = setting;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.size;
        if self.columns.len() != k {
            return Err(GoaError::DimensionMismatch {
                context: "mesh column count",
                expected: k,
                actual: self.columns.len(),
            });
        }
        for (c, col) in self.columns.iter().enumerate() {
            let expected: Vec<usize> = column_ports(k, c).collect();
            let ports: Vec<usize> = col.iter().map(|p| p.port).collect();
            if ports != expected {
                return Err(GoaError::Placement(format!(
                    "mesh column {c} has MZIs at ports {ports:?}, expected {expected:?}"
                )));
            }
        }
        check_diagonal(k, &self.diagonal)?;
        if self.output_phases.len() != k {
            return Err(GoaError::DimensionMismatch {
                context: "mesh output phases",
                expected: k,
                actual: self.output_phases.len(),
            });
        }
        if self.output_phases.iter().any(|p| !p.is_finite()) {
            return Err(GoaError::NonFinite("mesh output phases"));
        }
        Ok(())
    }

    /// Dense `k×k` matrix `D_out · C_k ⋯ C_1 · diag(diagonal)`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let k = self.size;
        let mut m = DMatrix::<C64>::zeros(k, k);
        for (i, &d) in self.diagonal.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        for col in &self.columns {
            for mzi in col {
                apply_rows(&mut m, mzi.port, &mzi.setting.transfer());
            }
        }
        for (i, &phase) in self.output_phases.iter().enumerate() {
            let e = C64::from_polar(1.0, phase);
            for j in 0..k {
                m[(i, j)] *= e;
            }
        }
        m
    }

    /// Propagates one input vector through the module: amplitudes first, then mesh columns.
    pub fn forward(&self, input: &ComplexSignalVector) -> Result<ComplexSignalVector> {
        if input.len() != self.size {
            return Err(GoaError::DimensionMismatch {
                context: "mesh input",
                expected: self.size,
                actual: input.len(),
            });
        }
        let mut v = DVector::from_iterator(
            self.size,
            input
                .amplitudes
                .iter()
                .zip(&self.diagonal)
                .map(|(a, &d)| a * d),
        );
        for col in &self.columns {
            for mzi in col {
                let t = mzi.setting.transfer();
                let (a, b) = (v[mzi.port], v[mzi.port + 1]);
                v[mzi.port] = t[(0, 0)] * a + t[(0, 1)] * b;
                v[mzi.port + 1] = t[(1, 0)] * a + t[(1, 1)] * b;
            }
        }
        for (x, &phase) in v.iter_mut().zip(&self.output_phases) {
            *x *= C64::from_polar(1.0, phase);
        }
        Ok(ComplexSignalVector::new(
            v.iter().copied().collect(),
            input.wavelength,
        ))
    }
}

pub fn mesh_forward(
    program: &MeshProgram,
    input: &ComplexSignalVector,
) -> Result<ComplexSignalVector> {
    program.forward(input)
}

pub fn reconstruct(program: &MeshProgram) -> DMatrix<C64> {
    program.reconstruct()
}

fn check_diagonal(k: usize, diagonal: &[f64]) -> Result<()> {
    if diagonal.len() != k {
        return Err(GoaError::DimensionMismatch {
            context: "mesh diagonal",
            expected: k,
            actual: diagonal.len(),
        });
    }
    if diagonal.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(GoaError::InvalidConfig(
            "diagonal amplitudes must be finite and nonnegative".into(),
        ));
    }
    Ok(())
}

/// Left-multiplies rows `port` and `port + 1` of `m` by the 2×2 block `t`.
pub(crate) fn apply_rows(m: &mut DMatrix<C64>, port: usize, t: &Matrix2<C64>) {
    for j in 0..m.ncols() {
        let (a, b) = (m[(port, j)], m[(port + 1, j)]);
        m[(port, j)] = t[(0, 0)] * a + t[(0, 1)] * b;
        m[(port + 1, j)] = t[(1, 0)] * a + t[(1, 1)] * b;
    }
}
