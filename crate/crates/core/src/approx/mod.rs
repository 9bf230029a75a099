//! Single-unitary `UΣ` approximation of weight blocks, exact two-module
//! restoration, and selection of the grid columns worth restoring.

mod restore;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GoaError, Result};
use crate::photonic::{decompose_unitary, MeshProgram, C64};

pub use restore::{
    apply_restorations, rank_columns, select_restorations, ColumnError, ColumnRef,
    RestorationSelection,
};

/// Relative singular-value floor below which a matrix counts as rank deficient.
const RANK_TOLERANCE: f64 = 1e-12;

/// `w = U_svd · diag(σ) · V_svdᵀ` with `σ` descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdTriple {
    pub u_svd: DMatrix<f64>,
    pub sigma_svd: Vec<f64>,
    pub v_svd: DMatrix<f64>,
}

impl SvdTriple {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.u_svd * DMatrix::from_diagonal(&self.sigma_svd.clone().into()) * self.v_svd.transpose()
    }

    pub fn is_full_rank(&self) -> bool {
        let top = self.sigma_svd.first().copied().unwrap_or(0.0);
        self.sigma_svd
            .last()
            .is_some_and(|&s| s > RANK_TOLERANCE * top.max(f64::MIN_POSITIVE))
    }
}

fn check_square(w: &DMatrix<f64>, context: &'static str) -> Result<()> {
    if w.nrows() != w.ncols() {
        return Err(GoaError::DimensionMismatch {
            context,
            expected: w.nrows(),
            actual: w.ncols(),
        });
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(GoaError::NonFinite(context));
    }
    Ok(())
}

/// SVD with singular values sorted descending and the largest-magnitude entry
/// of each left singular vector made nonnegative.
pub fn svd_decompose(w: &DMatrix<f64>) -> Result<SvdTriple> {
    check_square(w, "svd input")?;
    let k = w.nrows();
    let svd = w.clone().svd(true, true);
    let u = svd.u.ok_or_else(|| GoaError::Internal("SVD returned no U".into()))?;
    let vt = svd
        .v_t
        .ok_or_else(|| GoaError::Internal("SVD returned no V".into()))?;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let mut u_svd = DMatrix::zeros(k, k);
    let mut v_svd = DMatrix::zeros(k, k);
    let mut sigma_svd = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        let col = u.column(src);
        let pivot = col.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        u_svd.set_column(dst, &(col * sign));
        v_svd.set_column(dst, &(vt.row(src).transpose() * sign));
        sigma_svd.push(svd.singular_values[src]);
    }
    Ok(SvdTriple {
        u_svd,
        sigma_svd,
        v_svd,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestUnitary {
    pub u: DMatrix<f64>,
    /// False when `w` is rank deficient and other factors are equally close.
    pub unique: bool,
}

/// Polar factor `U_svd · V_svdᵀ`, the Frobenius-nearest orthogonal matrix to `w`.
pub fn nearest_unitary(w: &DMatrix<f64>) -> Result<NearestUnitary> {
    let t = svd_decompose(w)?;
    Ok(NearestUnitary {
        u: &t.u_svd * t.v_svd.transpose(),
        unique: t.is_full_rank(),
    })
}

/// Which slices of `U` the diagonal scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `w ≈ U·diag(σ)`: σ pre-modulates the inputs, as the hardware does.
    #[default]
    Column,
    /// `w ≈ diag(σ)·U`: per-row scaling.
    Row,
}

/// Closed-form least-squares scalars: `σ_j = ⟨U_j, w_j⟩` over columns (or rows).
pub fn fit_diagonal(w: &DMatrix<f64>, u: &DMatrix<f64>, orientation: Orientation) -> Result<Vec<f64>> {
    if w.shape() != u.shape() {
        return Err(GoaError::DimensionMismatch {
            context: "fit_diagonal operands",
            expected: u.len(),
            actual: w.len(),
        });
    }
    Ok(match orientation {
        Orientation::Column => (0..w.ncols()).map(|j| u.column(j).dot(&w.column(j))).collect(),
        Orientation::Row => (0..w.nrows()).map(|i| u.row(i).dot(&w.row(i))).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryApprox {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub residual: f64,
    #[serde(default)]
    pub orientation: Orientation,
}

impl UnitaryApprox {
    pub fn hardware_matrix(&self) -> DMatrix<f64> {
        let mut m = self.u.clone();
        match self.orientation {
            Orientation::Column => {
                for (j, s) in self.sigma.iter().enumerate() {
                    m.column_mut(j).scale_mut(*s);
                }
            }
            Orientation::Row => {
                for (i, s) in self.sigma.iter().enumerate() {
                    m.row_mut(i).scale_mut(*s);
                }
            }
        }
        m
    }

    pub fn residual_against(&self, w: &DMatrix<f64>) -> f64 {
        (w - self.hardware_matrix()).norm()
    }
}

pub fn approx_module(w: &DMatrix<f64>) -> Result<UnitaryApprox> {
    approx_module_with(w, Orientation::Column)
}

pub fn approx_module_with(w: &DMatrix<f64>, orientation: Orientation) -> Result<UnitaryApprox> {
    let u = nearest_unitary(w)?.u;
    let sigma = fit_diagonal(w, &u, orientation)?;
    let mut a = UnitaryApprox {
        u,
        sigma,
        residual: 0.0,
        orientation,
    };
    a.residual = a.residual_against(w);
    Ok(a)
}

pub(crate) fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// Mesh program realizing `U·diag(σ)`. Negative scalars are folded into
/// the sign of the matching column of `U`.
pub fn program_for_approx(a: &UnitaryApprox) -> Result<MeshProgram> {
    if a.orientation != Orientation::Column {
        return Err(GoaError::InvalidConfig(
            "only column-oriented approximations map onto a module".into(),
        ));
    }
    let mut u = a.u.clone();
    for (j, s) in a.sigma.iter().enumerate() {
        if *s < 0.0 {
            u.column_mut(j).neg_mut();
        }
    }
    decompose_unitary(&to_complex(&u))?.with_diagonal(a.sigma.iter().map(|s| s.abs()).collect())
}

/// The two programs of an exact restored pair: `V_svdᵀ` (unit diagonal),
/// then `U_svd` with `σ_svd` on its diagonal.
pub fn restore_pair(w: &DMatrix<f64>) -> Result<(MeshProgram, MeshProgram)> {
    let t = svd_decompose(w)?;
    let first = decompose_unitary(&to_complex(&t.v_svd.transpose()))?;
    let second = decompose_unitary(&to_complex(&t.u_svd))?.with_diagonal(t.sigma_svd)?;
    Ok((first, second))
}
