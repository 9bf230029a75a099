//! Unitary-to-mesh compilation using two-sided nulling on the rectangular
//! layout. Nulling rotations from the right form the input half of the mesh
//! and rotations from the left form the output half; the residual diagonal is
//! carried forward as per-port phases and folded into later MZIs until only
//! output phases remain.

use nalgebra::{DMatrix, Matrix2};
use rand::Rng;
use rand_distr::StandardNormal;

use super::mesh::{MeshProgram, MziPlacement};
use super::mzi::{factor_output_phases, wrap_angle, C64};
use crate::error::{GoaError, Result};

/// Tolerance on `‖U†U − I‖_F` for accepting a matrix as unitary.
pub const UNITARY_TOLERANCE: f64 = 1e-8;

/// Frobenius distance of `U†U` from the identity.
pub fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    let k = u.nrows();
    (u.adjoint() * u - DMatrix::<C64>::identity(k, k)).norm()
}

enum Step {
    Rotation { port: usize, block: Matrix2<C64> },
    Phases(Vec<f64>),
}

/// Compiles a unitary into a mesh program whose `reconstruct` reproduces it.
/// The returned program has an all-ones diagonal.
pub fn decompose_unitary(u: &DMatrix<C64>) -> Result<MeshProgram> {
    let k = u.nrows();
    if u.ncols() != k {
        return Err(GoaError::DimensionMismatch {
            context: "unitary must be square",
            expected: k,
            actual: u.ncols(),
        });
    }
    if u.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(GoaError::NonFinite("unitary matrix"));
    }
    let deviation = unitarity_deviation(u);
    if deviation >= UNITARY_TOLERANCE {
        return Err(GoaError::NonUnitary { deviation });
    }

    let mut work = u.clone();
    let mut right: Vec<Step> = Vec::new();
    let mut left: Vec<Step> = Vec::new();

    for i in 1..k {
        if i % 2 == 1 {
            for j in 0..i {
                let row = k - 1 - j;
                let col = i - j - 1;
                let g = null_from_right(work[(row, col)], work[(row, col + 1)]);
                apply_cols(&mut work, col, &g);
                right.push(Step::Rotation {
                    port: col,
                    block: g.adjoint(),
                });
            }
        } else {
            for j in 1..=i {
                let row = k + j - i - 1;
                let col = j - 1;
                let h = null_from_left(work[(row - 1, col)], work[(row, col)]);
                super::mesh::apply_rows(&mut work, row - 1, &h);
                left.push(Step::Rotation {
                    port: row - 1,
                    block: h.adjoint(),
                });
            }
        }
    }

    let mut off_diagonal = 0.0;
    for i in 0..k {
        for j in 0..k {
            if i != j {
                off_diagonal += work[(i, j)].norm_sqr();
            }
        }
    }
    if off_diagonal.sqrt() > 1e-7 {
        return Err(GoaError::Internal(format!(
            "nulling left off-diagonal mass {:.3e}",
            off_diagonal.sqrt()
        )));
    }

    // U = L_1† ⋯ L_p† · D · R_q† ⋯ R_1†, so light meets R_1† first.
    let mut steps = right;
    steps.push(Step::Phases((0..k).map(|i| work[(i, i)].arg()).collect()));
    steps.extend(left.into_iter().rev());

    let mut phases = vec![0.0; k];
    let mut last_column: Vec<Option<usize>> = vec![None; k];
    let mut columns: Vec<Vec<MziPlacement>> = vec![Vec::new(); k];
    for step in steps {
        match step {
            Step::Phases(d) => {
                for (p, extra) in phases.iter_mut().zip(d) {
                    *p += extra;
                }
            }
            Step::Rotation { port, block } => {
                let incoming = Matrix2::new(
                    C64::from_polar(1.0, phases[port]),
                    C64::new(0.0, 0.0),
                    C64::new(0.0, 0.0),
                    C64::from_polar(1.0, phases[port + 1]),
                );
                let (setting, a, b) = factor_output_phases(&(block * incoming));
                let earliest = match (last_column[port], last_column[port + 1]) {
                    (None, None) => 0,
                    (a, b) => a.max(b).map_or(0, |c| c + 1),
                };
                let column = if earliest % 2 == port % 2 {
                    earliest
                } else {
                    earliest + 1
                };
                if column >= k {
                    return Err(GoaError::Internal(format!(
                        "rotation on ports ({port}, {}) landed outside the {k}-column mesh",
                        port + 1
                    )));
                }
                columns[column].push(MziPlacement { port, setting });
                last_column[port] = Some(column);
                last_column[port + 1] = Some(column);
                phases[port] = a;
                phases[port + 1] = b;
            }
        }
    }
    for col in &mut columns {
        col.sort_by_key(|p| p.port);
    }
    let output_phases = phases.into_iter().map(wrap_angle).collect();
    MeshProgram::new(k, columns, vec![1.0; k], output_phases)
}

/// Returns `G` such that `[a, b] · G` has a zero first entry.
fn null_from_right(a: C64, b: C64) -> Matrix2<C64> {
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if n == 0.0 {
        return Matrix2::identity();
    }
    Matrix2::new(b / n, a.conj() / n, -a / n, b.conj() / n)
}

/// Returns `H` such that `H · [a; b]` has a zero second entry.
fn null_from_left(a: C64, b: C64) -> Matrix2<C64> {
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if n == 0.0 {
        return Matrix2::identity();
    }
    Matrix2::new(a.conj() / n, b.conj() / n, -b / n, a / n)
}

fn apply_cols(m: &mut DMatrix<C64>, col: usize, g: &Matrix2<C64>) {
    for i in 0..m.nrows() {
        let (a, b) = (m[(i, col)], m[(i, col + 1)]);
        m[(i, col)] = a * g[(0, 0)] + b * g[(1, 0)];
        m[(i, col + 1)] = a * g[(0, 1)] + b * g[(1, 1)];
    }
}

/// Haar-distributed random unitary (QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal divided out).
pub fn haar_unitary<R: Rng + ?Sized>(k: usize, rng: &mut R) -> DMatrix<C64> {
    let z = DMatrix::<C64>::from_fn(k, k, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..k {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-distributed random real orthogonal matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(k: usize, rng: &mut R) -> DMatrix<f64> {
    let z = DMatrix::<f64>::from_fn(k, k, |_, _| rng.sample(StandardNormal));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photonic::mzi::{mzi_transfer, MziSetting};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn angle_distance(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(TAU);
        d.min(TAU - d)
    }

    #[test]
    fn round_trip_random_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 1..=12 {
            for _ in 0..10 {
                let u = haar_unitary(k, &mut rng);
                let p = decompose_unitary(&u).unwrap();
                assert_eq!(p.mzi_count(), k * (k - 1) / 2);
                assert!(p.diagonal().iter().all(|&d| d == 1.0));
                let err = (p.reconstruct() - &u).norm();
                assert!(err < 1e-9, "k={k}, err={err:e}");
            }
        }
    }

    #[test]
    fn two_port_recovers_the_mzi_angles() {
        for &(theta, phi) in &[(0.4, 1.3), (1.7, 5.9), (2.9, 0.2), (1.0, 3.5)] {
            let t = mzi_transfer(MziSetting::new(theta, phi));
            let u = DMatrix::from_fn(2, 2, |i, j| t[(i, j)]);
            let p = decompose_unitary(&u).unwrap();
            assert_eq!(p.mzi_count(), 1);
            let s = p.columns()[0][0].setting;
            assert!(angle_distance(s.theta(), theta) < 1e-9);
            assert!(angle_distance(s.phi(), phi) < 1e-9);
            for &o in p.output_phases() {
                assert!(angle_distance(o, 0.0) < 1e-9);
            }
        }
    }

    #[test]
    fn identity_and_permutations() {
        let id = DMatrix::<C64>::identity(4, 4);
        let p = decompose_unitary(&id).unwrap();
        assert!((p.reconstruct() - &id).norm() < 1e-9);

        let mut perm = DMatrix::<C64>::zeros(5, 5);
        for (i, j) in [(0, 3), (1, 0), (2, 4), (3, 1), (4, 2)] {
            perm[(i, j)] = C64::new(1.0, 0.0);
        }
        let p = decompose_unitary(&perm).unwrap();
        assert!((p.reconstruct() - &perm).norm() < 1e-9);
    }

    #[test]
    fn rejects_non_unitary() {
        let mut m = DMatrix::<C64>::identity(3, 3);
        m[(0, 0)] = C64::new(1.1, 0.0);
        match decompose_unitary(&m) {
            Err(GoaError::NonUnitary { deviation }) => assert!((deviation - 0.21).abs() < 1e-9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = random_orthogonal(7, &mut rng);
        assert!((q.transpose() * &q - DMatrix::<f64>::identity(7, 7)).norm() < 1e-12);
    }
}
