//! A single Mach-Zehnder interferometer: two 50:50 couplers with an internal
//! phase shifter `theta` and an input phase shifter `phi`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{Complex, Matrix2};
use serde::{Deserialize, Serialize};

pub type C64 = Complex<f64>;

/// Phase pair of one MZI, both angles kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSetting")]
pub struct MziSetting {
    theta: f64,
    phi: f64,
}

#[derive(Deserialize)]
struct RawSetting {
    theta: f64,
    phi: f64,
}

impl TryFrom<RawSetting> for MziSetting {
    type Error = String;

    fn try_from(raw: RawSetting) -> Result<Self, Self::Error> {
        if !(raw.theta.is_finite() && raw.phi.is_finite()) {
            return Err("MZI phases must be finite".into());
        }
        Ok(MziSetting::new(raw.theta, raw.phi))
    }
}

pub(crate) fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl MziSetting {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self {
            theta: wrap_angle(theta),
            phi: wrap_angle(phi),
        }
    }

    /// Bar state with zero net phase on both arms: the transfer matrix is the identity.
    pub fn bar() -> Self {
        Self::new(PI, PI)
    }

    /// Full cross state.
    pub fn cross() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Transfer matrix `i e^{iθ/2} [[e^{iφ} sin(θ/2), cos(θ/2)], [e^{iφ} cos(θ/2), -sin(θ/2)]]`.
    pub fn transfer(&self) -> Matrix2<C64> {
        mzi_transfer(*self)
    }
}

pub fn mzi_transfer(setting: MziSetting) -> Matrix2<C64> {
    let (s, c) = (setting.theta / 2.0).sin_cos();
    let pre = C64::i() * C64::from_polar(1.0, setting.theta / 2.0);
    let ephi = C64::from_polar(1.0, setting.phi);
    Matrix2::new(
        pre * ephi * s,
        pre * c,
        pre * ephi * c,
        -pre * s,
    )
}

/// Splits a 2×2 unitary into `diag(e^{ia}, e^{ib}) · T(θ, φ)`, returning the
/// MZI setting and the two output phases. `θ` always lands in `[0, π]`.
pub(crate) fn factor_output_phases(w: &Matrix2<C64>) -> (MziSetting, f64, f64) {
    let s = w[(0, 0)].norm();
    let c = w[(0, 1)].norm();
    let theta = 2.0 * s.atan2(c);
    // Row 0 of the bare mesh matrix is (e^{iφ} s, c); row 1 is (e^{iφ} c, -s).
    let a = w[(0, 1)].arg();
    let phi = w[(0, 0)].arg() - a;
    let b = if s >= c {
        (-w[(1, 1)]).arg()
    } else {
        w[(1, 0)].arg() - phi
    };
    // T = i e^{iθ/2} · bare, so the output phases lose π/2 + θ/2.
    let shift = FRAC_PI_2 + theta / 2.0;
    (MziSetting::new(theta, phi), a - shift, b - shift)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn bar_state_is_diagonal() {
        let t = mzi_transfer(MziSetting::new(PI, 0.0));
        assert!(close(t[(0, 0)], C64::new(-1.0, 0.0)));
        assert!(close(t[(0, 1)], C64::new(0.0, 0.0)));
        assert!(close(t[(1, 0)], C64::new(0.0, 0.0)));
        assert!(close(t[(1, 1)], C64::new(1.0, 0.0)));
    }

    #[test]
    fn cross_state_swaps_with_global_i() {
        let t = mzi_transfer(MziSetting::new(0.0, 0.0));
        assert!(close(t[(0, 0)], C64::new(0.0, 0.0)));
        assert!(close(t[(0, 1)], C64::new(0.0, 1.0)));
        assert!(close(t[(1, 0)], C64::new(0.0, 1.0)));
        assert!(close(t[(1, 1)], C64::new(0.0, 0.0)));
    }

    #[test]
    fn identity_bar_setting() {
        let t = MziSetting::bar().transfer();
        assert!((t - Matrix2::identity()).norm() < 1e-12);
    }

    #[test]
    fn angles_are_wrapped() {
        let s = MziSetting::new(-0.5, 7.0);
        assert!((s.theta() - (TAU - 0.5)).abs() < 1e-12);
        assert!((s.phi() - (7.0 - TAU)).abs() < 1e-12);
        let tiny = MziSetting::new(-1e-300, 0.0);
        assert!(tiny.theta() < TAU);
    }

    #[test]
    fn transfer_is_two_pi_periodic_in_theta() {
        let a = mzi_transfer(MziSetting::new(1.3, 0.4));
        let b = mzi_transfer(MziSetting { theta: 1.3 + TAU, phi: 0.4 });
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn output_phase_factoring_reconstructs() {
        for &(theta, phi) in &[(0.3, 1.1), (2.9, 5.0), (0.0, 0.0), (PI, 2.0), (1.0, 0.0)] {
            let t = mzi_transfer(MziSetting::new(theta, phi));
            let phases = Matrix2::new(
                C64::from_polar(1.0, 0.7),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::from_polar(1.0, -2.1),
            );
            let w = phases * t;
            let (setting, a, b) = factor_output_phases(&w);
            let d = Matrix2::new(
                C64::from_polar(1.0, a),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::from_polar(1.0, b),
            );
            assert!((d * setting.transfer() - w).norm() < 1e-12);
        }
    }
}
