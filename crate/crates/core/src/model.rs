//! Parameters, phase-space state and the semiclassical equations of motion.
//!
//! Frequencies and rates are in MHz read as rad/us (hbar = 1), so time is in
//! microseconds. Variables are unscaled: spin components are O(N), the cavity
//! amplitude is O(sqrt(photon number)).

use serde::{Deserialize, Serialize};

use crate::error::{DickeError, Result};
use crate::ode::VectorField;

/// Number of real phase-space coordinates.
pub const DIM: usize = 7;

/// Model constants.
///
/// The aggregate couplings `lambda = g sqrt(N)` and `uN = u N` are derived on
/// demand and never stored next to `g` and `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub omega_a: f64,
    pub omega: f64,
    pub omega_m: f64,
    pub kappa: f64,
    pub gamma_m: f64,
    pub g: f64,
    pub u: f64,
    pub delta0: f64,
    pub eta_p: f64,
    pub n_atoms: f64,
}

impl SystemParams {
    /// Build from the aggregate couplings `uN` and `lambda = g sqrt(N)`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_aggregate(
        omega_a: f64,
        omega: f64,
        omega_m: f64,
        kappa: f64,
        gamma_m: f64,
        lambda: f64,
        un: f64,
        delta0: f64,
        eta_p: f64,
        n_atoms: f64,
    ) -> Result<Self> {
        let p = Self {
            omega_a,
            omega,
            omega_m,
            kappa,
            gamma_m,
            g: lambda / n_atoms.sqrt(),
            u: un / n_atoms,
            delta0,
            eta_p,
            n_atoms,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameter set used throughout the reference phase portraits:
    /// omega_m = 1, omega_a = 0.05, kappa = 8.1, delta0 = 0.05,
    /// Gamma_m = 0.05 omega_m, N = 1e6.
    pub fn reference(omega: f64, lambda: f64, un: f64) -> Self {
        let n = 1.0e6;
        Self {
            omega_a: 0.05,
            omega,
            omega_m: 1.0,
            kappa: 8.1,
            gamma_m: 0.05,
            g: lambda / f64::sqrt(n),
            u: un / n,
            delta0: 0.05,
            eta_p: 0.0,
            n_atoms: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_a", self.omega_a),
            ("omega", self.omega),
            ("omega_m", self.omega_m),
            ("kappa", self.kappa),
            ("gamma_m", self.gamma_m),
            ("g", self.g),
            ("u", self.u),
            ("delta0", self.delta0),
            ("eta_p", self.eta_p),
            ("n_atoms", self.n_atoms),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(DickeError::InvalidParams(format!("{name} must be finite")));
            }
        }
        let positive = [
            ("omega_a", self.omega_a),
            ("omega_m", self.omega_m),
            ("kappa", self.kappa),
            ("gamma_m", self.gamma_m),
        ];
        for (name, v) in positive {
            if v <= 0.0 {
                return Err(DickeError::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        let nonneg = [("g", self.g), ("delta0", self.delta0), ("eta_p", self.eta_p)];
        for (name, v) in nonneg {
            if v < 0.0 {
                return Err(DickeError::InvalidParams(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.n_atoms < 2.0 {
            return Err(DickeError::InvalidParams(format!(
                "n_atoms must be >= 2, got {}",
                self.n_atoms
            )));
        }
        Ok(())
    }

    /// Collective coupling g sqrt(N).
    pub fn lambda(&self) -> f64 {
        self.g * self.n_atoms.sqrt()
    }

    /// Aggregate back-action U N.
    pub fn un(&self) -> f64 {
        self.u * self.n_atoms
    }

    /// Spin length N/2.
    pub fn half_n(&self) -> f64 {
        0.5 * self.n_atoms
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.g = lambda / self.n_atoms.sqrt();
        self
    }

    pub fn with_un(mut self, un: f64) -> Self {
        self.u = un / self.n_atoms;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    /// Mirror steady-state denominator Gamma_m^2 + omega_m^2.
    pub fn mirror_denominator(&self) -> f64 {
        self.gamma_m * self.gamma_m + self.omega_m * self.omega_m
    }
}

/// A point in the 7-dimensional real phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    pub a_re: f64,
    pub a_im: f64,
    pub b_re: f64,
    pub b_im: f64,
}

impl State {
    pub const fn from_array(v: [f64; DIM]) -> Self {
        Self {
            sx: v[0],
            sy: v[1],
            sz: v[2],
            a_re: v[3],
            a_im: v[4],
            b_re: v[5],
            b_im: v[6],
        }
    }

    pub const fn to_array(&self) -> [f64; DIM] {
        [self.sx, self.sy, self.sz, self.a_re, self.a_im, self.b_re, self.b_im]
    }

    /// All spins down, no photons, mirror at rest.
    pub fn normal(p: &SystemParams) -> Self {
        Self { sz: -p.half_n(), ..Self::default() }
    }

    /// All spins up, no photons, mirror at rest.
    pub fn inverted(p: &SystemParams) -> Self {
        Self { sz: p.half_n(), ..Self::default() }
    }

    /// Tilt the spin away from the z axis by `fraction` of N/2 along x while
    /// keeping the spin length; cavity and mirror untouched.
    pub fn tilted(mut self, fraction: f64, half_n: f64) -> Self {
        let sx = fraction * half_n;
        self.sx = sx;
        self.sy = 0.0;
        self.sz = self.sz.signum() * (half_n * half_n - sx * sx).max(0.0).sqrt();
        self
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Cavity photon number |a|^2.
    pub fn photon_number(&self) -> f64 {
        self.a_re * self.a_re + self.a_im * self.a_im
    }

    /// Euclidean norm over all 7 coordinates.
    pub fn norm(&self) -> f64 {
        self.to_array().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &State) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Image under the Z2 parity (Sx, Sy, a) -> (-Sx, -Sy, -a).
    pub fn parity_image(&self) -> Self {
        Self {
            sx: -self.sx,
            sy: -self.sy,
            a_re: -self.a_re,
            a_im: -self.a_im,
            ..*self
        }
    }
}

/// Squared spin length sx^2 + sy^2 + sz^2.
pub fn spin_norm(s: &State) -> f64 {
    s.sx * s.sx + s.sy * s.sy + s.sz * s.sz
}

/// Time derivative of the state under the mean-field equations, including
/// the mechanical pump term on the mirror.
pub fn rhs(p: &SystemParams, s: &State) -> Result<State> {
    if !s.is_finite() {
        return Err(DickeError::NonFinite(format!("rhs evaluated at {s:?}")));
    }
    let n_ph = s.photon_number();
    let w = p.omega_a + p.u * n_ph;
    let drive = 2.0 * p.g * (2.0 * s.a_re);
    let chi = p.omega + p.u * s.sz + 2.0 * p.delta0 * s.b_re;
    let (db_re, db_im) = mirror_rhs(p, s.b_re, s.b_im, n_ph);
    Ok(State {
        sx: -w * s.sy,
        sy: w * s.sx - drive * s.sz,
        sz: drive * s.sy,
        a_re: -p.kappa * s.a_re + chi * s.a_im,
        a_im: -p.kappa * s.a_im - chi * s.a_re - 2.0 * p.g * s.sx,
        b_re: db_re,
        b_im: db_im,
    })
}

/// Mirror equation alone, driven by a given photon number:
/// b' = -i omega_m b - i (delta0 |a|^2 + eta_p) - Gamma_m b.
pub fn mirror_rhs(p: &SystemParams, b_re: f64, b_im: f64, photon_n: f64) -> (f64, f64) {
    (
        p.omega_m * b_im - p.gamma_m * b_re,
        -p.omega_m * b_re - p.delta0 * photon_n - p.eta_p - p.gamma_m * b_im,
    )
}

/// The equations of motion as an autonomous vector field.
#[derive(Debug, Clone, Copy)]
pub struct Model {
    pub params: SystemParams,
}

impl Model {
    pub fn new(params: SystemParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }
}

impl VectorField<DIM> for Model {
    fn eval(&self, _t: f64, x: &[f64; DIM]) -> Result<[f64; DIM]> {
        rhs(&self.params, &State::from_array(*x)).map(|d| d.to_array())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SystemParams {
        SystemParams::reference(8.1, 0.7, -40.0)
    }

    #[test]
    fn trivial_states_are_fixed_points() {
        let p = params();
        for s in [State::normal(&p), State::inverted(&p)] {
            let d = rhs(&p, &s).unwrap();
            assert_eq!(d.to_array(), [0.0; DIM]);
        }
    }

    #[test]
    fn pump_only_drives_mirror_imaginary_part() {
        let mut p = params();
        p.eta_p = 1.0;
        let d = rhs(&p, &State::normal(&p)).unwrap();
        assert_eq!(d.to_array(), [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn spin_norm_examples() {
        let p = params();
        let n2 = p.n_atoms * p.n_atoms / 4.0;
        assert_eq!(spin_norm(&State::normal(&p)), n2);
        assert_eq!(spin_norm(&State { sx: p.half_n(), ..State::default() }), n2);
        assert_eq!(spin_norm(&State { sx: 3.0, sy: 4.0, ..State::default() }), 25.0);
    }

    #[test]
    fn non_finite_input_rejected() {
        let p = params();
        let s = State { a_re: f64::NAN, ..State::normal(&p) };
        assert!(matches!(rhs(&p, &s), Err(DickeError::NonFinite(_))));
    }

    #[test]
    fn aggregate_conversion() {
        let p = SystemParams::from_aggregate(0.05, 3.0, 1.0, 8.1, 0.05, 0.9, -40.0, 0.05, 0.0, 1e6)
            .unwrap();
        assert!((p.lambda() - 0.9).abs() < 1e-15);
        assert!((p.un() + 40.0).abs() < 1e-12);
        assert!((p.g - 9e-4).abs() < 1e-18);
    }

    #[test]
    fn validation_rejects_bad_values() {
        let mut p = params();
        p.kappa = 0.0;
        assert!(p.validate().is_err());
        let mut p = params();
        p.eta_p = -0.1;
        assert!(p.validate().is_err());
        let mut p = params();
        p.n_atoms = 1.0;
        assert!(p.validate().is_err());
        let mut p = params();
        p.omega = f64::INFINITY;
        assert!(p.validate().is_err());
        // negative back-action is allowed
        let mut p = params();
        p.u = -1e-5;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn tilted_keeps_spin_length() {
        let p = params();
        let s = State::normal(&p).tilted(1e-3, p.half_n());
        let rel = (spin_norm(&s) - p.half_n().powi(2)).abs() / p.half_n().powi(2);
        assert!(rel < 1e-15);
        assert!(s.sz < 0.0);
        assert_eq!(s.sx, 500.0);
    }
}
