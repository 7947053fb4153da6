//! Closed-form steady-state quantities: mirror displacement, SRB branch and
//! the zero-photon SRA boundary.

use serde::{Deserialize, Serialize};

use crate::model::{State, SystemParams};

/// Which trivial state the SRA boundary is measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrivialBranch {
    /// All spins down, S_z = -N/2.
    Normal,
    /// All spins up, S_z = +N/2.
    Inverted,
}

impl TrivialBranch {
    pub fn sz(self, p: &SystemParams) -> f64 {
        match self {
            TrivialBranch::Normal => -p.half_n(),
            TrivialBranch::Inverted => p.half_n(),
        }
    }
}

/// Below this |chi| (MHz) the boundary is treated as divergent.
pub const CHI_EPS: f64 = 1e-9;

/// Stationary mirror amplitude for a fixed photon number:
/// b = -i (delta0 n + eta_p) / (Gamma_m + i omega_m).
pub fn mirror_steady(p: &SystemParams, photon_n: f64) -> (f64, f64) {
    let force = p.delta0 * photon_n + p.eta_p;
    let den = p.mirror_denominator();
    (-force * p.omega_m / den, -force * p.gamma_m / den)
}

/// Effective cavity detuning omega + U S_z + 2 delta0 b1 at a given photon
/// number, with the mirror relaxed to its stationary position.
pub fn effective_detuning(p: &SystemParams, sz: f64, photon_n: f64) -> f64 {
    let (b1, _) = mirror_steady(p, photon_n);
    p.omega + p.u * sz + 2.0 * p.delta0 * b1
}

/// Critical collective coupling lambda_c = g_c sqrt(N) at which the trivial
/// state of `branch` loses stability to an SRA superradiant state.
///
/// Returns `None` when no transition exists at this detuning: the normal
/// branch needs chi > 0, the inverted one chi < 0, and the boundary diverges
/// as |chi| -> 0.
pub fn sra_boundary(p: &SystemParams, branch: TrivialBranch) -> Option<f64> {
    let chi = effective_detuning(p, branch.sz(p), 0.0);
    if chi.abs() < CHI_EPS {
        return None;
    }
    let admissible = match branch {
        TrivialBranch::Normal => chi > 0.0,
        TrivialBranch::Inverted => chi < 0.0,
    };
    if !admissible {
        return None;
    }
    Some((p.omega_a * (chi * chi + p.kappa * p.kappa) / (4.0 * chi.abs())).sqrt())
}

/// Closed-form quantities of the SRB branch (omega_a + U |a|^2 = 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrbQuantities {
    pub photon_n: f64,
    pub sx2: f64,
    pub sz2: f64,
    pub b1: f64,
    pub b2: f64,
    pub exists: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// SRB photon number, spin components and mirror position.
///
/// S_x^2 follows from a_1 = 0 in the cavity balance:
/// S_x = -kappa a_2 / (2g), hence S_x^2 = -kappa^2 omega_a / (4 g^2 U).
pub fn srb_quantities(p: &SystemParams) -> SrbQuantities {
    if p.u == 0.0 {
        return SrbQuantities {
            photon_n: f64::NAN,
            sx2: f64::NAN,
            sz2: f64::NAN,
            b1: f64::NAN,
            b2: f64::NAN,
            exists: false,
            reason: Some("U = 0: omega_a + U|a|^2 cannot vanish".into()),
        };
    }
    let photon_n = -p.omega_a / p.u;
    let (b1, b2) = mirror_steady(p, photon_n);
    let sx2 = -p.kappa * p.kappa * p.omega_a / (4.0 * p.g * p.g * p.u);
    let sz = (p.omega + 2.0 * p.delta0 * b1) / p.u;
    let sz2 = sz * sz;
    let half_n2 = p.half_n() * p.half_n();
    let (exists, reason) = if p.u > 0.0 {
        (false, Some("U > 0: photon number would be negative".to_string()))
    } else if !(sx2 + sz2 <= half_n2) {
        (false, Some("S_x^2 + S_z^2 exceeds (N/2)^2".to_string()))
    } else {
        (true, None)
    };
    SrbQuantities { photon_n, sx2, sz2, b1, b2, exists, reason }
}

/// Full SRB fixed-point states (both signs of S_x and S_y) when the branch
/// exists. S_z is fixed by the vanishing effective detuning.
pub fn srb_states(p: &SystemParams) -> Vec<State> {
    let q = srb_quantities(p);
    if !q.exists {
        return Vec::new();
    }
    let sz = -(p.omega + 2.0 * p.delta0 * q.b1) / p.u;
    let sx_abs = q.sx2.sqrt();
    let sy_abs = (p.half_n() * p.half_n() - q.sx2 - q.sz2).max(0.0).sqrt();
    let mut out = Vec::with_capacity(4);
    for sx_sign in [1.0, -1.0] {
        for sy_sign in [1.0, -1.0] {
            let sx = sx_sign * sx_abs;
            out.push(State {
                sx,
                sy: sy_sign * sy_abs,
                sz,
                a_re: 0.0,
                a_im: -2.0 * p.g * sx / p.kappa,
                b_re: q.b1,
                b_im: q.b2,
            });
        }
    }
    out
}

/// Window edges omega = -/+ U N / 2 - 2 delta0 b1 of the SRB band, evaluated
/// with the SRB photon number. `None` when U >= 0.
pub fn srb_window(p: &SystemParams) -> Option<(f64, f64)> {
    if p.u >= 0.0 {
        return None;
    }
    let q = srb_quantities(p);
    let shift = 2.0 * p.delta0 * q.b1;
    let half = 0.5 * p.un().abs();
    Some((-half - shift, half - shift))
}

/// Smallest collective coupling at which the SRB branch exists at this
/// detuning: S_x^2 + S_z^2 = (N/2)^2 solved for g. `None` outside the window
/// or for U >= 0.
pub fn srb_threshold(p: &SystemParams) -> Option<f64> {
    if p.u >= 0.0 {
        return None;
    }
    let (b1, _) = mirror_steady(p, -p.omega_a / p.u);
    let sz = (p.omega + 2.0 * p.delta0 * b1) / p.u;
    let room = p.half_n() * p.half_n() - sz * sz;
    if room <= 0.0 {
        return None;
    }
    let g2 = -p.kappa * p.kappa * p.omega_a / (4.0 * p.u * room);
    Some((g2 * p.n_atoms).sqrt())
}

/// Detuning offset 2 delta0 eta_p omega_m / (Gamma_m^2 + omega_m^2) by which
/// the pump displaces the zero-photon boundaries.
pub fn pump_shift(p: &SystemParams) -> f64 {
    2.0 * p.delta0 * p.eta_p * p.omega_m / p.mirror_denominator()
}

/// Analytic U = 0 critical coupling 1/2 sqrt(omega_a (kappa^2 + omega^2) / omega).
pub fn dicke_critical_coupling(omega_a: f64, kappa: f64, omega: f64) -> f64 {
    0.5 * (omega_a / omega * (kappa * kappa + omega * omega)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirror_steady_examples() {
        let p = SystemParams::reference(0.0, 1.0, 0.0);
        assert_eq!(mirror_steady(&p, 0.0), (0.0, 0.0));

        let (b1, b2) = mirror_steady(&p, 1250.0);
        assert!((b1 + 62.344).abs() < 1e-3, "{b1}");
        assert!((b2 + 3.117).abs() < 1e-3, "{b2}");

        let mut q = p;
        q.eta_p = 1.0;
        let (b1, b2) = mirror_steady(&q, 0.0);
        assert!((b1 + 0.9975).abs() < 1e-4, "{b1}");
        assert!((b2 + 0.0499).abs() < 1e-4, "{b2}");
    }

    #[test]
    fn boundary_at_kappa_is_045() {
        let p = SystemParams::reference(8.1, 0.1, 0.0);
        let lc = sra_boundary(&p, TrivialBranch::Normal).unwrap();
        assert!((lc - 0.45).abs() < 1e-12, "{lc}");
        assert!(sra_boundary(&p, TrivialBranch::Inverted).is_none());
    }

    #[test]
    fn negative_detuning_only_inverted() {
        let p = SystemParams::reference(-5.0, 0.1, 0.0);
        assert!(sra_boundary(&p, TrivialBranch::Normal).is_none());
        let li = sra_boundary(&p, TrivialBranch::Inverted).unwrap();
        assert!((li - dicke_critical_coupling(0.05, 8.1, 5.0)).abs() < 1e-14);
    }

    #[test]
    fn boundary_none_at_window_edge() {
        // chi_N = omega - UN/2 vanishes at omega = -20 for UN = -40
        let p = SystemParams::reference(-20.0, 0.1, -40.0);
        assert!(sra_boundary(&p, TrivialBranch::Normal).is_none());
    }

    #[test]
    fn srb_photon_number_and_sx() {
        let p = SystemParams::reference(0.0, 1.0, -40.0);
        let q = srb_quantities(&p);
        assert!((q.photon_n - 1250.0).abs() < 1e-9);
        let ratio = q.sx2.sqrt() / p.half_n();
        assert!((ratio - 0.286).abs() < 0.01 * 0.286, "{ratio}");
        assert!(q.exists);
    }

    #[test]
    fn srb_absent_for_non_negative_u() {
        assert!(!srb_quantities(&SystemParams::reference(0.0, 1.0, 40.0)).exists);
        let q = srb_quantities(&SystemParams::reference(0.0, 1.0, 0.0));
        assert!(!q.exists);
        assert!(q.reason.is_some());
    }

    #[test]
    fn srb_threshold_marks_existence() {
        let base = SystemParams::reference(3.0, 1.0, -40.0);
        let lt = srb_threshold(&base).unwrap();
        assert!(srb_quantities(&base.with_lambda(lt * 1.001)).exists);
        assert!(!srb_quantities(&base.with_lambda(lt * 0.999)).exists);
        assert!(srb_threshold(&SystemParams::reference(3.0, 1.0, 40.0)).is_none());
        assert!(srb_threshold(&SystemParams::reference(300.0, 1.0, -40.0)).is_none());
    }

    #[test]
    fn pump_translates_boundary() {
        let mut p = SystemParams::reference(5.0, 0.1, -20.0);
        p.eta_p = 1.0;
        let shifted = SystemParams { eta_p: 0.0, ..p }.with_omega(p.omega - pump_shift(&p));
        for b in [TrivialBranch::Normal, TrivialBranch::Inverted] {
            assert_eq!(sra_boundary(&p, b).is_some(), sra_boundary(&shifted, b).is_some());
            if let (Some(x), Some(y)) = (sra_boundary(&p, b), sra_boundary(&shifted, b)) {
                assert!((x - y).abs() <= 1e-12 * y);
            }
        }
    }

    #[test]
    fn srb_states_sit_on_sphere() {
        let p = SystemParams::reference(2.0, 1.0, -40.0);
        let states = srb_states(&p);
        assert_eq!(states.len(), 4);
        for s in states {
            let r = crate::model::spin_norm(&s).sqrt() / p.half_n();
            assert!((r - 1.0).abs() < 1e-12);
            assert!((s.photon_number() - 1250.0).abs() < 1e-6);
        }
    }
}
