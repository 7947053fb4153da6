use nalgebra::SMatrix;

use crate::model::{rhs, State, SystemParams, DIM};

pub type Jacobian = SMatrix<f64, DIM, DIM>;

/// Analytic Jacobian of the equations of motion.
///
/// Row/column order: Sx, Sy, Sz, Re a, Im a, Re b, Im b.
pub fn jacobian(p: &SystemParams, s: &State) -> Jacobian {
    let (ar, ai) = (s.a_re, s.a_im);
    let w = p.omega_a + p.u * s.photon_number();
    let chi = p.omega + p.u * s.sz + 2.0 * p.delta0 * s.b_re;
    let g4 = 4.0 * p.g;
    let mut j = Jacobian::zeros();

    j[(0, 1)] = -w;
    j[(0, 3)] = -2.0 * p.u * ar * s.sy;
    j[(0, 4)] = -2.0 * p.u * ai * s.sy;

    j[(1, 0)] = w;
    j[(1, 2)] = -g4 * ar;
    j[(1, 3)] = 2.0 * p.u * ar * s.sx - g4 * s.sz;
    j[(1, 4)] = 2.0 * p.u * ai * s.sx;

    j[(2, 1)] = g4 * ar;
    j[(2, 3)] = g4 * s.sy;

    j[(3, 2)] = p.u * ai;
    j[(3, 3)] = -p.kappa;
    j[(3, 4)] = chi;
    j[(3, 5)] = 2.0 * p.delta0 * ai;

    j[(4, 0)] = -2.0 * p.g;
    j[(4, 2)] = -p.u * ar;
    j[(4, 3)] = -chi;
    j[(4, 4)] = -p.kappa;
    j[(4, 5)] = -2.0 * p.delta0 * ar;

    j[(5, 5)] = -p.gamma_m;
    j[(5, 6)] = p.omega_m;

    j[(6, 3)] = -2.0 * p.delta0 * ar;
    j[(6, 4)] = -2.0 * p.delta0 * ai;
    j[(6, 5)] = -p.omega_m;
    j[(6, 6)] = -p.gamma_m;
    j
}

/// Natural magnitude of each coordinate: N/2 for spin, sqrt(N) for the
/// oscillator quadratures.
pub fn coordinate_scales(p: &SystemParams) -> [f64; DIM] {
    let h = p.half_n();
    let r = p.n_atoms.sqrt();
    [h, h, h, r, r, r, r]
}

/// Central finite-difference Jacobian with step `rel_step` times the
/// coordinate scale.
pub fn finite_difference_jacobian(p: &SystemParams, s: &State, rel_step: f64) -> Jacobian {
    let scales = coordinate_scales(p);
    let x = s.to_array();
    let mut j = Jacobian::zeros();
    for c in 0..DIM {
        let h = rel_step * scales[c];
        let mut xp = x;
        let mut xm = x;
        xp[c] += h;
        xm[c] -= h;
        let fp = rhs(p, &State::from_array(xp)).expect("finite").to_array();
        let fm = rhs(p, &State::from_array(xm)).expect("finite").to_array();
        for r in 0..DIM {
            j[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    j
}

/// Largest entrywise relative gap between the analytic and central
/// finite-difference Jacobians, compared in scaled coordinates. Entries
/// smaller than `floor` are compared absolutely against `floor`.
pub fn jacobian_mismatch(p: &SystemParams, s: &State, rel_step: f64, floor: f64) -> f64 {
    let ja = jacobian(p, s);
    let jf = finite_difference_jacobian(p, s, rel_step);
    let scales = coordinate_scales(p);
    let mut worst: f64 = 0.0;
    for r in 0..DIM {
        for c in 0..DIM {
            let a = ja[(r, c)] * scales[c] / scales[r];
            let f = jf[(r, c)] * scales[c] / scales[r];
            worst = worst.max((a - f).abs() / a.abs().max(floor));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_finite_differences_at_generic_point() {
        let mut p = SystemParams::reference(3.0, 1.2, -40.0);
        p.eta_p = 0.7;
        let s = State {
            sx: 2.1e5,
            sy: -1.3e5,
            sz: -4.1e5,
            a_re: 12.0,
            a_im: -30.0,
            b_re: -40.0,
            b_im: 3.0,
        };
        let ja = jacobian(&p, &s);
        let jf = finite_difference_jacobian(&p, &s, 1e-6);
        let scales = coordinate_scales(&p);
        for r in 0..DIM {
            for c in 0..DIM {
                // compare in scaled coordinates so every entry has a sensible size
                let a = ja[(r, c)] * scales[c] / scales[r];
                let f = jf[(r, c)] * scales[c] / scales[r];
                let tol = 1e-5 * a.abs().max(1e-3);
                assert!((a - f).abs() <= tol, "({r},{c}) analytic {a} fd {f}");
            }
        }
        assert!(jacobian_mismatch(&p, &s, 1e-6, 1e-3) <= 1e-5);
    }
}
