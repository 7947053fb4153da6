use nalgebra::{Complex, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use super::jacobian::{coordinate_scales, jacobian};
use crate::error::{DickeError, Result};
use crate::model::{rhs, State, SystemParams, DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex<f64>> for Eigenvalue {
    fn from(c: Complex<f64>) -> Self {
        Self { re: c.re, im: c.im }
    }
}

/// Thresholds for the stability verdict (MHz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityOptions {
    pub eps_stab: f64,
    pub eps_zero: f64,
    /// Residual above which the input is not accepted as a fixed point,
    /// relative to N.
    pub residual_tol_rel: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self { eps_stab: 1e-6, eps_zero: 1e-6, residual_tol_rel: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Full 7-point spectrum, sorted by descending real part.
    pub eigenvalues: Vec<Eigenvalue>,
    /// Spectrum restricted to the spin-sphere tangent space (6 values).
    pub reduced: Vec<Eigenvalue>,
    pub verdict: Stability,
    /// Leading Hurwitz minors of the reduced characteristic polynomial;
    /// all positive iff every reduced eigenvalue has negative real part.
    pub hurwitz_minors: Vec<f64>,
}

impl StabilityReport {
    pub fn max_reduced_re(&self) -> f64 {
        self.reduced.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn sort_desc(mut v: Vec<Eigenvalue>) -> Vec<Eigenvalue> {
    v.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    v
}

/// Jacobian in coordinates scaled by [`coordinate_scales`]; same spectrum,
/// much better conditioned.
fn scaled_jacobian(p: &SystemParams, s: &State) -> SMatrix<f64, DIM, DIM> {
    let sc = coordinate_scales(p);
    let mut j = jacobian(p, s);
    for r in 0..DIM {
        for c in 0..DIM {
            j[(r, c)] *= sc[c] / sc[r];
        }
    }
    j
}

/// Orthonormal basis (as columns) of the complement of the spin-sphere
/// normal, via a Householder reflection.
fn tangent_basis(s: &State) -> SMatrix<f64, DIM, 6> {
    let mut normal = SVector::<f64, DIM>::zeros();
    normal[0] = s.sx;
    normal[1] = s.sy;
    normal[2] = s.sz;
    let len = normal.norm();
    if len == 0.0 {
        normal[2] = 1.0;
    } else {
        normal /= len;
    }
    let k = normal.iamax();
    let mut v = normal;
    v[k] += normal[k].signum();
    let house = SMatrix::<f64, DIM, DIM>::identity() - v * v.transpose() * (2.0 / v.norm_squared());
    let mut basis = SMatrix::<f64, DIM, 6>::zeros();
    let mut col = 0;
    for c in 0..DIM {
        if c != k {
            basis.set_column(col, &house.column(c));
            col += 1;
        }
    }
    basis
}

/// Coefficients a_1..a_n of the monic polynomial with the given roots.
fn char_poly(roots: &[Complex<f64>]) -> Vec<f64> {
    let mut coeffs = vec![Complex::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex::new(0.0, 0.0); coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        coeffs = next;
    }
    coeffs.into_iter().skip(1).map(|c| c.re).collect()
}

/// Leading principal minors of the Hurwitz matrix for x^n + a_1 x^{n-1} + ... + a_n.
pub fn hurwitz_minors(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let coef = |k: isize| -> f64 {
        if k == 0 {
            1.0
        } else if k < 0 || k as usize > n {
            0.0
        } else {
            a[k as usize - 1]
        }
    };
    let h = nalgebra::DMatrix::from_fn(n, n, |i, j| coef(2 * (j as isize + 1) - (i as isize + 1)));
    (1..=n).map(|k| h.view((0, 0), (k, k)).clone_owned().determinant()).collect()
}

/// Linear stability of a fixed point from the Jacobian spectrum.
///
/// Spin-length conservation makes one direction exactly neutral; it is
/// removed by restricting the Jacobian to the tangent space of the spin
/// sphere before the verdict is taken.
pub fn assess_stability(
    p: &SystemParams,
    fp: &State,
    opts: &StabilityOptions,
) -> Result<StabilityReport> {
    let residual = rhs(p, fp)?.norm();
    let tol = opts.residual_tol_rel * p.n_atoms;
    if residual > tol {
        return Err(DickeError::NotFixedPoint { residual, tolerance: tol });
    }
    Ok(spectrum(p, fp, opts))
}

/// Spectrum and verdict without the fixed-point precondition check.
pub fn spectrum(p: &SystemParams, s: &State, opts: &StabilityOptions) -> StabilityReport {
    let j = scaled_jacobian(p, s);
    let full: Vec<Eigenvalue> = j.complex_eigenvalues().iter().map(|&c| c.into()).collect();

    let q = tangent_basis(s);
    let reduced_m: SMatrix<f64, 6, 6> = q.transpose() * j * q;
    let reduced_c: Vec<Complex<f64>> = reduced_m.complex_eigenvalues().iter().copied().collect();
    let minors = hurwitz_minors(&char_poly(&reduced_c));
    let reduced: Vec<Eigenvalue> = reduced_c.into_iter().map(Eigenvalue::from).collect();

    let max_re = reduced.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    let verdict = if max_re > opts.eps_stab {
        Stability::Unstable
    } else if max_re >= -opts.eps_stab {
        Stability::Marginal
    } else {
        Stability::Stable
    };
    StabilityReport {
        eigenvalues: sort_desc(full),
        reduced: sort_desc(reduced),
        verdict,
        hurwitz_minors: minors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steadystate::closed_form::{sra_boundary, TrivialBranch};

    #[test]
    fn normal_state_stable_below_threshold() {
        let p = SystemParams::reference(8.1, 0.3, 0.0);
        let rep = assess_stability(&p, &State::normal(&p), &StabilityOptions::default()).unwrap();
        assert_eq!(rep.verdict, Stability::Stable, "{:?}", rep.reduced);
        assert!(rep.hurwitz_minors.iter().all(|&m| m > 0.0));
    }

    #[test]
    fn normal_state_unstable_above_threshold() {
        let p = SystemParams::reference(8.1, 0.6, 0.0);
        let rep = assess_stability(&p, &State::normal(&p), &StabilityOptions::default()).unwrap();
        assert_eq!(rep.verdict, Stability::Unstable);
        assert!(rep.max_reduced_re() > 0.0);
        assert!(rep.hurwitz_minors.iter().any(|&m| m <= 0.0));
    }

    #[test]
    fn threshold_matches_closed_form() {
        let base = SystemParams::reference(5.0, 0.0, -40.0);
        let lc = sra_boundary(&base, TrivialBranch::Normal).unwrap();
        let opts = StabilityOptions::default();
        let below = base.with_lambda(lc * 0.999);
        let above = base.with_lambda(lc * 1.001);
        assert!(spectrum(&below, &State::normal(&below), &opts).max_reduced_re() < 0.0);
        assert!(spectrum(&above, &State::normal(&above), &opts).max_reduced_re() > 0.0);
    }

    #[test]
    fn one_neutral_mode_in_full_spectrum() {
        let p = SystemParams::reference(8.1, 0.3, 0.0);
        let rep = spectrum(&p, &State::normal(&p), &StabilityOptions::default());
        assert_eq!(rep.eigenvalues.len(), 7);
        assert_eq!(rep.reduced.len(), 6);
        assert!(rep.eigenvalues.iter().any(|e| e.re.abs() < 1e-9));
    }

    #[test]
    fn rejects_non_fixed_point() {
        let p = SystemParams::reference(8.1, 0.3, 0.0);
        let s = State::normal(&p).tilted(0.1, p.half_n());
        assert!(matches!(
            assess_stability(&p, &s, &StabilityOptions::default()),
            Err(DickeError::NotFixedPoint { .. })
        ));
    }

    #[test]
    fn hurwitz_of_known_polynomials() {
        // (x+1)(x+2)(x+3) = x^3 + 6x^2 + 11x + 6
        let m = hurwitz_minors(&[6.0, 11.0, 6.0]);
        assert!(m.iter().all(|&v| v > 0.0));
        // (x-1)(x+2)(x+3) = x^3 + 4x^2 + x - 6
        let m = hurwitz_minors(&[4.0, 1.0, -6.0]);
        assert!(m.iter().any(|&v| v <= 0.0));
    }
}
