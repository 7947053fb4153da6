//! Steady states: closed-form branches, Newton fixed points and linear
//! stability.

pub mod closed_form;
pub mod jacobian;
pub mod sra;
pub mod stability;

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{rhs, spin_norm, State, SystemParams, DIM};

pub use closed_form::{
    dicke_critical_coupling, effective_detuning, mirror_steady, pump_shift, sra_boundary, srb_quantities,
    srb_states, srb_threshold, srb_window, SrbQuantities, TrivialBranch,
};
pub use jacobian::{coordinate_scales, finite_difference_jacobian, jacobian, jacobian_mismatch, Jacobian};
pub use stability::{assess_stability, spectrum, Eigenvalue, Stability, StabilityOptions, StabilityReport};

/// Which steady-state family a fixed point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "N")]
    Normal,
    #[serde(rename = "I")]
    Inverted,
    #[serde(rename = "SRA_N")]
    SraNormal,
    #[serde(rename = "SRA_I")]
    SraInverted,
    #[serde(rename = "SRB")]
    Srb,
    #[serde(rename = "other")]
    Other,
}

impl Branch {
    pub fn is_trivial(self) -> bool {
        matches!(self, Branch::Normal | Branch::Inverted)
    }

    /// Tag a fixed point by its spin orientation and photon content.
    pub fn classify(p: &SystemParams, s: &State) -> Self {
        let tol = 1e-6 * p.n_atoms;
        let transverse = s.sx.hypot(s.sy);
        if transverse < tol && s.photon_number() < 1e-6 {
            return if s.sz < 0.0 { Branch::Normal } else { Branch::Inverted };
        }
        if s.sy.abs() > tol {
            return Branch::Srb;
        }
        if s.sz < 0.0 {
            Branch::SraNormal
        } else if s.sz > 0.0 {
            Branch::SraInverted
        } else {
            Branch::Other
        }
    }
}

/// A converged steady state with its spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub state: State,
    pub residual_norm: f64,
    pub jac_eigen: Vec<Eigenvalue>,
    pub stability: Stability,
    pub branch_tag: Branch,
}

impl FixedPoint {
    pub fn is_stable(&self) -> bool {
        self.stability == Stability::Stable
    }

    pub fn from_state(p: &SystemParams, s: State, opts: &StabilityOptions) -> Self {
        let rep = spectrum(p, &s, opts);
        Self {
            residual_norm: rhs(p, &s).map(|d| d.norm()).unwrap_or(f64::INFINITY),
            jac_eigen: rep.eigenvalues,
            stability: rep.verdict,
            branch_tag: Branch::classify(p, &s),
            state: s,
        }
    }
}

/// JSON export record for a fixed point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointRecord {
    pub params: SystemParams,
    pub state: State,
    pub eigenvalues: Vec<Eigenvalue>,
    pub verdict: Stability,
    pub branch: Branch,
}

impl FixedPointRecord {
    pub fn new(params: SystemParams, fp: &FixedPoint) -> Self {
        Self {
            params,
            state: fp.state,
            eigenvalues: fp.jac_eigen.clone(),
            verdict: fp.stability,
            branch: fp.branch_tag,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Residual tolerance on ||rhs||, relative to N.
    pub residual_tol_rel: f64,
    /// Fixed points closer than this (relative to N) are merged.
    pub merge_tol_rel: f64,
    /// Meridian samples for the reduced SRA seed scan.
    pub sra_samples: usize,
    pub stability: StabilityOptions,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            residual_tol_rel: 1e-9,
            merge_tol_rel: 1e-6,
            sra_samples: 4000,
            stability: StabilityOptions::default(),
        }
    }
}

/// Why a seed did not yield a fixed point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed_index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSearch {
    pub points: Vec<FixedPoint>,
    pub dropped: Vec<SeedFailure>,
}

impl FixedPointSearch {
    pub fn stable(&self) -> impl Iterator<Item = &FixedPoint> {
        self.points.iter().filter(|f| f.is_stable())
    }
}

fn project_to_sphere(x: &mut [f64; DIM], radius: f64) {
    let len = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if len > 0.0 {
        let k = radius / len;
        x[0] *= k;
        x[1] *= k;
        x[2] *= k;
    }
}

/// Gauss-Newton on the steady-state equations augmented with the spin-length
/// constraint, in scaled coordinates, with backtracking.
pub fn newton_solve(p: &SystemParams, seed: &State, opts: &NewtonOptions) -> std::result::Result<State, String> {
    let scales = jacobian::coordinate_scales(p);
    let radius = p.half_n();
    let tol = opts.residual_tol_rel * p.n_atoms;
    let mut x = seed.to_array();
    if !x.iter().all(|v| v.is_finite()) {
        return Err("non-finite seed".into());
    }
    project_to_sphere(&mut x, radius);

    let scaled_residual = |x: &[f64; DIM]| -> Option<f64> {
        let r = rhs(p, &State::from_array(*x)).ok()?.to_array();
        Some(r.iter().zip(scales.iter()).map(|(v, s)| (v / s).powi(2)).sum::<f64>().sqrt())
    };

    for _ in 0..opts.max_iter {
        let s = State::from_array(x);
        let r = rhs(p, &s).map_err(|e| e.to_string())?;
        if r.norm() <= tol {
            return Ok(s);
        }
        let j = jacobian(p, &s);
        let ra = r.to_array();
        let mut a = SMatrix::<f64, 8, DIM>::zeros();
        let mut b = SVector::<f64, 8>::zeros();
        for row in 0..DIM {
            for col in 0..DIM {
                a[(row, col)] = j[(row, col)] * scales[col] / scales[row];
            }
            b[row] = -ra[row] / scales[row];
        }
        for col in 0..3 {
            a[(DIM, col)] = 2.0 * x[col] / radius;
        }
        b[DIM] = -(spin_norm(&s) - radius * radius) / (radius * radius);

        let svd = a.svd(true, true);
        let step = svd.solve(&b, 1e-13 * svd.singular_values.max()).map_err(|e| e.to_string())?;

        let f0 = scaled_residual(&x).ok_or("non-finite residual")?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let mut trial: [f64; DIM] = std::array::from_fn(|i| x[i] + t * step[i] * scales[i]);
            project_to_sphere(&mut trial, radius);
            if let Some(f1) = scaled_residual(&trial) {
                if f1 < f0 {
                    x = trial;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            let s = State::from_array(x);
            let res = rhs(p, &s).map(|d| d.norm()).unwrap_or(f64::INFINITY);
            if res <= tol {
                return Ok(s);
            }
            return Err(format!("line search stalled at residual {res:e}"));
        }
    }
    let s = State::from_array(x);
    let res = rhs(p, &s).map(|d| d.norm()).unwrap_or(f64::INFINITY);
    if res <= tol {
        Ok(s)
    } else {
        Err(format!("no convergence in {} iterations (residual {res:e})", opts.max_iter))
    }
}

/// The trivial normal and inverted fixed points, mirror displaced by the pump.
pub fn trivial_states(p: &SystemParams) -> [State; 2] {
    let (b1, b2) = mirror_steady(p, 0.0);
    let with_mirror = |s: State| State { b_re: b1, b_im: b2, ..s };
    [with_mirror(State::normal(p)), with_mirror(State::inverted(p))]
}

/// Seeds derived from the model alone: SRB closed forms and the reduced SRA
/// scan.
pub fn default_seeds(p: &SystemParams, opts: &NewtonOptions) -> Vec<State> {
    let mut seeds = srb_states(p);
    seeds.extend(sra::sra_states(p, opts.sra_samples));
    seeds
}

/// Converge every seed, deduplicate, tag and assess stability. The trivial
/// fixed points are always part of the result.
pub fn find_fixed_points(p: &SystemParams, seeds: &[State], opts: &NewtonOptions) -> Result<FixedPointSearch> {
    p.validate()?;
    let merge = opts.merge_tol_rel * p.n_atoms;
    let mut found: Vec<State> = trivial_states(p).to_vec();
    let mut dropped = Vec::new();
    for (i, seed) in seeds.iter().enumerate() {
        match newton_solve(p, seed, opts) {
            Ok(s) => {
                if !found.iter().any(|f| f.distance(&s) < merge) {
                    found.push(s);
                }
            }
            Err(reason) => dropped.push(SeedFailure { seed_index: i, reason }),
        }
    }
    let mut points: Vec<FixedPoint> =
        found.into_iter().map(|s| FixedPoint::from_state(p, s, &opts.stability)).collect();
    points.sort_by(|a, b| {
        a.branch_tag
            .cmp(&b.branch_tag)
            .then(a.state.sz.total_cmp(&b.state.sz))
            .then(a.state.sx.total_cmp(&b.state.sx))
            .then(a.state.sy.total_cmp(&b.state.sy))
    });
    Ok(FixedPointSearch { points, dropped })
}

/// [`find_fixed_points`] with [`default_seeds`] plus any extra seeds.
pub fn find_all_fixed_points(p: &SystemParams, extra: &[State], opts: &NewtonOptions) -> Result<FixedPointSearch> {
    let mut seeds = default_seeds(p, opts);
    seeds.extend_from_slice(extra);
    find_fixed_points(p, &seeds, opts)
}
