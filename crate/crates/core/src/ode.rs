//! Explicit Runge-Kutta integrators over fixed-size real vectors.

use crate::error::{DickeError, Result};

/// An autonomous or time-dependent vector field x' = f(t, x).
pub trait VectorField<const D: usize> {
    fn eval(&self, t: f64, x: &[f64; D]) -> Result<[f64; D]>;
}

impl<const D: usize, F> VectorField<D> for F
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    fn eval(&self, t: f64, x: &[f64; D]) -> Result<[f64; D]> {
        Ok(self(t, x))
    }
}

/// Sampled output of an integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<const D: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; D]>,
    pub accepted: usize,
    pub rejected: usize,
}

impl<const D: usize> Solution<D> {
    fn new(t0: f64, x0: [f64; D]) -> Self {
        Self { times: vec![t0], states: vec![x0], accepted: 0, rejected: 0 }
    }

    fn push(&mut self, t: f64, x: [f64; D]) {
        if self.times.last().is_some_and(|&last| t <= last) {
            return;
        }
        self.times.push(t);
        self.states.push(x);
    }

    pub fn last(&self) -> (f64, &[f64; D]) {
        let i = self.times.len() - 1;
        (self.times[i], &self.states[i])
    }
}

#[inline]
fn axpy<const D: usize>(x: &[f64; D], h: f64, k: &[f64; D]) -> [f64; D] {
    std::array::from_fn(|i| x[i] + h * k[i])
}

fn finite<const D: usize>(x: &[f64; D]) -> bool {
    x.iter().all(|v| v.is_finite())
}

fn eval_or_blowup<const D: usize, F: VectorField<D>>(
    f: &F,
    t: f64,
    x: &[f64; D],
    last_valid_time: f64,
) -> Result<[f64; D]> {
    match f.eval(t, x) {
        Ok(k) if finite(&k) => Ok(k),
        Ok(_) | Err(DickeError::NonFinite(_)) => Err(DickeError::BlowUp { last_valid_time }),
        Err(e) => Err(e),
    }
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step<const D: usize, F: VectorField<D>>(
    f: &F,
    t: f64,
    x: &[f64; D],
    h: f64,
) -> Result<[f64; D]> {
    let k1 = eval_or_blowup(f, t, x, t)?;
    let k2 = eval_or_blowup(f, t + 0.5 * h, &axpy(x, 0.5 * h, &k1), t)?;
    let k3 = eval_or_blowup(f, t + 0.5 * h, &axpy(x, 0.5 * h, &k2), t)?;
    let k4 = eval_or_blowup(f, t + h, &axpy(x, h, &k3), t)?;
    let out: [f64; D] =
        std::array::from_fn(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    if !finite(&out) {
        return Err(DickeError::BlowUp { last_valid_time: t });
    }
    Ok(out)
}

/// Fixed-step RK4 from `t0` to `t_end`.
///
/// Step times are computed as `t0 + k dt` (no accumulated drift), with the
/// final step shortened to land exactly on `t_end`. Every `sample_every`-th
/// step is recorded, and the end point always is.
pub fn rk4_fixed<const D: usize, F: VectorField<D>>(
    f: &F,
    t0: f64,
    x0: [f64; D],
    dt: f64,
    t_end: f64,
    sample_every: usize,
) -> Result<Solution<D>> {
    let mut sol = Solution::new(t0, x0);
    let n_steps = ((t_end - t0) / dt - 1e-9).ceil().max(0.0) as usize;
    let sample_every = sample_every.max(1);
    let mut x = x0;
    let mut t = t0;
    for k in 1..=n_steps {
        let t_next = if k == n_steps { t_end } else { t0 + k as f64 * dt };
        x = rk4_step(f, t, &x, t_next - t)?;
        t = t_next;
        sol.accepted += 1;
        if k % sample_every == 0 || k == n_steps {
            sol.push(t, x);
        }
    }
    Ok(sol)
}

/// Fixed-step RK4 returning only the end state. Avoids building the sample
/// vectors for long oracle runs.
pub fn rk4_final<const D: usize, F: VectorField<D>>(
    f: &F,
    t0: f64,
    x0: [f64; D],
    dt: f64,
    t_end: f64,
) -> Result<[f64; D]> {
    let n_steps = ((t_end - t0) / dt - 1e-9).ceil().max(0.0) as usize;
    let mut x = x0;
    let mut t = t0;
    for k in 1..=n_steps {
        let t_next = if k == n_steps { t_end } else { t0 + k as f64 * dt };
        x = rk4_step(f, t, &x, t_next - t)?;
        t = t_next;
    }
    Ok(x)
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// error weights: b - b*
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Tolerances and step limits for the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub h0: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub h_max: f64,
}

/// Adaptive Dormand-Prince 5(4) with FSAL and a scaled max-norm error test.
///
/// Each accepted step satisfies |err_i| <= abs_tol + rel_tol * max(|x_i|, |x_i'|).
pub fn dopri45<const D: usize, F: VectorField<D>>(
    f: &F,
    t0: f64,
    x0: [f64; D],
    t_end: f64,
    opts: AdaptiveOptions,
    sample_every: usize,
) -> Result<Solution<D>> {
    let mut sol = Solution::new(t0, x0);
    let sample_every = sample_every.max(1);
    let mut t = t0;
    let mut x = x0;
    let mut h = opts.h0.min(opts.h_max).min(t_end - t0);
    let mut k1 = eval_or_blowup(f, t, &x, t)?;
    let mut since_sample = 0usize;

    while t < t_end {
        let last_step = t + h >= t_end;
        if last_step {
            h = t_end - t;
        }
        let min_h = 1e-13 * t.abs().max(1.0);
        if h < min_h {
            return Err(DickeError::StepUnderflow { time: t, step: h });
        }

        let k2 = eval_or_blowup(f, t + C2 * h, &axpy(&x, h * A21, &k1), t)?;
        let x3: [f64; D] = std::array::from_fn(|i| x[i] + h * (A31 * k1[i] + A32 * k2[i]));
        let k3 = eval_or_blowup(f, t + C3 * h, &x3, t)?;
        let x4: [f64; D] =
            std::array::from_fn(|i| x[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]));
        let k4 = eval_or_blowup(f, t + C4 * h, &x4, t)?;
        let x5: [f64; D] = std::array::from_fn(|i| {
            x[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        });
        let k5 = eval_or_blowup(f, t + C5 * h, &x5, t)?;
        let x6: [f64; D] = std::array::from_fn(|i| {
            x[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
        });
        let k6 = eval_or_blowup(f, t + h, &x6, t)?;
        let x_new: [f64; D] = std::array::from_fn(|i| {
            x[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
        });
        if !finite(&x_new) {
            return Err(DickeError::BlowUp { last_valid_time: t });
        }
        let k7 = eval_or_blowup(f, t + h, &x_new, t)?;

        let mut err = 0.0f64;
        for i in 0..D {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = opts.abs_tol + opts.rel_tol * x[i].abs().max(x_new[i].abs());
            err = err.max((e / scale).abs());
        }

        if err <= 1.0 {
            t = if last_step { t_end } else { t + h };
            x = x_new;
            k1 = k7;
            sol.accepted += 1;
            since_sample += 1;
            if since_sample >= sample_every || t >= t_end {
                sol.push(t, x);
                since_sample = 0;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * factor).min(opts.h_max);
        } else {
            sol.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Ok(sol)
}
