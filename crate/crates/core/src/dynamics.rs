//! Time integration, relaxation times and limit-cycle detection.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{DickeError, Result};
use crate::model::{Model, State, SystemParams};
use crate::ode::{self, AdaptiveOptions};
use crate::steadystate::{newton_solve, FixedPoint, NewtonOptions, StabilityOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[serde(alias = "rk4")]
    FixedRk4,
    #[serde(alias = "rk45", alias = "dopri45")]
    AdaptiveRk45,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step, or initial step for the adaptive method (us).
    pub dt: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub t_end: f64,
    pub sample_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::FixedRk4,
            dt: 1e-3,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            t_end: 2000.0,
            sample_every: 100,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(DickeError::Config(m.to_string()));
        if !(self.dt > 0.0) {
            return bad("integrator dt must be > 0");
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return bad("integrator tolerances must be > 0");
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return bad("integrator t_end must be > 0");
        }
        if self.sample_every < 1 {
            return bad("integrator sample_every must be >= 1");
        }
        Ok(())
    }

    pub fn rk4(dt: f64, t_end: f64, sample_every: usize) -> Self {
        Self { method: Method::FixedRk4, dt, t_end, sample_every, ..Self::default() }
    }

    pub fn adaptive(tol: f64, t_end: f64, sample_every: usize) -> Self {
        Self {
            method: Method::AdaptiveRk45,
            dt: 1e-3,
            abs_tol: tol,
            rel_tol: tol,
            t_end,
            sample_every,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub params: SystemParams,
    pub step_stats: StepStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &State {
        self.states.last().expect("trajectory has at least the initial sample")
    }

    pub fn duration(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0) - self.times.first().copied().unwrap_or(0.0)
    }

    /// Write the trajectory as CSV with a header row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "Sx", "Sy", "Sz", "Re_a", "Im_a", "Re_b", "Im_b", "photon_n"])?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let row = [*t, s.sx, s.sy, s.sz, s.a_re, s.a_im, s.b_re, s.b_im, s.photon_number()];
            wr.write_record(row.iter().map(|v| v.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Integrate the equations of motion from `s0`.
pub fn integrate(p: &SystemParams, s0: &State, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let model = Model::new(*p)?;
    if !s0.is_finite() {
        return Err(DickeError::NonFinite("initial state".into()));
    }
    let sol = match cfg.method {
        Method::FixedRk4 => ode::rk4_fixed(&model, 0.0, s0.to_array(), cfg.dt, cfg.t_end, cfg.sample_every)?,
        Method::AdaptiveRk45 => ode::dopri45(
            &model,
            0.0,
            s0.to_array(),
            cfg.t_end,
            AdaptiveOptions { h0: cfg.dt, abs_tol: cfg.abs_tol, rel_tol: cfg.rel_tol, h_max: cfg.t_end },
            cfg.sample_every,
        )?,
    };
    Ok(Trajectory {
        times: sol.times,
        states: sol.states.into_iter().map(State::from_array).collect(),
        params: *p,
        step_stats: StepStats { accepted: sol.accepted, rejected: sol.rejected },
    })
}

/// End state only; no samples kept.
pub fn integrate_final(p: &SystemParams, s0: &State, cfg: &IntegratorConfig) -> Result<State> {
    match cfg.method {
        Method::FixedRk4 => {
            cfg.validate()?;
            let model = Model::new(*p)?;
            ode::rk4_final(&model, 0.0, s0.to_array(), cfg.dt, cfg.t_end).map(State::from_array)
        }
        Method::AdaptiveRk45 => {
            let big = IntegratorConfig { sample_every: usize::MAX, ..*cfg };
            integrate(p, s0, &big).map(|tr| *tr.last_state())
        }
    }
}

/// Start state for evolutions "from the normal/inverted state": spin tipped
/// by `fraction` of N/2 along x, length preserved, oscillators empty.
pub fn perturbed_trivial(p: &SystemParams, inverted: bool, fraction: f64) -> State {
    let base = if inverted { State::inverted(p) } else { State::normal(p) };
    base.tilted(fraction, p.half_n())
}

/// Default tilt used for perturbed starts.
pub const DEFAULT_PERTURBATION: f64 = 1e-3;

/// Earliest time after which the trajectory stays within
/// `band * |target|` of the target state. `None` when the last 10% of the
/// trajectory is not inside the band.
pub fn relaxation_time(tr: &Trajectory, target: &FixedPoint, band: f64) -> Option<f64> {
    if tr.is_empty() {
        return None;
    }
    let thr = band * target.state.norm();
    let t0 = tr.times[0];
    let t_tail = tr.times[tr.len() - 1] - 0.1 * tr.duration();
    let inside: Vec<bool> = tr.states.iter().map(|s| s.distance(&target.state) <= thr).collect();
    let tail_ok = tr.times.iter().zip(&inside).filter(|(t, _)| **t >= t_tail).all(|(_, &ok)| ok);
    if !tail_ok {
        return None;
    }
    match inside.iter().rposition(|&ok| !ok) {
        None => Some(0.0),
        Some(i) => Some(tr.times[i + 1] - t0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleVerdict {
    Converged,
    LimitCycle,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CycleOptions {
    /// Peak-to-peak S_z below this (relative to N) counts as converged.
    pub converge_amp_rel: f64,
    /// Second-half / first-half tail amplitude ratio for a sustained cycle.
    pub ratio_threshold: f64,
    /// Minimum number of dominant periods the trajectory must cover.
    pub min_periods: f64,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self { converge_amp_rel: 1e-4, ratio_threshold: 0.9, min_periods: 20.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub verdict: CycleVerdict,
    pub late_amplitude: f64,
    /// Second-half over first-half peak-to-peak ratio inside the window.
    pub amplitude_ratio: f64,
    pub dominant_period: Option<f64>,
    pub attractor: Option<FixedPoint>,
}

fn peak_to_peak(v: &[f64]) -> f64 {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if v.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Mean spacing between upward mean-crossings, linearly interpolated.
fn crossing_period(t: &[f64], v: &[f64]) -> Option<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let mut ups = Vec::new();
    for i in 1..v.len() {
        let (a, b) = (v[i - 1] - mean, v[i] - mean);
        if a < 0.0 && b >= 0.0 {
            ups.push(t[i - 1] + (t[i] - t[i - 1]) * (-a) / (b - a));
        }
    }
    if ups.len() < 3 {
        return None;
    }
    Some((ups[ups.len() - 1] - ups[0]) / (ups.len() - 1) as f64)
}

/// Classify the late-time behaviour from the tail fraction `window` of S_z.
pub fn detect_cycle(tr: &Trajectory, window: f64, opts: &CycleOptions) -> Result<CycleReport> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(DickeError::Config(format!("cycle window must lie in (0, 1], got {window}")));
    }
    if tr.len() < 16 {
        return Err(DickeError::TrajectoryTooShort(format!(
            "only {} samples; increase t_end or reduce sample_every",
            tr.len()
        )));
    }
    let p = &tr.params;
    let t_last = tr.times[tr.len() - 1];
    let t_start = t_last - window * tr.duration();
    let first = tr.times.partition_point(|&t| t < t_start);
    let times = &tr.times[first..];
    let sz: Vec<f64> = tr.states[first..].iter().map(|s| s.sz).collect();
    if sz.len() < 8 {
        return Err(DickeError::TrajectoryTooShort(format!(
            "analysis window holds {} samples; increase t_end or window",
            sz.len()
        )));
    }
    let amp = peak_to_peak(&sz);
    let half = sz.len() / 2;
    let (a1, a2) = (peak_to_peak(&sz[..half]), peak_to_peak(&sz[half..]));
    let ratio = if a1 > 0.0 { a2 / a1 } else { 1.0 };

    if amp < opts.converge_amp_rel * p.n_atoms {
        let nopts = NewtonOptions::default();
        let attractor = newton_solve(p, tr.last_state(), &nopts)
            .ok()
            .map(|s| FixedPoint::from_state(p, s, &StabilityOptions::default()));
        return Ok(CycleReport {
            verdict: CycleVerdict::Converged,
            late_amplitude: amp,
            amplitude_ratio: ratio,
            dominant_period: None,
            attractor,
        });
    }

    let period = crossing_period(times, &sz);
    if let Some(per) = period {
        if tr.duration() < opts.min_periods * per {
            return Err(DickeError::TrajectoryTooShort(format!(
                "trajectory covers {:.1} periods of {per:.3} us, need {}; increase t_end",
                tr.duration() / per,
                opts.min_periods
            )));
        }
    }
    let verdict = match period {
        Some(per) if ratio >= opts.ratio_threshold && per > 0.0 => CycleVerdict::LimitCycle,
        _ => CycleVerdict::Undecided,
    };
    Ok(CycleReport {
        verdict,
        late_amplitude: amp,
        amplitude_ratio: ratio,
        dominant_period: if verdict == CycleVerdict::LimitCycle { period } else { None },
        attractor: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steadystate::Stability;

    #[test]
    fn normal_state_is_stationary() {
        let p = SystemParams::reference(8.1, 0.3, 0.0);
        let tr = integrate(&p, &State::normal(&p), &IntegratorConfig::rk4(1e-2, 50.0, 100)).unwrap();
        for s in &tr.states {
            assert!(s.distance(&State::normal(&p)) <= 1e-10 * p.n_atoms);
        }
        let fp = FixedPoint::from_state(&p, State::normal(&p), &StabilityOptions::default());
        assert_eq!(relaxation_time(&tr, &fp, 0.01), Some(0.0));
    }

    #[test]
    fn constant_trajectory_converges() {
        let p = SystemParams::reference(8.1, 0.3, 0.0);
        let tr = integrate(&p, &State::normal(&p), &IntegratorConfig::rk4(1e-2, 100.0, 10)).unwrap();
        let rep = detect_cycle(&tr, 0.25, &CycleOptions::default()).unwrap();
        assert_eq!(rep.verdict, CycleVerdict::Converged);
        assert_eq!(rep.late_amplitude, 0.0);
        let fp = rep.attractor.unwrap();
        assert_eq!(fp.stability, Stability::Stable);
    }

    #[test]
    fn too_short_trajectory_is_an_error() {
        let p = SystemParams::reference(8.1, 0.3, 0.0);
        let tr = integrate(&p, &State::normal(&p), &IntegratorConfig::rk4(1e-2, 0.05, 1)).unwrap();
        assert!(matches!(
            detect_cycle(&tr, 0.5, &CycleOptions::default()),
            Err(DickeError::TrajectoryTooShort(_))
        ));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let p = SystemParams::reference(8.1, 0.3, 0.0);
        let tr = integrate(&p, &State::normal(&p), &IntegratorConfig::rk4(0.1, 1.0, 5)).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,Sx,Sy,Sz,Re_a,Im_a,Re_b,Im_b,photon_n");
        assert_eq!(lines.count(), tr.len());
    }

    #[test]
    fn invalid_config_rejected() {
        let p = SystemParams::reference(8.1, 0.3, 0.0);
        let cfg = IntegratorConfig { dt: 0.0, ..IntegratorConfig::default() };
        assert!(integrate(&p, &State::normal(&p), &cfg).is_err());
        let cfg = IntegratorConfig { sample_every: 0, ..IntegratorConfig::default() };
        assert!(integrate(&p, &State::normal(&p), &cfg).is_err());
    }

    #[test]
    fn relaxation_none_when_tail_outside_band() {
        let p = SystemParams::reference(8.1, 0.3, 0.0);
        let s0 = State::inverted(&p);
        let tr = integrate(&p, &s0, &IntegratorConfig::rk4(0.1, 10.0, 1)).unwrap();
        let fp = FixedPoint::from_state(&p, State::normal(&p), &StabilityOptions::default());
        assert_eq!(relaxation_time(&tr, &fp, 0.01), None);
    }
}
