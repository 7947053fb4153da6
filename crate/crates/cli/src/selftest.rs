//! Invariant suite run by `dicke selftest`.

use std::fmt;

use dicke_core::dynamics::{integrate, integrate_final, perturbed_trivial, IntegratorConfig};
use dicke_core::phases::{sweep, Mode};
use dicke_core::steadystate::{
    find_all_fixed_points, jacobian_mismatch, pump_shift, spectrum, sra_boundary, NewtonOptions, StabilityOptions,
    TrivialBranch,
};
use dicke_core::{rhs, spin_norm, State, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ResolvedConfig;
use crate::with_threads;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub limit: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<22} measured={:.4e} limit {}", self.name, self.measured, self.limit)?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, measured: f64, limit: &str, passed: bool, detail: String) -> Check {
    Check { name: name.into(), measured, limit: limit.into(), passed: passed && !measured.is_nan(), detail }
}

/// Strongly driven reference point: UN = -40, omega = 5, lambda = 0.605,
/// started far from equilibrium so every coordinate moves.
fn excited(cfg: &ResolvedConfig) -> (SystemParams, State) {
    let n = cfg.params.n_atoms;
    let p = SystemParams { omega: 5.0, g: 0.605 / n.sqrt(), u: -40.0 / n, eta_p: 0.0, ..cfg.params };
    let mut s = perturbed_trivial(&p, false, 0.3);
    s.a_re = 30.0;
    s.a_im = -20.0;
    (p, s)
}

fn spin_drift(cfg: &ResolvedConfig) -> Check {
    let (p, s0) = excited(cfg);
    let steps = (700.0 / cfg.integrator.dt).round() as usize;
    let icfg = IntegratorConfig::rk4(cfg.integrator.dt, 700.0, (steps / 1000).max(1));
    let n0 = spin_norm(&s0);
    let drift = match integrate(&p, &s0, &icfg) {
        Ok(tr) => tr.states.iter().map(|s| (spin_norm(s) - n0).abs() / n0).fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    check("spin_norm_drift", drift, "< 1e-8", drift < 1e-8, format!("700 us at dt = {}", cfg.integrator.dt))
}

fn rk4_order(cfg: &ResolvedConfig) -> Check {
    let (p, s0) = excited(cfg);
    let h = cfg.integrator.dt;
    let t = 100.0;
    let run = |dt: f64| integrate_final(&p, &s0, &IntegratorConfig::rk4(dt, t, usize::MAX)).ok();
    let order = match (run(h), run(h / 2.0), run(h / 16.0)) {
        (Some(a), Some(b), Some(r)) => (a.distance(&r) / b.distance(&r)).log2(),
        _ => f64::NAN,
    };
    let ok = (order - 4.0).abs() <= 0.3;
    check("rk4_order", order, "4 +/- 0.3", ok, format!("dt = {h}, {h}/2 against {h}/16 over {t} us"))
}

fn jacobian_check(cfg: &ResolvedConfig) -> Check {
    let (p, s0) = excited(cfg);
    let mut states = vec![s0];
    if let Ok(search) = find_all_fixed_points(&p, &[], &NewtonOptions::default()) {
        states.extend(search.points.iter().map(|f| f.state));
    }
    let worst = states.iter().map(|s| jacobian_mismatch(&p, s, 1e-6, 1e-3)).fold(0.0, f64::max);
    check("jacobian_fd", worst, "<= 1e-5", worst <= 1e-5, format!("{} states", states.len()))
}

fn mirror_pairs(cfg: &ResolvedConfig) -> Check {
    let (p, _) = excited(cfg);
    let opts = NewtonOptions::default();
    let search = match find_all_fixed_points(&p, &[], &opts) {
        Ok(s) => s,
        Err(e) => return check("mirror_pair_symmetry", f64::NAN, "<= 1e-8", false, e.to_string()),
    };
    let scale = p.half_n() * p.kappa;
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for f in search.points.iter().filter(|f| !f.branch_tag.is_trivial()) {
        let img = f.state.parity_image();
        let res = rhs(&p, &img).map(|r| r.norm() / scale).unwrap_or(f64::INFINITY);
        let spec = |s: &State| {
            let mut e: Vec<(f64, f64)> =
                spectrum(&p, s, &StabilityOptions::default()).eigenvalues.iter().map(|e| (e.re, e.im)).collect();
            e.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            e
        };
        let (ea, eb) = (spec(&f.state), spec(&img));
        let big = ea.iter().map(|e| e.0.hypot(e.1)).fold(1e-300, f64::max);
        let gap = ea.iter().zip(&eb).map(|(a, b)| (a.0 - b.0).hypot(a.1 - b.1) / big).fold(0.0, f64::max);
        worst = worst.max(res).max(gap);
        pairs += 1;
    }
    let ok = pairs > 0 && worst <= 1e-8;
    check("mirror_pair_symmetry", worst, "<= 1e-8", ok, format!("{pairs} nontrivial points"))
}

/// Smallest coupling at which the photon number of the tilted trivial state
/// crosses 1e-6 N within 2000 us, found by bisection.
pub fn ode_critical_coupling(p: &SystemParams, branch: TrivialBranch, tilt: f64, guess: f64) -> Option<f64> {
    let inverted = branch == TrivialBranch::Inverted;
    let icfg = IntegratorConfig::adaptive(1e-10, 2000.0, 1);
    let grows = |lam: f64| {
        let q = p.with_lambda(lam);
        integrate(&q, &perturbed_trivial(&q, inverted, tilt), &icfg)
            .map(|tr| tr.states.iter().any(|s| s.photon_number() > 1e-6 * q.n_atoms))
            .unwrap_or(true)
    };
    let (mut lo, mut hi) = (0.9 * guess, 1.1 * guess);
    if grows(lo) || !grows(hi) {
        return None;
    }
    while (hi - lo) / guess > 1e-5 {
        let mid = 0.5 * (lo + hi);
        if grows(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn boundary_oracle(cfg: &ResolvedConfig) -> Check {
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for &w in &cfg.selftest.oracle_omegas {
        let p = SystemParams { omega: w, u: 0.0, eta_p: 0.0, ..cfg.params };
        let found = [TrivialBranch::Normal, TrivialBranch::Inverted]
            .into_iter()
            .find_map(|b| sra_boundary(&p, b).map(|lc| (b, lc)));
        let Some((branch, lc)) = found else { continue };
        let rel = match ode_critical_coupling(&p, branch, cfg.selftest.oracle_tilt, lc) {
            Some(l) => (l - lc).abs() / lc,
            None => f64::INFINITY,
        };
        notes.push(format!("omega={w}: {rel:.1e}"));
        worst = worst.max(rel);
    }
    check("boundary_vs_ode", worst, "< 1e-3", worst < 1e-3 && !notes.is_empty(), notes.join(", "))
}

fn pump_identity(cfg: &ResolvedConfig) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut worst: f64 = 0.0;
    let mut mismatched = 0;
    for _ in 0..cfg.selftest.pump_draws {
        let omega_m = rng.random_range(0.2..2.0);
        let p = SystemParams {
            omega: rng.random_range(-30.0..30.0),
            omega_m,
            gamma_m: 0.05 * omega_m,
            u: rng.random_range(-40.0..40.0) / cfg.params.n_atoms,
            eta_p: rng.random_range(0.0..2.0),
            ..cfg.params
        };
        let bare = SystemParams { eta_p: 0.0, omega: p.omega - pump_shift(&p), ..p };
        for b in [TrivialBranch::Normal, TrivialBranch::Inverted] {
            match (sra_boundary(&p, b), sra_boundary(&bare, b)) {
                (Some(x), Some(y)) => worst = worst.max((x - y).abs() / y),
                (None, None) => {}
                _ => mismatched += 1,
            }
        }
    }
    let ok = worst <= 1e-10 && mismatched == 0;
    check("pump_shift_identity", worst, "<= 1e-10", ok, format!("{} draws, {mismatched} existence mismatches", cfg.selftest.pump_draws))
}

fn sweep_determinism(cfg: &ResolvedConfig) -> Check {
    let n = cfg.selftest.sweep_points;
    let p = SystemParams { u: -40.0 / cfg.params.n_atoms, eta_p: 0.0, ..cfg.params };
    let omega = dicke_core::AxisSpec::new(-15.0, 15.0, n);
    let lambda = dicke_core::AxisSpec::new(0.2, 1.4, n);
    let opts = cfg.classify_options();
    let mut outputs = Vec::new();
    for &threads in &cfg.selftest.thread_counts {
        let text = with_threads(Some(threads), || sweep(&p, omega, lambda, Mode::Hybrid, &opts))
            .ok()
            .and_then(|r| r.ok())
            .and_then(|d| serde_json::to_string(&d).ok());
        outputs.push(text);
    }
    let differing = outputs.iter().filter(|o| o.is_none() || **o != outputs[0]).count();
    check(
        "sweep_determinism",
        differing as f64,
        "== 0 differing runs",
        differing == 0,
        format!("{n}x{n} hybrid grid, threads {:?}", cfg.selftest.thread_counts),
    )
}

/// Run every check. Never fails early; the report carries the verdicts.
pub fn selftest(cfg: &ResolvedConfig) -> SelftestReport {
    let checks = vec![
        spin_drift(cfg),
        rk4_order(cfg),
        jacobian_check(cfg),
        mirror_pairs(cfg),
        boundary_oracle(cfg),
        pump_identity(cfg),
        sweep_determinism(cfg),
    ];
    SelftestReport { checks }
}
