use dicke_core::dynamics::perturbed_trivial;
use dicke_core::steadystate::NewtonOptions;
use dicke_core::{
    detect_cycle, find_all_fixed_points, integrate, spin_norm, CycleOptions, CycleVerdict, FixedPoint, IntegratorConfig,
    State, SystemParams,
};

fn stable_points(p: &SystemParams) -> Vec<FixedPoint> {
    let search = find_all_fixed_points(p, &[], &NewtonOptions::default()).unwrap();
    search.points.into_iter().filter(|f| f.is_stable() && !f.branch_tag.is_trivial()).collect()
}

fn working_points() -> Vec<SystemParams> {
    vec![
        SystemParams::reference(5.0, 0.605, -40.0),
        SystemParams::reference(22.5, 0.6, 40.0),
        SystemParams { eta_p: 1.0, ..SystemParams::reference(-9.33, 1.35, -20.0) },
    ]
}

/// Kick the spin by `amp` per component, then put it back on its sphere.
fn kicked(s: &State, amp: f64) -> State {
    let mut out = State { sx: s.sx + amp, sy: s.sy - amp, sz: s.sz + amp, ..*s };
    let r = (spin_norm(s) / spin_norm(&out)).sqrt();
    out.sx *= r;
    out.sy *= r;
    out.sz *= r;
    out
}

#[test]
fn stable_points_attract_nearby_states() {
    let mut checked = 0;
    for p in working_points() {
        let n = p.n_atoms;
        for fp in stable_points(&p) {
            // long enough for the slowest mode to decay by e^-12
            let slowest = fp.jac_eigen.iter().map(|e| -e.re).filter(|r| *r > 1e-9).fold(f64::INFINITY, f64::min);
            let s0 = kicked(&fp.state, 1e-4 * n);
            let t_end = 12.0 / slowest;
            let tr = integrate(&p, &s0, &IntegratorConfig::adaptive(1e-10, t_end, 1000)).unwrap();
            let d = tr.last_state().distance(&fp.state);
            assert!(d < 1e-5 * n, "{:?} at omega {} lambda {}: {d}", fp.branch_tag, p.omega, p.lambda());
            checked += 1;
        }
    }
    assert!(checked >= 3, "only {checked} stable points");
}

#[test]
fn integrating_a_stable_point_is_converged() {
    for p in working_points() {
        for fp in stable_points(&p) {
            let tr = integrate(&p, &fp.state, &IntegratorConfig::adaptive(1e-10, 500.0, 1)).unwrap();
            let rep = detect_cycle(&tr, 0.25, &CycleOptions::default()).unwrap();
            assert_eq!(rep.verdict, CycleVerdict::Converged, "{:?}", fp.branch_tag);
        }
    }
}

#[test]
fn adaptive_and_fixed_step_agree() {
    let p = SystemParams::reference(5.0, 0.605, -40.0);
    let s0 = perturbed_trivial(&p, false, 1e-3);
    let fixed = integrate(&p, &s0, &IntegratorConfig::rk4(1e-3, 2000.0, 100_000)).unwrap();
    let adaptive = integrate(&p, &s0, &IntegratorConfig::adaptive(1e-10, 2000.0, 1_000_000)).unwrap();
    let (a, b) = (fixed.last_state(), adaptive.last_state());
    let rel = a.distance(b) / a.norm();
    assert!(rel < 1e-6, "{rel}");
}

