use dicke_core::dynamics::{integrate, perturbed_trivial, IntegratorConfig};
use dicke_core::steadystate::{
    find_all_fixed_points, mirror_steady, pump_shift, sra_boundary, srb_quantities, NewtonOptions, TrivialBranch,
};
use dicke_core::{rhs, State, SystemParams};
use proptest::prelude::*;

const N: f64 = 1e6;

fn params() -> impl Strategy<Value = SystemParams> {
    (-40.0..40.0f64, 0.0..3.0f64, -60.0..60.0f64, 0.1..2.0f64, 0.0..2.0f64, 0.0..0.2f64).prop_map(
        |(omega, lambda, un, omega_m, eta_p, delta0)| SystemParams {
            omega_m,
            gamma_m: 0.05 * omega_m,
            eta_p,
            delta0,
            ..SystemParams::reference(omega, lambda, un)
        },
    )
}

fn states() -> impl Strategy<Value = State> {
    let spin = -N / 2.0..N / 2.0;
    let field = -2000.0..2000.0f64;
    (spin.clone(), spin.clone(), spin, field.clone(), field.clone(), field.clone(), field).prop_map(
        |(sx, sy, sz, a_re, a_im, b_re, b_im)| State { sx, sy, sz, a_re, a_im, b_re, b_im },
    )
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-12 * scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parity_maps_flow_to_flow(p in params(), s in states()) {
        let f = rhs(&p, &s).unwrap();
        let g = rhs(&p, &s.parity_image()).unwrap();
        let fi = f.parity_image();
        let scale = f.norm().max(1.0);
        for (x, y) in g.to_array().iter().zip(fi.to_array()) {
            prop_assert!(close(*x, y, scale), "{x} vs {y}");
        }
    }

    #[test]
    fn spin_length_is_a_constant_of_motion(p in params(), s in states()) {
        let f = rhs(&p, &s).unwrap();
        let dot = s.sx * f.sx + s.sy * f.sy + s.sz * f.sz;
        let scale = (s.sx.abs() + s.sy.abs() + s.sz.abs()) * (f.sx.abs() + f.sy.abs() + f.sz.abs());
        prop_assert!(dot.abs() <= 1e-13 * scale.max(1.0), "{dot} vs {scale}");
    }

    #[test]
    fn uncoupled_spin_precesses_freely(p in params(), s in states()) {
        let q = SystemParams { g: 0.0, ..p };
        let f = rhs(&q, &s).unwrap();
        prop_assert_eq!(f.sz, 0.0);
        let w = q.omega_a + q.u * s.photon_number();
        prop_assert_eq!(f.sx, -w * s.sy);
        prop_assert_eq!(f.sy, w * s.sx);
    }

    #[test]
    fn mirror_steady_state_balances_forces(p in params(), n in 0.0..5000.0f64) {
        let (b1, b2) = mirror_steady(&p, n);
        // b' = -i omega_m b - i (delta0 n + eta) - Gamma b with b = b1 + i b2
        let re = p.omega_m * b2 - p.gamma_m * b1;
        let im = -p.omega_m * b1 - (p.delta0 * n + p.eta_p) - p.gamma_m * b2;
        prop_assert!(re.abs() < 1e-9 && im.abs() < 1e-9, "{re} {im}");
    }

    #[test]
    fn pump_off_reduces_to_unpumped_mirror(p in params(), n in 0.0..5000.0f64) {
        let q = SystemParams { eta_p: 0.0, ..p };
        let (b1, _) = mirror_steady(&q, n);
        let d = q.gamma_m * q.gamma_m + q.omega_m * q.omega_m;
        prop_assert!((b1 + q.delta0 * n * q.omega_m / d).abs() <= 1e-12 * b1.abs().max(1.0));
        prop_assert_eq!(pump_shift(&q), 0.0);
    }

    #[test]
    fn pump_translates_the_boundaries(p in params()) {
        let bare = SystemParams { eta_p: 0.0, omega: p.omega - pump_shift(&p), ..p };
        for b in [TrivialBranch::Normal, TrivialBranch::Inverted] {
            if let (Some(x), Some(y)) = (sra_boundary(&p, b), sra_boundary(&bare, b)) {
                prop_assert!((x - y).abs() <= 1e-10 * y, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn unpumped_boundaries_mirror_under_detuning_flip(p in params()) {
        let q = SystemParams { eta_p: 0.0, ..p };
        let flipped = q.with_omega(-q.omega);
        let n = sra_boundary(&q, TrivialBranch::Normal);
        let i = sra_boundary(&flipped, TrivialBranch::Inverted);
        prop_assert_eq!(n.is_some(), i.is_some());
        if let (Some(x), Some(y)) = (n, i) {
            prop_assert!((x - y).abs() <= 1e-12 * y, "{x} vs {y}");
        }
    }

    #[test]
    fn positive_back_action_has_no_srb(p in params(), un in 0.0..60.0f64) {
        let q = p.with_un(un);
        prop_assert!(!srb_quantities(&q).exists);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fixed_points_come_in_parity_pairs(
        omega in -20.0..20.0f64,
        lambda in 0.5..1.5f64,
        un in -40.0..0.0f64,
    ) {
        let p = SystemParams::reference(omega, lambda, un);
        let search = find_all_fixed_points(&p, &[], &NewtonOptions::default()).unwrap();
        let merge = 1e-6 * N;
        for f in search.points.iter().filter(|f| !f.branch_tag.is_trivial()) {
            let img = f.state.parity_image();
            let partner = search.points.iter().find(|g| g.state.distance(&img) < merge);
            prop_assert!(partner.is_some(), "no partner for {:?}", f.branch_tag);
            let g = partner.unwrap();
            prop_assert_eq!(g.stability, f.stability);
            prop_assert_eq!(g.branch_tag, f.branch_tag);
        }
    }
}

/// Coupling at which the photon number of a slightly tilted trivial state
/// crosses 1e-6 N within 2000 us, by bisection on direct integration.
fn growth_threshold(p: &SystemParams, inverted: bool, guess: f64) -> f64 {
    let cfg = IntegratorConfig::adaptive(1e-10, 2000.0, 1);
    let grows = |lam: f64| {
        let q = p.with_lambda(lam);
        let tr = integrate(&q, &perturbed_trivial(&q, inverted, 1e-2), &cfg).unwrap();
        tr.states.iter().any(|s| s.photon_number() > 1e-6 * q.n_atoms)
    };
    let (mut lo, mut hi) = (0.9 * guess, 1.1 * guess);
    assert!(!grows(lo) && grows(hi), "bracket fails around {guess}");
    while (hi - lo) / guess > 1e-5 {
        let mid = 0.5 * (lo + hi);
        if grows(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 20, max_shrink_iters: 0, ..ProptestConfig::default() })]

    #[test]
    fn boundary_matches_direct_integration(
        chi in 3.0..20.0f64,
        inverted in any::<bool>(),
        un in -40.0..40.0f64,
    ) {
        // place omega so the relevant trivial state sees detuning +-chi
        let (sz, sign, branch) = if inverted {
            (0.5, -1.0, TrivialBranch::Inverted)
        } else {
            (-0.5, 1.0, TrivialBranch::Normal)
        };
        let omega = sign * chi - un * sz;
        let p = SystemParams::reference(omega, 0.0, un);
        let lc = sra_boundary(&p, branch).unwrap();
        let ode = growth_threshold(&p, inverted, lc);
        prop_assert!((ode - lc).abs() / lc < 1e-3, "omega {omega} un {un}: {lc} vs {ode}");
    }
}
