//! SRA branch (S_y = 0) reduced to a scalar problem in S_z.
//!
//! With S_y = 0 the cavity and mirror follow the spin adiabatically; for a
//! given S_z the photon number solves the cubic
//! n (kappa^2 + (chi0 - c n)^2) = 4 g^2 S_x^2, where c n is the mirror shift.
//! The remaining balance
//! (omega_a + U n)(kappa^2 + chi^2) + 8 g^2 chi S_z = 0
//! is scanned along the spin meridian and bracketed roots are refined by
//! bisection. The results seed the full Newton solve.

use crate::model::{State, SystemParams};
use crate::steadystate::closed_form::mirror_steady;

/// A root of the reduced SRA balance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SraRoot {
    pub sz: f64,
    pub photon_n: f64,
}

struct Reduced {
    kappa2: f64,
    chi_free: f64,
    u: f64,
    c: f64,
    g2: f64,
    omega_a: f64,
    half_n: f64,
}

impl Reduced {
    fn new(p: &SystemParams) -> Self {
        let den = p.mirror_denominator();
        Self {
            kappa2: p.kappa * p.kappa,
            chi_free: p.omega - 2.0 * p.delta0 * p.eta_p * p.omega_m / den,
            u: p.u,
            c: 2.0 * p.delta0 * p.delta0 * p.omega_m / den,
            g2: p.g * p.g,
            omega_a: p.omega_a,
            half_n: p.half_n(),
        }
    }

    fn sx2(&self, sz: f64) -> f64 {
        (self.half_n * self.half_n - sz * sz).max(0.0)
    }

    /// Nonnegative photon numbers consistent with S_z, ascending.
    fn photon_roots(&self, sz: f64) -> Vec<f64> {
        let drive = 4.0 * self.g2 * self.sx2(sz);
        if drive <= 0.0 {
            return Vec::new();
        }
        let chi0 = self.chi_free + self.u * sz;
        let (c, k2) = (self.c, self.kappa2);
        let poly = |n: f64| {
            let chi = chi0 - c * n;
            n * (k2 + chi * chi) - drive
        };
        let n_max = drive / k2;
        if c == 0.0 {
            return vec![drive / (k2 + chi0 * chi0)];
        }
        // p'(n) = 3 c^2 n^2 - 4 c chi0 n + kappa^2 + chi0^2
        let disc = 16.0 * c * c * chi0 * chi0 - 12.0 * c * c * (k2 + chi0 * chi0);
        let mut knots = vec![0.0];
        if disc > 0.0 {
            let sq = disc.sqrt();
            for crit in [(4.0 * c * chi0 - sq) / (6.0 * c * c), (4.0 * c * chi0 + sq) / (6.0 * c * c)] {
                if crit > 0.0 && crit < n_max {
                    knots.push(crit);
                }
            }
        }
        knots.push(n_max);
        let mut roots = Vec::new();
        for w in knots.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            let (flo, fhi) = (poly(lo), poly(hi));
            if flo == 0.0 {
                if lo > 0.0 {
                    roots.push(lo);
                }
                continue;
            }
            if flo.signum() == fhi.signum() {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if poly(mid).signum() == flo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        roots
    }

    fn balance(&self, sz: f64, n: f64) -> f64 {
        let chi = self.chi_free + self.u * sz - self.c * n;
        (self.omega_a + self.u * n) * self.sx2(sz) / n + 2.0 * chi * sz
    }

    fn branches(&self, theta: f64) -> (f64, Vec<(f64, f64)>) {
        let sz = -self.half_n * theta.cos();
        let vals = self
            .photon_roots(sz)
            .into_iter()
            .map(|n| (n, self.balance(sz, n)))
            .collect();
        (sz, vals)
    }
}

/// Roots of the SRA balance, sampled at `samples` points along the meridian
/// (denser near the poles).
pub fn sra_roots(p: &SystemParams, samples: usize) -> Vec<SraRoot> {
    if p.g == 0.0 {
        return Vec::new();
    }
    let red = Reduced::new(p);
    let samples = samples.max(8);
    let theta = |k: usize| std::f64::consts::PI * k as f64 / samples as f64;
    let mut out = Vec::new();
    let mut prev = red.branches(theta(1));
    let mut prev_t = theta(1);
    for k in 2..samples {
        let t = theta(k);
        let cur = red.branches(t);
        if cur.1.len() == prev.1.len() {
            for j in 0..cur.1.len() {
                let (f0, f1) = (prev.1[j].1, cur.1[j].1);
                if f0 == 0.0 {
                    out.push(SraRoot { sz: prev.0, photon_n: prev.1[j].0 });
                } else if f0.signum() != f1.signum() && f1 != 0.0 {
                    if let Some(r) = refine(&red, prev_t, t, j, f0) {
                        out.push(r);
                    }
                }
            }
        }
        prev = cur;
        prev_t = t;
    }
    out
}

fn refine(red: &Reduced, mut lo: f64, mut hi: f64, j: usize, f_lo: f64) -> Option<SraRoot> {
    let mut best = None;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let (sz, b) = red.branches(mid);
        let Some(&(n, f)) = b.get(j) else {
            break;
        };
        best = Some(SraRoot { sz, photon_n: n });
        if f == 0.0 {
            break;
        }
        if f.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best
}

/// Full states for each SRA root, with both signs of S_x.
pub fn sra_states(p: &SystemParams, samples: usize) -> Vec<State> {
    let red = Reduced::new(p);
    let mut out = Vec::new();
    for r in sra_roots(p, samples) {
        let sx_abs = red.sx2(r.sz).sqrt();
        let chi = red.chi_free + p.u * r.sz - red.c * r.photon_n;
        let den = p.kappa * p.kappa + chi * chi;
        let (b1, b2) = mirror_steady(p, r.photon_n);
        for sign in [1.0, -1.0] {
            let sx = sign * sx_abs;
            out.push(State {
                sx,
                sy: 0.0,
                sz: r.sz,
                a_re: -2.0 * p.g * sx * chi / den,
                a_im: -2.0 * p.g * sx * p.kappa / den,
                b_re: b1,
                b_im: b2,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rhs;

    #[test]
    fn dicke_limit_matches_closed_form() {
        // U = 0, no mirror coupling: S_z = -omega_a (kappa^2 + omega^2) / (8 g^2 omega)
        let mut p = SystemParams::reference(8.1, 0.9, 0.0);
        p.delta0 = 0.0;
        let roots = sra_roots(&p, 4000);
        assert_eq!(roots.len(), 1, "{roots:?}");
        let expected = -p.omega_a * (p.kappa.powi(2) + p.omega.powi(2)) / (8.0 * p.g * p.g * p.omega);
        assert!((roots[0].sz - expected).abs() < 1e-6 * p.half_n(), "{} vs {expected}", roots[0].sz);
    }

    #[test]
    fn states_are_near_fixed_points() {
        let p = SystemParams::reference(8.1, 0.9, -10.0);
        let states = sra_states(&p, 4000);
        assert!(!states.is_empty());
        for s in states {
            let r = rhs(&p, &s).unwrap().norm();
            assert!(r < 1e-3 * p.half_n(), "residual {r}");
        }
    }

    #[test]
    fn no_roots_below_threshold_at_zero_back_action() {
        let p = SystemParams::reference(8.1, 0.3, 0.0);
        assert!(sra_roots(&p, 2000).is_empty());
    }

    #[test]
    fn zero_coupling_has_no_roots() {
        let p = SystemParams::reference(8.1, 0.0, 0.0);
        assert!(sra_roots(&p, 100).is_empty());
    }
}
