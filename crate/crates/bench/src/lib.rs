//! Shared fixtures for the benchmarks.

use dicke_core::dynamics::perturbed_trivial;
use dicke_core::{State, SystemParams};

/// Superradiant working point with every coordinate in motion.
pub fn working_point() -> (SystemParams, State) {
    let p = SystemParams::reference(5.0, 0.605, -40.0);
    let mut s = perturbed_trivial(&p, false, 0.3);
    s.a_re = 30.0;
    s.a_im = -20.0;
    (p, s)
}
