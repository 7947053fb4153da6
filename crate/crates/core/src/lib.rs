//! Simulation and phase analysis for the semiclassical optomechanical Dicke
//! model: a collective spin coupled to a lossy cavity mode whose frequency
//! is modulated by a damped, optionally pumped, mechanical mirror.

pub mod dynamics;
pub mod error;
pub mod model;
pub mod ode;
pub mod phases;
pub mod steadystate;

pub use dynamics::{
    detect_cycle, integrate, relaxation_time, CycleOptions, CycleReport, CycleVerdict, IntegratorConfig, Method,
    Trajectory,
};
pub use error::{DickeError, Result};
pub use model::{mirror_rhs, rhs, spin_norm, State, SystemParams};
pub use phases::{classify_point, sweep, trace_boundary, two_sra_area, AxisSpec, BoundaryKind, Mode, PhaseDiagram, PhaseLabel};
pub use steadystate::{
    assess_stability, find_all_fixed_points, find_fixed_points, mirror_steady, sra_boundary, srb_quantities, Branch,
    FixedPoint, Stability, TrivialBranch,
};
