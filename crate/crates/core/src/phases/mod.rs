//! Phase classification of parameter points, grid sweeps over
//! (omega, lambda) and boundary tracing.

mod boundary;
mod classify;
mod label;
mod sweep;

pub use boundary::{trace_boundary, BoundaryKind, BoundaryTrace, TraceOptions};
pub use classify::{classify_point, classify_seeded, CellDiagnostics, CellOutcome, ClassifyOptions, Mode};
pub use label::{EtaRegion, ParseLabelError, PhaseLabel};
pub use sweep::{sweep, two_sra_area, AxisSpec, PhaseDiagram, SweepParams};
