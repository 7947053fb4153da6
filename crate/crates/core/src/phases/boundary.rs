use serde::{Deserialize, Serialize};

use crate::error::{DickeError, Result};
use crate::model::SystemParams;
use crate::steadystate::{sra_boundary, srb_threshold, srb_window, TrivialBranch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryKind {
    #[serde(rename = "SRA_N")]
    SraNormal,
    #[serde(rename = "SRA_I")]
    SraInverted,
    /// Existence threshold of the SRB branch; diverges at the window edges.
    #[serde(rename = "SRB")]
    SrbEdge,
}

impl BoundaryKind {
    pub const ALL: [BoundaryKind; 3] = [BoundaryKind::SraNormal, BoundaryKind::SraInverted, BoundaryKind::SrbEdge];

    pub fn code(self) -> &'static str {
        match self {
            BoundaryKind::SraNormal => "SRA_N",
            BoundaryKind::SraInverted => "SRA_I",
            BoundaryKind::SrbEdge => "SRB",
        }
    }

    /// Critical coupling at the detuning carried by `p`.
    pub fn critical(self, p: &SystemParams) -> Option<f64> {
        match self {
            BoundaryKind::SraNormal => sra_boundary(p, TrivialBranch::Normal),
            BoundaryKind::SraInverted => sra_boundary(p, TrivialBranch::Inverted),
            BoundaryKind::SrbEdge => srb_threshold(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceOptions {
    /// Largest allowed jump in lambda between neighbouring points.
    pub tol: f64,
    pub initial_samples: usize,
    /// Bisection depth limit per initial interval.
    pub max_depth: u32,
    /// Points above this coupling are treated like missing ones.
    pub lambda_max: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self { tol: 0.01, initial_samples: 64, max_depth: 14, lambda_max: f64::INFINITY }
    }
}

/// Boundary polyline split into connected segments; a new segment starts
/// after every gap where the branch has no transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub kind: BoundaryKind,
    pub segments: Vec<Vec<[f64; 2]>>,
    /// SRB window edges in omega, when applicable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_edges: Option<[f64; 2]>,
}

impl BoundaryTrace {
    pub fn is_empty(&self) -> bool {
        self.segments.iter().all(|s| s.is_empty())
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64; 2]> {
        self.segments.iter().flatten()
    }

    /// CSV with columns segment, omega, lambda_c.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["segment", "omega", "lambda_c"])?;
        for (k, seg) in self.segments.iter().enumerate() {
            for [w, l] in seg {
                wr.write_record([k.to_string(), w.to_string(), l.to_string()])?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// Sample lambda_c(omega) on `[omega_min, omega_max]`, bisecting every
/// interval whose endpoints differ by more than `tol` in lambda or where the
/// branch appears or disappears.
pub fn trace_boundary(
    p_base: &SystemParams,
    kind: BoundaryKind,
    omega_min: f64,
    omega_max: f64,
    opts: &TraceOptions,
) -> Result<BoundaryTrace> {
    p_base.validate()?;
    if !(omega_min.is_finite() && omega_max.is_finite()) || omega_max < omega_min {
        return Err(DickeError::Config(format!("bad omega range [{omega_min}, {omega_max}]")));
    }
    if !(opts.tol > 0.0) || opts.initial_samples < 2 {
        return Err(DickeError::Config("trace tol must be > 0 and initial_samples >= 2".into()));
    }
    let eval = |w: f64| kind.critical(&p_base.with_omega(w)).filter(|l| *l <= opts.lambda_max);
    let n = opts.initial_samples;
    let grid: Vec<f64> = (0..n)
        .map(|i| if i + 1 == n { omega_max } else { omega_min + (omega_max - omega_min) * i as f64 / (n - 1) as f64 })
        .collect();

    let mut pts: Vec<(f64, Option<f64>)> = vec![(grid[0], eval(grid[0]))];
    for &w in &grid[1..] {
        let right = (w, eval(w));
        refine(&eval, *pts.last().unwrap(), right, opts, 0, &mut pts);
        pts.push(right);
    }

    let mut segments: Vec<Vec<[f64; 2]>> = Vec::new();
    let mut current: Vec<[f64; 2]> = Vec::new();
    for (w, l) in pts {
        match l {
            Some(l) => current.push([w, l]),
            None if !current.is_empty() => segments.push(std::mem::take(&mut current)),
            None => {}
        }
    }
    if !current.is_empty() {
        segments.push(current);
    }
    let window_edges = match kind {
        BoundaryKind::SrbEdge => srb_window(p_base).map(|(a, b)| [a, b]),
        _ => None,
    };
    Ok(BoundaryTrace { kind, segments, window_edges })
}

fn refine(
    eval: &impl Fn(f64) -> Option<f64>,
    a: (f64, Option<f64>),
    b: (f64, Option<f64>),
    opts: &TraceOptions,
    depth: u32,
    out: &mut Vec<(f64, Option<f64>)>,
) {
    let split = match (a.1, b.1) {
        (Some(x), Some(y)) => (x - y).abs() > opts.tol,
        (None, None) => false,
        _ => true,
    };
    if !split || depth >= opts.max_depth {
        return;
    }
    let mid_w = 0.5 * (a.0 + b.0);
    let mid = (mid_w, eval(mid_w));
    refine(eval, a, mid, opts, depth + 1, out);
    out.push(mid);
    refine(eval, mid, b, opts, depth + 1, out);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dicke_curve_minimum_near_kappa() {
        let p = SystemParams::reference(0.0, 0.1, 0.0);
        let tr = trace_boundary(&p, BoundaryKind::SraNormal, 0.5, 40.0, &TraceOptions::default()).unwrap();
        let min = tr.points().fold([0.0, f64::INFINITY], |m, q| if q[1] < m[1] { *q } else { m });
        assert!((min[1] - 0.45).abs() < 1e-3, "{min:?}");
        assert!((min[0] - 8.1).abs() < 1.0, "{min:?}");
    }

    #[test]
    fn negative_range_normal_branch_is_empty() {
        let p = SystemParams::reference(0.0, 0.1, 0.0);
        let tr = trace_boundary(&p, BoundaryKind::SraNormal, -40.0, -1.0, &TraceOptions::default()).unwrap();
        assert!(tr.is_empty());
    }

    #[test]
    fn neighbours_respect_tolerance_away_from_edges() {
        let p = SystemParams::reference(0.0, 0.1, -40.0);
        let opts = TraceOptions { tol: 0.005, lambda_max: 3.0, ..TraceOptions::default() };
        let tr = trace_boundary(&p, BoundaryKind::SraNormal, -40.0, 40.0, &opts).unwrap();
        assert_eq!(tr.segments.len(), 1);
        for seg in &tr.segments {
            for w in seg.windows(2) {
                assert!((w[1][1] - w[0][1]).abs() <= opts.tol || w[1][0] - w[0][0] < 1e-3);
            }
        }
        // chi_N > 0 requires omega > UN/2 = -20
        assert!(tr.points().all(|q| q[0] > -20.0));
    }

    #[test]
    fn srb_trace_carries_window() {
        let p = SystemParams::reference(0.0, 0.1, -40.0);
        let tr = trace_boundary(&p, BoundaryKind::SrbEdge, -40.0, 40.0, &TraceOptions::default()).unwrap();
        let [lo, hi] = tr.window_edges.unwrap();
        assert!(hi > lo);
        assert!(tr.points().all(|q| q[0] > lo && q[0] < hi));
    }
}
