use std::collections::BTreeMap;
use std::path::PathBuf;

use dicke_core::dynamics::{detect_cycle, integrate, perturbed_trivial, relaxation_time, CycleReport, StepStats};
use dicke_core::phases::{self, trace_boundary, two_sra_area, BoundaryTrace, EtaRegion, PhaseDiagram};
use dicke_core::steadystate::FixedPointRecord;
use dicke_core::State;
use serde::{Deserialize, Serialize};

use crate::config::{ResolvedConfig, Start};
use crate::{create, output_path, write_json, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSummary {
    pub config: ResolvedConfig,
    pub start: State,
    pub final_time: f64,
    pub final_state: State,
    /// Time after which the trajectory stays inside the relaxation band of
    /// the attractor; absent unless the run converged.
    pub relaxation_time: Option<f64>,
    pub cycle: CycleReport,
    pub attractor: Option<FixedPointRecord>,
    pub step_stats: StepStats,
}

/// Integrate from the configured start and summarise the late-time state.
pub fn evolve(cfg: &ResolvedConfig) -> Result<(EvolveSummary, Vec<PathBuf>), CliError> {
    let p = cfg.params;
    let inverted = cfg.evolve.start == Start::Inverted;
    // nothing to seed without coupling
    let tilt = if p.g == 0.0 { 0.0 } else { cfg.perturbation };
    let s0 = perturbed_trivial(&p, inverted, tilt);
    let tr = integrate(&p, &s0, &cfg.integrator)?;
    let cycle = detect_cycle(&tr, cfg.evolve.window, &cfg.cycle)?;
    let relaxation = match (&cycle.attractor, cycle.verdict) {
        (Some(fp), dicke_core::CycleVerdict::Converged) => relaxation_time(&tr, fp, cfg.evolve.band),
        _ => None,
    };
    let summary = EvolveSummary {
        config: cfg.clone(),
        start: s0,
        final_time: tr.times[tr.len() - 1],
        final_state: *tr.last_state(),
        relaxation_time: relaxation,
        attractor: cycle.attractor.as_ref().map(|fp| FixedPointRecord::new(p, fp)),
        cycle,
        step_stats: tr.step_stats,
    };
    let mut written = Vec::new();
    if cfg.output.csv {
        let path = output_path(cfg, "trajectory.csv")?;
        tr.write_csv(create(&path)?)?;
        written.push(path);
    }
    let path = output_path(cfg, "summary.json")?;
    write_json(&path, &summary)?;
    written.push(path);
    Ok((summary, written))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryOutput {
    pub config: ResolvedConfig,
    pub traces: Vec<BoundaryTrace>,
    /// Same branches without the pump; only when the pump is on.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reference: Vec<BoundaryTrace>,
}

/// Trace every configured branch, plus unpumped references when pumped.
pub fn boundary(cfg: &ResolvedConfig) -> Result<(BoundaryOutput, Vec<PathBuf>), CliError> {
    let b = &cfg.boundary;
    let run = |p: &dicke_core::SystemParams| -> Result<Vec<BoundaryTrace>, CliError> {
        b.branches
            .iter()
            .map(|&k| trace_boundary(p, k, b.omega_min, b.omega_max, &b.trace).map_err(CliError::from))
            .collect()
    };
    let traces = run(&cfg.params)?;
    let reference = if cfg.params.eta_p > 0.0 {
        run(&dicke_core::SystemParams { eta_p: 0.0, ..cfg.params })?
    } else {
        Vec::new()
    };
    let mut written = Vec::new();
    if cfg.output.csv {
        for (set, tag) in [(&traces, ""), (&reference, "_ref")] {
            for tr in set.iter() {
                let path = output_path(cfg, &format!("boundary_{}{tag}.csv", tr.kind.code()))?;
                tr.write_csv(create(&path)?)?;
                written.push(path);
            }
        }
    }
    let out = BoundaryOutput { config: cfg.clone(), traces, reference };
    let path = output_path(cfg, "boundary.json")?;
    write_json(&path, &out)?;
    written.push(path);
    Ok((out, written))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSummary {
    pub cells: usize,
    /// Cells per label code.
    pub counts: BTreeMap<String, usize>,
    pub undecided: usize,
    pub two_sra_area: f64,
    pub eta_sra_cells: usize,
    pub eta_srb_cells: usize,
}

impl SweepSummary {
    pub fn of(d: &PhaseDiagram) -> Self {
        let mut counts = BTreeMap::new();
        for l in &d.labels {
            *counts.entry(l.code()).or_insert(0) += 1;
        }
        Self {
            cells: d.labels.len(),
            counts,
            undecided: d.diagnostics.iter().filter(|c| c.undecided).count(),
            two_sra_area: two_sra_area(d),
            eta_sra_cells: d.count(|l| l.eta == Some(EtaRegion::Sra)),
            eta_srb_cells: d.count(|l| l.eta == Some(EtaRegion::Srb)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOutput {
    pub config: ResolvedConfig,
    pub summary: SweepSummary,
    pub diagram: PhaseDiagram,
}

/// Classify the configured grid on the current rayon pool.
pub fn sweep(cfg: &ResolvedConfig) -> Result<(SweepOutput, Vec<PathBuf>), CliError> {
    let s = &cfg.sweep;
    let diagram = phases::sweep(&cfg.params, s.omega, s.lambda, s.mode, &cfg.classify_options())?;
    let out = SweepOutput { config: cfg.clone(), summary: SweepSummary::of(&diagram), diagram };
    let mut written = Vec::new();
    if cfg.output.csv {
        let path = output_path(cfg, "labels.csv")?;
        out.diagram.write_label_csv(create(&path)?)?;
        written.push(path);
    }
    let path = output_path(cfg, "phase.json")?;
    write_json(&path, &out)?;
    written.push(path);
    Ok((out, written))
}
