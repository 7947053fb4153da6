use serde::{Deserialize, Serialize};

use crate::dynamics::{
    detect_cycle, integrate, perturbed_trivial, CycleOptions, CycleVerdict, IntegratorConfig, Method,
    DEFAULT_PERTURBATION,
};
use crate::error::Result;
use crate::model::{spin_norm, State, SystemParams};
use crate::steadystate::{
    find_fixed_points, default_seeds, spectrum, sra_boundary, srb_quantities, srb_states, trivial_states, Branch,
    FixedPoint, NewtonOptions, Stability, TrivialBranch,
};

use super::label::PhaseLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Analytic,
    Dynamic,
    Hybrid,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "analytic" => Ok(Mode::Analytic),
            "dynamic" => Ok(Mode::Dynamic),
            "hybrid" => Ok(Mode::Hybrid),
            _ => Err(format!("unknown mode `{s}` (expected analytic, dynamic or hybrid)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyOptions {
    pub newton: NewtonOptions,
    pub integrator: IntegratorConfig,
    pub cycle: CycleOptions,
    /// Tail fraction handed to the cycle detector.
    pub window: f64,
    /// Tilt of the perturbed trivial starts, as a fraction of N/2.
    pub perturbation: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions { sra_samples: 1500, ..NewtonOptions::default() },
            integrator: IntegratorConfig {
                method: Method::AdaptiveRk45,
                dt: 1e-3,
                abs_tol: 1e-8,
                rel_tol: 1e-8,
                t_end: 2000.0,
                sample_every: 2,
            },
            cycle: CycleOptions::default(),
            window: 0.25,
            perturbation: DEFAULT_PERTURBATION,
        }
    }
}

/// Per-cell evidence behind a label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDiagnostics {
    /// Stable fixed points found (trivial states counted when not unstable).
    pub stable_count: usize,
    pub srb_exists: bool,
    pub oscillation: bool,
    pub undecided: bool,
    /// Stage that settled the label.
    pub provenance: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_label: Option<PhaseLabel>,
    pub dropped_seeds: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub label: PhaseLabel,
    pub diagnostics: CellDiagnostics,
}

struct Tally {
    label: PhaseLabel,
    stable_count: usize,
    oscillation: bool,
    undecided: bool,
    notes: Vec<String>,
}

impl Tally {
    fn new(srb: bool) -> Self {
        Self {
            label: PhaseLabel { srb, ..PhaseLabel::default() },
            stable_count: 0,
            oscillation: false,
            undecided: false,
            notes: Vec::new(),
        }
    }

    fn mark(&mut self, branch: Branch) {
        match branch {
            Branch::Normal => self.label.normal = true,
            Branch::Inverted => self.label.inverted = true,
            Branch::SraNormal => self.label.sra_n = true,
            Branch::SraInverted => self.label.sra_i = true,
            Branch::Srb | Branch::Other => {}
        }
    }

    fn finish(mut self, provenance: Mode, srb_exists: bool, dropped: usize) -> CellOutcome {
        self.label.oscillation = self.oscillation && !self.label.has_stable_state();
        CellOutcome {
            label: self.label,
            diagnostics: CellDiagnostics {
                stable_count: self.stable_count,
                srb_exists,
                oscillation: self.oscillation,
                undecided: self.undecided,
                provenance,
                reference_label: None,
                dropped_seeds: dropped,
                notes: self.notes,
            },
        }
    }
}

/// Classify one parameter point.
pub fn classify_point(p: &SystemParams, mode: Mode, opts: &ClassifyOptions) -> Result<CellOutcome> {
    classify_seeded(p, mode, opts, &[]).map(|(c, _)| c)
}

/// As [`classify_point`], with extra Newton seeds; also returns the
/// nontrivial fixed points found, for continuation along a sweep row.
pub fn classify_seeded(
    p: &SystemParams,
    mode: Mode,
    opts: &ClassifyOptions,
    extra: &[State],
) -> Result<(CellOutcome, Vec<State>)> {
    p.validate()?;
    let srb_exists = p.u < 0.0 && srb_quantities(p).exists;
    match mode {
        Mode::Analytic => Ok((analytic(p, srb_exists), Vec::new())),
        Mode::Dynamic => {
            let mut t = Tally::new(srb_exists);
            probe_dynamics(p, opts, srb_exists, &mut t);
            Ok((t.finish(Mode::Dynamic, srb_exists, 0), Vec::new()))
        }
        Mode::Hybrid => hybrid(p, opts, srb_exists, extra),
    }
}

fn trivial_not_unstable(p: &SystemParams, s: &State, opts: &NewtonOptions) -> (bool, bool) {
    let v = spectrum(p, s, &opts.stability).verdict;
    (v != Stability::Unstable, v == Stability::Stable)
}

fn analytic(p: &SystemParams, srb_exists: bool) -> CellOutcome {
    let mut t = Tally::new(srb_exists);
    let nopts = NewtonOptions::default();
    let [normal, inverted] = trivial_states(p);
    for (s, b) in [(normal, Branch::Normal), (inverted, Branch::Inverted)] {
        let (ok, strict) = trivial_not_unstable(p, &s, &nopts);
        if ok {
            t.mark(b);
            t.stable_count += usize::from(strict);
        }
    }
    let lambda = p.lambda();
    let above = |b| sra_boundary(p, b).is_some_and(|lc| lambda > lc);
    match (above(TrivialBranch::Normal), above(TrivialBranch::Inverted)) {
        (true, true) => {
            t.undecided = true;
            t.notes.push("both SRA boundaries exceeded; coexistence needs a fixed-point check".into());
        }
        (true, false) => t.label.sra_n = true,
        (false, true) => t.label.sra_i = true,
        (false, false) => {}
    }
    if !t.label.has_stable_state() && !t.undecided {
        t.undecided = true;
        t.notes.push("no stable state predicted; oscillation not verified".into());
    }
    t.finish(Mode::Analytic, srb_exists, 0)
}

fn hybrid(
    p: &SystemParams,
    opts: &ClassifyOptions,
    srb_exists: bool,
    extra: &[State],
) -> Result<(CellOutcome, Vec<State>)> {
    let mut t = Tally::new(srb_exists);
    let mut seeds = default_seeds(p, &opts.newton);
    seeds.extend_from_slice(extra);
    let search = find_fixed_points(p, &seeds, &opts.newton)?;
    let mut any_stable = false;
    for f in &search.points {
        let counts = if f.branch_tag.is_trivial() {
            f.stability != Stability::Unstable
        } else {
            f.stability == Stability::Stable
        };
        if counts {
            t.mark(f.branch_tag);
            any_stable = true;
            t.stable_count += usize::from(f.stability == Stability::Stable);
        }
    }
    let nontrivial: Vec<State> =
        search.points.iter().filter(|f| !f.branch_tag.is_trivial()).map(|f| f.state).collect();
    let provenance = if any_stable {
        Mode::Hybrid
    } else {
        probe_dynamics(p, opts, srb_exists, &mut t);
        Mode::Dynamic
    };
    Ok((t.finish(provenance, srb_exists, search.dropped.len()), nontrivial))
}

fn nudge(s: &State, fraction: f64, half_n: f64) -> State {
    let mut out = *s;
    out.sx += fraction * half_n;
    let k = half_n / spin_norm(&out).sqrt();
    out.sx *= k;
    out.sy *= k;
    out.sz *= k;
    out
}

fn probe_dynamics(p: &SystemParams, opts: &ClassifyOptions, srb_exists: bool, t: &mut Tally) {
    let mut starts = vec![
        perturbed_trivial(p, false, opts.perturbation),
        perturbed_trivial(p, true, opts.perturbation),
    ];
    if srb_exists {
        // the other two SRB states are parity images of these
        starts.extend(srb_states(p).iter().take(2).map(|s| nudge(s, opts.perturbation, p.half_n())));
    }
    let mut seen: Vec<State> = Vec::new();
    for s0 in &starts {
        let tr = match integrate(p, s0, &opts.integrator) {
            Ok(tr) => tr,
            Err(e) => {
                t.undecided = true;
                t.notes.push(format!("integration failed: {e}"));
                continue;
            }
        };
        match detect_cycle(&tr, opts.window, &opts.cycle) {
            Ok(rep) => match rep.verdict {
                CycleVerdict::Converged => match rep.attractor {
                    Some(fp) if accepts(&fp) => {
                        t.mark(fp.branch_tag);
                        let merge = opts.newton.merge_tol_rel * p.n_atoms;
                        let new = !seen.iter().any(|s| s.distance(&fp.state) < merge);
                        if new && fp.stability == Stability::Stable {
                            t.stable_count += 1;
                        }
                        if new {
                            seen.push(fp.state);
                        }
                    }
                    Some(fp) => {
                        t.undecided = true;
                        t.notes.push(format!("settled near an unstable {:?} point", fp.branch_tag));
                    }
                    None => {
                        t.undecided = true;
                        t.notes.push("settled but no fixed point polished from the end state".into());
                    }
                },
                CycleVerdict::LimitCycle => t.oscillation = true,
                CycleVerdict::Undecided => t.undecided = true,
            },
            Err(e) => {
                t.undecided = true;
                t.notes.push(e.to_string());
            }
        }
    }
}

fn accepts(fp: &FixedPoint) -> bool {
    if fp.branch_tag.is_trivial() {
        fp.stability != Stability::Unstable
    } else {
        fp.stability == Stability::Stable
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn below_threshold_positive_detuning_is_normal() {
        let p = SystemParams::reference(10.0, 0.3, 0.0);
        for mode in [Mode::Analytic, Mode::Hybrid] {
            let c = classify_point(&p, mode, &ClassifyOptions::default()).unwrap();
            assert_eq!(c.label.code(), "N", "{mode:?}");
        }
    }

    #[test]
    fn srb_window_at_low_coupling_has_all_three() {
        let p = SystemParams::reference(5.0, 0.45, -40.0);
        let c = classify_point(&p, Mode::Analytic, &ClassifyOptions::default()).unwrap();
        assert_eq!(c.label.code(), "SRB+N+I");
        assert!(c.diagnostics.srb_exists);
    }

    #[test]
    fn analytic_never_certifies_coexistence() {
        let p = SystemParams::reference(0.0, 1.0, -30.0);
        let c = classify_point(&p, Mode::Analytic, &ClassifyOptions::default()).unwrap();
        assert!(!c.label.is_two_sra());
        assert!(c.diagnostics.undecided);
    }
}
