//! Run configuration: a single JSON document, parsed strictly and resolved
//! into model parameters plus per-command blocks.

use std::path::Path;

use dicke_core::dynamics::{CycleOptions, IntegratorConfig, DEFAULT_PERTURBATION};
use dicke_core::phases::{AxisSpec, BoundaryKind, ClassifyOptions, Mode, TraceOptions};
use dicke_core::steadystate::NewtonOptions;
use dicke_core::SystemParams;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Model parameters as written by users. Either `g` or the collective
/// `lambda` (alias `gsqrtN`) may be given, and either `u` or the aggregate
/// `uN` (alias `UN`). Omitted constants take the reference values.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsInput {
    pub omega_a: Option<f64>,
    pub omega: Option<f64>,
    pub omega_m: Option<f64>,
    pub kappa: Option<f64>,
    /// Defaults to 0.05 omega_m.
    pub gamma_m: Option<f64>,
    pub g: Option<f64>,
    #[serde(alias = "gsqrtN")]
    pub lambda: Option<f64>,
    pub u: Option<f64>,
    #[serde(rename = "uN", alias = "UN")]
    pub un: Option<f64>,
    pub delta0: Option<f64>,
    pub eta_p: Option<f64>,
    pub n_atoms: Option<f64>,
}

impl ParamsInput {
    pub fn resolve(&self) -> Result<SystemParams, CliError> {
        let n_atoms = self.n_atoms.unwrap_or(1.0e6);
        let omega_m = self.omega_m.unwrap_or(1.0);
        let g = match (self.g, self.lambda) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either g or lambda, not both".into())),
            (Some(g), None) => g,
            (None, Some(l)) => l / n_atoms.sqrt(),
            (None, None) => 0.0,
        };
        let u = match (self.u, self.un) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either u or uN, not both".into())),
            (Some(u), None) => u,
            (None, Some(un)) => un / n_atoms,
            (None, None) => 0.0,
        };
        let p = SystemParams {
            omega_a: self.omega_a.unwrap_or(0.05),
            omega: self.omega.unwrap_or(0.0),
            omega_m,
            kappa: self.kappa.unwrap_or(8.1),
            gamma_m: self.gamma_m.unwrap_or(0.05 * omega_m),
            g,
            u,
            delta0: self.delta0.unwrap_or(0.05),
            eta_p: self.eta_p.unwrap_or(0.0),
            n_atoms,
        };
        p.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    Normal,
    Inverted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub start: Start,
    /// Relaxation band as a fraction of the attractor norm.
    pub band: f64,
    /// Tail fraction analysed by the cycle detector.
    pub window: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self { start: Start::Normal, band: 0.01, window: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub omega: AxisSpec,
    pub lambda: AxisSpec,
    pub mode: Mode,
    /// Integrator for the dynamic probes of the classifier.
    pub integrator: IntegratorConfig,
    pub window: f64,
    pub newton: NewtonOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let c = ClassifyOptions::default();
        Self {
            omega: AxisSpec::new(-40.0, 40.0, 101),
            lambda: AxisSpec::new(0.0, 3.0, 101),
            mode: Mode::Hybrid,
            integrator: c.integrator,
            window: c.window,
            newton: c.newton,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundaryConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub branches: Vec<BoundaryKind>,
    pub trace: TraceOptions,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self {
            omega_min: -40.0,
            omega_max: 40.0,
            branches: BoundaryKind::ALL.to_vec(),
            trace: TraceOptions { lambda_max: 3.0, ..TraceOptions::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    /// Emit CSV files next to the JSON documents.
    pub csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into(), csv: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelftestConfig {
    /// Detunings at which the closed-form boundary is checked against
    /// integration.
    pub oracle_omegas: Vec<f64>,
    /// Start tilt used by the integration oracle.
    pub oracle_tilt: f64,
    pub pump_draws: usize,
    pub sweep_points: usize,
    pub thread_counts: Vec<usize>,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self {
            oracle_omegas: vec![-10.0, 4.0, 8.1],
            oracle_tilt: 1e-2,
            pump_draws: 100,
            sweep_points: 7,
            thread_counts: vec![1, 2, 4],
        }
    }
}

/// The document as read from disk.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: Option<String>,
    pub params: ParamsInput,
    #[serde(default)]
    pub integrator: Option<IntegratorConfig>,
    #[serde(default)]
    pub evolve: Option<EvolveConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub boundary: Option<BoundaryConfig>,
    #[serde(default)]
    pub cycle: Option<CycleOptions>,
    #[serde(default)]
    pub selftest: Option<SelftestConfig>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
    pub perturbation: Option<f64>,
    pub rng_seed: Option<u64>,
}

/// Fully expanded configuration; embedded verbatim in every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolvedConfig {
    pub name: String,
    pub params: SystemParams,
    pub integrator: IntegratorConfig,
    pub evolve: EvolveConfig,
    pub sweep: SweepConfig,
    pub boundary: BoundaryConfig,
    pub cycle: CycleOptions,
    pub selftest: SelftestConfig,
    pub output: OutputConfig,
    pub perturbation: f64,
    pub rng_seed: u64,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn resolve(&self, default_name: &str) -> Result<ResolvedConfig, CliError> {
        let r = ResolvedConfig {
            name: self.name.clone().unwrap_or_else(|| default_name.to_string()),
            params: self.params.resolve()?,
            integrator: self.integrator.unwrap_or_default(),
            evolve: self.evolve.unwrap_or_default(),
            sweep: self.sweep.unwrap_or_default(),
            boundary: self.boundary.clone().unwrap_or_default(),
            cycle: self.cycle.unwrap_or_default(),
            selftest: self.selftest.clone().unwrap_or_default(),
            output: self.output.clone().unwrap_or_default(),
            perturbation: self.perturbation.unwrap_or(DEFAULT_PERTURBATION),
            rng_seed: self.rng_seed.unwrap_or(0),
        };
        r.validate()?;
        Ok(r)
    }
}

impl ResolvedConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
        RunConfig::from_json(&text)?.resolve(stem)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |e: dicke_core::DickeError| CliError::Config(e.to_string());
        self.params.validate().map_err(cfg)?;
        self.integrator.validate().map_err(cfg)?;
        self.sweep.integrator.validate().map_err(cfg)?;
        self.sweep.omega.validate("sweep.omega").map_err(cfg)?;
        self.sweep.lambda.validate("sweep.lambda").map_err(cfg)?;
        let bad = |m: String| Err(CliError::Config(m));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("name `{}` must be a plain file stem", self.name));
        }
        if !(self.perturbation > 0.0 && self.perturbation < 1.0) {
            return bad(format!("perturbation must lie in (0, 1), got {}", self.perturbation));
        }
        for (what, w) in [("evolve.window", self.evolve.window), ("sweep.window", self.sweep.window)] {
            if !(w > 0.0 && w <= 1.0) {
                return bad(format!("{what} must lie in (0, 1], got {w}"));
            }
        }
        if !(self.evolve.band > 0.0) {
            return bad("evolve.band must be > 0".into());
        }
        if !(self.boundary.omega_min.is_finite() && self.boundary.omega_max.is_finite())
            || self.boundary.omega_max < self.boundary.omega_min
        {
            return bad("boundary omega range must be finite and ordered".into());
        }
        if !(self.boundary.trace.tol > 0.0) || self.boundary.trace.initial_samples < 2 {
            return bad("boundary.trace needs tol > 0 and initial_samples >= 2".into());
        }
        if !(self.cycle.converge_amp_rel > 0.0 && self.cycle.ratio_threshold > 0.0 && self.cycle.min_periods >= 0.0) {
            return bad("cycle thresholds must be positive".into());
        }
        if self.selftest.thread_counts.contains(&0) || self.selftest.sweep_points < 2 {
            return bad("selftest needs thread counts >= 1 and sweep_points >= 2".into());
        }
        Ok(())
    }

    pub fn classify_options(&self) -> ClassifyOptions {
        ClassifyOptions {
            newton: self.sweep.newton,
            integrator: self.sweep.integrator,
            cycle: self.cycle,
            window: self.sweep.window,
            perturbation: self.perturbation,
        }
    }
}
