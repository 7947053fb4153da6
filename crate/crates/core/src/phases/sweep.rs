use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DickeError, Result};
use crate::model::{State, SystemParams};

use super::classify::{classify_seeded, CellDiagnostics, CellOutcome, ClassifyOptions, Mode};
use super::label::{EtaRegion, PhaseLabel};

/// Evenly spaced axis, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl AxisSpec {
    pub fn new(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(DickeError::Config(format!("{name} range must be finite")));
        }
        if self.max < self.min {
            return Err(DickeError::Config(format!("{name} range is reversed")));
        }
        if self.points < 2 {
            return Err(DickeError::Config(format!("{name} needs at least 2 points")));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| if i + 1 == n { self.max } else { self.min + (self.max - self.min) * i as f64 / (n - 1) as f64 })
            .collect()
    }
}

/// Model constants shared by every cell of a sweep; omega and g vary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub omega_a: f64,
    pub omega_m: f64,
    pub kappa: f64,
    pub gamma_m: f64,
    pub u: f64,
    pub delta0: f64,
    pub eta_p: f64,
    pub n_atoms: f64,
}

impl SweepParams {
    pub fn from_system(p: &SystemParams) -> Self {
        Self {
            omega_a: p.omega_a,
            omega_m: p.omega_m,
            kappa: p.kappa,
            gamma_m: p.gamma_m,
            u: p.u,
            delta0: p.delta0,
            eta_p: p.eta_p,
            n_atoms: p.n_atoms,
        }
    }

    pub fn at(&self, omega: f64, lambda: f64) -> SystemParams {
        SystemParams {
            omega_a: self.omega_a,
            omega,
            omega_m: self.omega_m,
            kappa: self.kappa,
            gamma_m: self.gamma_m,
            g: lambda / self.n_atoms.sqrt(),
            u: self.u,
            delta0: self.delta0,
            eta_p: self.eta_p,
            n_atoms: self.n_atoms,
        }
    }
}

/// Labelled (omega, lambda) grid. Cells are stored row-major with one row
/// per lambda value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDiagram {
    /// Name of the horizontal axis; always the effective detuning `omega`.
    pub axis: String,
    pub omega_axis: Vec<f64>,
    pub lambda_axis: Vec<f64>,
    pub labels: Vec<PhaseLabel>,
    pub diagnostics: Vec<CellDiagnostics>,
    pub params: SweepParams,
    pub mode: Mode,
    pub version: String,
}

impl PhaseDiagram {
    pub fn label(&self, i_lambda: usize, i_omega: usize) -> &PhaseLabel {
        &self.labels[i_lambda * self.omega_axis.len() + i_omega]
    }

    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, &PhaseLabel)> {
        let nw = self.omega_axis.len();
        self.labels.iter().enumerate().map(move |(k, l)| (self.omega_axis[k % nw], self.lambda_axis[k / nw], l))
    }

    pub fn count(&self, pred: impl Fn(&PhaseLabel) -> bool) -> usize {
        self.labels.iter().filter(|l| pred(l)).count()
    }

    /// Area of one grid cell, MHz^2.
    pub fn cell_area(&self) -> f64 {
        let step = |v: &[f64]| if v.len() < 2 { 0.0 } else { (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64 };
        step(&self.omega_axis) * step(&self.lambda_axis)
    }

    /// Label matrix as CSV: header `lambda,<omega values>`, one row per
    /// lambda.
    pub fn write_label_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["lambda".to_string()];
        header.extend(self.omega_axis.iter().map(|w| w.to_string()));
        wr.write_record(&header)?;
        let nw = self.omega_axis.len();
        for (j, lam) in self.lambda_axis.iter().enumerate() {
            let mut row = vec![lam.to_string()];
            row.extend(self.labels[j * nw..(j + 1) * nw].iter().map(|l| l.code()));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Total area of certified 2SRA cells, MHz^2.
pub fn two_sra_area(d: &PhaseDiagram) -> f64 {
    d.count(|l| l.is_two_sra()) as f64 * d.cell_area()
}

fn sweep_row(
    base: &SweepParams,
    omegas: &[f64],
    lambda: f64,
    mode: Mode,
    opts: &ClassifyOptions,
) -> Vec<CellOutcome> {
    let mut carry: Vec<State> = Vec::new();
    omegas
        .iter()
        .map(|&w| {
            let p = base.at(w, lambda);
            match classify_seeded(&p, mode, opts, &carry) {
                Ok((cell, found)) => {
                    carry = found;
                    cell
                }
                Err(e) => {
                    carry.clear();
                    failed_cell(mode, e.to_string())
                }
            }
        })
        .collect()
}

fn failed_cell(mode: Mode, why: String) -> CellOutcome {
    CellOutcome {
        label: PhaseLabel::default(),
        diagnostics: CellDiagnostics {
            stable_count: 0,
            srb_exists: false,
            oscillation: false,
            undecided: true,
            provenance: mode,
            reference_label: None,
            dropped_seeds: 0,
            notes: vec![format!("cell failed: {why}")],
        },
    }
}

fn run_grid(base: &SweepParams, omegas: &[f64], lambdas: &[f64], mode: Mode, opts: &ClassifyOptions) -> Vec<CellOutcome> {
    let rows: Vec<Vec<CellOutcome>> =
        lambdas.par_iter().map(|&lam| sweep_row(base, omegas, lam, mode, opts)).collect();
    rows.into_iter().flatten().collect()
}

/// Classify every cell of the grid. Rows run in parallel on the current
/// rayon pool; within a row, the fixed points of each cell seed the next.
/// With a pump, each cell is also classified without it and cells that only
/// the pump makes superradiant are relabelled `ETA_SRA`/`ETA_SRB`.
pub fn sweep(
    p_base: &SystemParams,
    omega: AxisSpec,
    lambda: AxisSpec,
    mode: Mode,
    opts: &ClassifyOptions,
) -> Result<PhaseDiagram> {
    p_base.validate()?;
    omega.validate("omega")?;
    lambda.validate("lambda")?;
    let base = SweepParams::from_system(p_base);
    let omegas = omega.values();
    let lambdas = lambda.values();
    let mut cells = run_grid(&base, &omegas, &lambdas, mode, opts);

    if base.eta_p > 0.0 {
        let reference = SweepParams { eta_p: 0.0, ..base };
        let ref_cells = run_grid(&reference, &omegas, &lambdas, mode, opts);
        for (c, r) in cells.iter_mut().zip(ref_cells) {
            c.diagnostics.reference_label = Some(r.label);
            if let Some(eta) = pump_region(&c.label, &r.label) {
                c.label = PhaseLabel { eta: Some(eta), ..PhaseLabel::default() };
            }
        }
    }

    let (labels, diagnostics) = cells.into_iter().map(|c| (c.label, c.diagnostics)).unzip();
    Ok(PhaseDiagram {
        axis: "omega".into(),
        omega_axis: omegas,
        lambda_axis: lambdas,
        labels,
        diagnostics,
        params: base,
        mode,
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

fn pump_region(pumped: &PhaseLabel, reference: &PhaseLabel) -> Option<EtaRegion> {
    if pumped == reference {
        None
    } else if pumped.is_superradiant() && !reference.is_superradiant() {
        Some(EtaRegion::Sra)
    } else if pumped.srb && !reference.srb {
        Some(EtaRegion::Srb)
    } else {
        None
    }
}
