//! Drivers for the convergence, relaxation, shock-tube and mixing studies.

use std::sync::Arc;

use serde::Serialize;
use sldg_core::imex::Builtin;
use sldg_core::mesh::Boundary;
use sldg_core::velocity::{error_norms, restrict, MacroField, PhaseSpace};

use crate::config::{Epsilon, InitialCondition, RunConfig, SchemeSpec};
use crate::error::HarnessError;
use crate::run::{run_limiting_euler, run_simulation, RunResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n_x: usize,
    pub e1: f64,
    pub order1: Option<f64>,
    pub e2: f64,
    pub order2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub scheme: String,
    pub degree: usize,
    pub cfl: f64,
    pub epsilon: String,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn last(&self) -> &ConvergenceRow {
        self.rows.last().expect("at least one row")
    }
}

/// Self-convergence in density: e_N compares the N-cell solution, evaluated at
/// the nodes of the N/2-cell mesh, with the N/2-cell solution. The first mesh
/// only serves as the coarse partner of the second.
pub fn run_convergence(base: &RunConfig, n_list: &[usize]) -> Result<ConvergenceTable, HarnessError> {
    if n_list.len() < 2 || n_list[0] < 4 || n_list.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(HarnessError::Config(
            "convergence needs successive doublings starting at 4 or more cells".into(),
        ));
    }
    let mut finals: Vec<(Arc<PhaseSpace>, MacroField)> = Vec::new();
    for &n in n_list {
        let cfg = RunConfig {
            n_cells: n,
            ..base.clone()
        };
        let r = run_simulation(&cfg)?.into_result()?;
        finals.push((r.space.clone(), r.final_moments()));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for w in finals.windows(2) {
        let (coarse_space, coarse) = &w[0];
        let (fine_space, fine) = &w[1];
        let on_coarse = restrict(fine, fine_space, coarse_space)?;
        let (e1, e2) = error_norms(&on_coarse, coarse, coarse_space)?;
        let order = |prev: f64, cur: f64| (prev / cur).log2();
        let (order1, order2) = match rows.last() {
            Some(p) => (Some(order(p.e1, e1)), Some(order(p.e2, e2))),
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            n_x: fine_space.mesh.n_cells,
            e1,
            order1,
            e2,
            order2,
        });
    }
    Ok(ConvergenceTable {
        scheme: base.scheme.label(),
        degree: base.degree,
        cfl: base.cfl,
        epsilon: base.epsilon.to_string(),
        rows,
    })
}

/// Relative weighted l2 differences of (rho, u1, T) of `b` against `a`.
pub fn moment_differences(a: &MacroField, b: &MacroField, space: &PhaseSpace) -> [f64; 3] {
    let w = space.node_weights();
    let mut num = [0.0; 3];
    let mut den = [0.0; 3];
    for ((x, y), w) in a.values.iter().zip(&b.values).zip(&w) {
        let xa = [x.rho, x.velocity()[0], x.temperature()];
        let ya = [y.rho, y.velocity()[0], y.temperature()];
        for i in 0..3 {
            num[i] += w * (xa[i] - ya[i]).powi(2);
            den[i] += w * xa[i].powi(2);
        }
    }
    [0, 1, 2].map(|i| (num[i] / den[i]).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApSeries {
    pub scheme: String,
    pub epsilon: f64,
    pub times: Vec<f64>,
    pub ap_error: Vec<f64>,
    pub completed: bool,
    /// e_rho, e_u1, e_T against the limiting moment scheme at t_final.
    pub euler_differences: Option<[f64; 3]>,
}

impl ApSeries {
    pub fn after_first_step(&self) -> f64 {
        self.ap_error[1]
    }

    pub fn final_value(&self) -> f64 {
        *self.ap_error.last().expect("initial record")
    }
}

pub fn run_ap_decay(
    base: &RunConfig,
    schemes: &[SchemeSpec],
    epsilons: &[f64],
) -> Result<Vec<ApSeries>, HarnessError> {
    let mut out = Vec::new();
    for scheme in schemes {
        for &eps in epsilons {
            let cfg = RunConfig {
                scheme: scheme.clone(),
                epsilon: Epsilon::Constant(eps),
                ..base.clone()
            };
            let r = run_simulation(&cfg)?;
            let euler_differences = if r.completed() {
                let (space, u) = run_limiting_euler(&cfg)?;
                Some(moment_differences(&u, &r.final_moments(), &space))
            } else {
                None
            };
            out.push(ApSeries {
                scheme: scheme.label(),
                epsilon: eps,
                times: r.records.iter().map(|s| s.t).collect(),
                ap_error: r.records.iter().map(|s| s.ap_error).collect(),
                completed: r.completed(),
                euler_differences,
            });
        }
    }
    Ok(out)
}

/// Reference profile on its own mesh.
#[derive(Debug, Clone)]
pub struct Reference {
    pub label: String,
    pub space: Arc<PhaseSpace>,
    pub moments: MacroField,
}

impl Reference {
    /// Relative l2 density error of `r` against this reference, measured at
    /// the nodes of `r`.
    pub fn density_error(&self, r: &RunResult) -> Result<f64, HarnessError> {
        let on_coarse = restrict(&self.moments, &self.space, &r.space)?;
        Ok(error_norms(&on_coarse, &r.final_moments(), &r.space)?.1)
    }
}

/// Fine kinetic reference: first-order scheme on `n_cells` with a fixed step.
pub fn fine_reference(cfg: &RunConfig, n_cells: usize, dt: f64) -> Result<Reference, HarnessError> {
    let fine = RunConfig {
        n_cells,
        dt: Some(dt),
        scheme: SchemeSpec::Builtin(Builtin::FBEuler),
        snapshot_every: 0,
        output_dir: None,
        ..cfg.clone()
    };
    let r = run_simulation(&fine)?.into_result()?;
    Ok(Reference {
        label: format!("FBEuler, {n_cells} cells, dt = {dt:e}"),
        moments: r.final_moments(),
        space: r.space,
    })
}

pub const REFERENCE_CELLS: usize = 200;
pub const REFERENCE_DT: f64 = 3e-4;

/// Reference for the shock-tube and mixing problems: fine FBEuler run.
pub fn profile_reference(cfg: &RunConfig) -> Result<Reference, HarnessError> {
    fine_reference(cfg, REFERENCE_CELLS, REFERENCE_DT)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileReport {
    pub scheme: String,
    pub cfl: f64,
    pub epsilon: String,
    pub completed: bool,
    pub failure: Option<crate::run::Failure>,
    pub min_f: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub e2_rho: Option<f64>,
    pub reference: String,
}

pub fn profile_report(cfg: &RunConfig, r: &RunResult, reference: &Reference) -> Result<ProfileReport, HarnessError> {
    let rho = r.final_moments().densities();
    Ok(ProfileReport {
        scheme: cfg.scheme.label(),
        cfl: cfg.cfl,
        epsilon: cfg.epsilon.to_string(),
        completed: r.completed(),
        failure: r.failure.clone(),
        min_f: r.min_f(),
        rho_min: rho.iter().copied().fold(f64::INFINITY, f64::min),
        rho_max: rho.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        e2_rho: if r.completed() {
            Some(reference.density_error(r)?)
        } else {
            None
        },
        reference: reference.label.clone(),
    })
}

/// Shock tube with Neumann ends and the limiter on.
pub fn run_sod(cfg: &RunConfig, reference: &Reference) -> Result<(RunResult, ProfileReport), HarnessError> {
    if cfg.boundary != Boundary::Neumann || cfg.initial != InitialCondition::Sod {
        return Err(HarnessError::Config("shock tube needs Sod data and Neumann ends".into()));
    }
    let r = run_simulation(cfg)?;
    let rep = profile_report(cfg, &r, reference)?;
    Ok((r, rep))
}

/// Mixing-regime problem with the tanh epsilon profile.
pub fn run_mixing(cfg: &RunConfig, reference: &Reference) -> Result<(RunResult, ProfileReport), HarnessError> {
    if cfg.boundary != Boundary::Periodic || !matches!(cfg.epsilon, Epsilon::Mixing { .. }) {
        return Err(HarnessError::Config(
            "mixing problem needs periodic ends and the tanh epsilon profile".into(),
        ));
    }
    let r = run_simulation(cfg)?;
    let rep = profile_report(cfg, &r, reference)?;
    Ok((r, rep))
}
