//! Time loop with per-step diagnostics.

use std::sync::Arc;

use serde::Serialize;
use sldg_core::collision::CollisionPlan;
use sldg_core::imex::{Solver, StepOptions};
use sldg_core::mesh::{NodalBasis, SpatialMesh};
use sldg_core::velocity::{
    ap_error, moments, raw_moments, DistributionField, MacroField, PhaseSpace, VelocityGrid,
};

use crate::config::RunConfig;
use crate::error::HarnessError;
use crate::problems::{epsilon_nodes, initial_field};

/// Relative slack for deciding that the clock has reached t_final.
const LANDING: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Totals {
    pub mass: f64,
    pub momentum: [f64; 2],
    pub energy: f64,
}

impl Totals {
    pub fn of(m: &MacroField, space: &PhaseSpace) -> Self {
        let w = space.node_weights();
        let mut t = Totals {
            mass: 0.0,
            momentum: [0.0; 2],
            energy: 0.0,
        };
        for (c, w) in m.values.iter().zip(&w) {
            t.mass += w * c.rho;
            t.momentum[0] += w * c.momentum[0];
            t.momentum[1] += w * c.momentum[1];
            t.energy += w * c.energy;
        }
        t
    }
}

/// One row of diagnostics.csv. Momentum drift is scaled by the initial mass
/// since the initial momentum may vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub totals: Totals,
    pub mass_drift: f64,
    pub momentum_drift: f64,
    pub energy_drift: f64,
    pub min_f: f64,
    pub ap_error: f64,
    pub l2: f64,
}

impl StepRecord {
    fn new(step: usize, t: f64, dt: f64, f: &DistributionField, space: &PhaseSpace, t0: &Totals) -> Self {
        let m = raw_moments(f, &space.grid);
        let totals = Totals::of(&m, space);
        let dm = ((totals.momentum[0] - t0.momentum[0]).powi(2)
            + (totals.momentum[1] - t0.momentum[1]).powi(2))
        .sqrt();
        StepRecord {
            step,
            t,
            dt,
            totals,
            mass_drift: (totals.mass - t0.mass) / t0.mass,
            momentum_drift: dm / t0.mass,
            energy_drift: (totals.energy - t0.energy) / t0.energy,
            min_f: f.min(),
            // NaN marks a state whose moments no longer define a Maxwellian.
            ap_error: ap_error(f, space).unwrap_or(f64::NAN),
            l2: f.l2_norm(space),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub moments: MacroField,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub step: usize,
    pub t: f64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub space: Arc<PhaseSpace>,
    pub dt: f64,
    /// Last good distribution (the final one if the run completed).
    pub f: DistributionField,
    pub t: f64,
    pub steps: usize,
    /// Initial state in row 0, then one row per completed step.
    pub records: Vec<StepRecord>,
    pub snapshots: Vec<Snapshot>,
    pub failure: Option<Failure>,
}

impl RunResult {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    /// Smallest nodal value of f seen over the run.
    pub fn min_f(&self) -> f64 {
        self.records.iter().map(|r| r.min_f).fold(f64::INFINITY, f64::min)
    }

    pub fn final_moments(&self) -> MacroField {
        raw_moments(&self.f, &self.space.grid)
    }

    pub fn into_result(self) -> Result<Self, HarnessError> {
        match &self.failure {
            None => Ok(self),
            Some(fl) => Err(HarnessError::Incomplete(format!(
                "step {} (t = {:.6e}) failed: {}",
                fl.step, fl.t, fl.message
            ))),
        }
    }
}

pub fn build_space(cfg: &RunConfig) -> Result<PhaseSpace, HarnessError> {
    Ok(PhaseSpace::new(
        SpatialMesh::new(cfg.x_left, cfg.x_right, cfg.n_cells, cfg.boundary)?,
        NodalBasis::new(cfg.degree)?,
        VelocityGrid::new(cfg.half_width, cfg.n_v)?,
    ))
}

pub fn build_solver(cfg: &RunConfig, space: Arc<PhaseSpace>) -> Result<Solver, HarnessError> {
    let tableau = cfg.scheme.load()?;
    let plan = Arc::new(CollisionPlan::new(&space.grid, cfg.n_angles)?);
    let eps = epsilon_nodes(cfg.epsilon, &space);
    let options = StepOptions {
        limiter: cfg.limiter,
        penalty: cfg.penalty,
        equilibrium_correction: cfg.equilibrium_correction,
    };
    Solver::new(space, tableau, plan, eps, options).map_err(|e| HarnessError::Config(e.to_string()))
}

/// Step sizes from 0 to t_final, the last one shrunk to land on t_final.
pub fn schedule(dt: f64, t_final: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = 0.0;
    while t_final - t > LANDING * t_final {
        let h = if t + dt >= t_final * (1.0 - LANDING) {
            t_final - t
        } else {
            dt
        };
        out.push(h);
        t = if h == dt { t + dt } else { t_final };
    }
    out
}

/// Runs the kinetic scheme. Setup problems are errors; a failed step ends the
/// run early and is reported in [`RunResult::failure`].
pub fn run_simulation(cfg: &RunConfig) -> Result<RunResult, HarnessError> {
    cfg.validate()?;
    let space = Arc::new(build_space(cfg)?);
    let mut solver = build_solver(cfg, space.clone())?;
    let mut f = initial_field(cfg.initial, &space);
    let u0 = moments(&f, &space.grid)?;
    let t0 = Totals::of(&u0, &space);
    let dt = cfg.time_step();
    let mut records = vec![StepRecord::new(0, 0.0, 0.0, &f, &space, &t0)];
    let mut snapshots = Vec::new();
    if cfg.snapshot_every > 0 {
        snapshots.push(Snapshot {
            step: 0,
            t: 0.0,
            moments: u0,
        });
    }
    let steps = schedule(dt, cfg.t_final);
    let mut t = 0.0;
    let mut failure = None;
    for (n, h) in steps.iter().enumerate() {
        let step = n + 1;
        let next = if step == steps.len() { cfg.t_final } else { t + h };
        let out = solver.step(&f, *h);
        let rec = out
            .as_ref()
            .ok()
            .map(|o| StepRecord::new(step, next, *h, &o.f, &space, &t0));
        match (out, rec) {
            (Ok(o), Some(r)) if r.l2.is_finite() && r.totals.mass.is_finite() => {
                f = o.f;
                t = next;
                records.push(r);
            }
            (res, _) => {
                let message = match res {
                    Err(e) => e.to_string(),
                    Ok(_) => "non-finite diagnostics".into(),
                };
                failure = Some(Failure {
                    step,
                    t: next,
                    message,
                });
                break;
            }
        }
        if cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0 && step != steps.len() {
            snapshots.push(Snapshot {
                step,
                t,
                moments: raw_moments(&f, &space.grid),
            });
        }
    }
    let steps_done = records.len() - 1;
    snapshots.push(Snapshot {
        step: steps_done,
        t,
        moments: raw_moments(&f, &space.grid),
    });
    Ok(RunResult {
        space,
        dt,
        f,
        t,
        steps: steps_done,
        records,
        snapshots,
        failure,
    })
}

/// Runs the limiting moment scheme from the moments of the initial data.
pub fn run_limiting_euler(cfg: &RunConfig) -> Result<(Arc<PhaseSpace>, MacroField), HarnessError> {
    cfg.validate()?;
    let space = Arc::new(build_space(cfg)?);
    let mut solver = build_solver(cfg, space.clone())?;
    let mut u = moments(&initial_field(cfg.initial, &space), &space.grid)?;
    let mut t = 0.0;
    for (n, h) in schedule(cfg.time_step(), cfg.t_final).into_iter().enumerate() {
        u = solver
            .limiting_euler_step(&u, h)
            .map_err(|source| HarnessError::Step { step: n + 1, t, source })?;
        t += h;
    }
    Ok((space, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_lands_on_t_final() {
        let s = schedule(0.03, 0.1);
        assert_eq!(s.len(), 4);
        assert!((s.iter().sum::<f64>() - 0.1).abs() < 1e-16);
        assert!((s[3] - 0.01).abs() < 1e-15);
        let s = schedule(0.1 / 7.0, 0.1);
        assert_eq!(s.len(), 7);
        assert!(s.iter().all(|h| (h - 0.1 / 7.0).abs() < 1e-15));
        assert_eq!(schedule(1.0, 0.1), vec![0.1]);
    }
}
