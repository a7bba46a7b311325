//! One IMEX-RK step of the AP-SLDG scheme, in the direct stage form and in the
//! Shu-Osher form, plus the limiting (epsilon -> 0) moment scheme.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::shu_osher::{shu_osher_coeffs, ShuOsherCoeffs};
use super::tableau::{ButcherPair, TableauClass, SINGULAR_TOL};
use crate::collision::CollisionPlan;
use crate::error::{invalid, Result, SldgError};
use crate::limiter::{lmpp_apply, LimiterConfig};
use crate::transport::ShiftCache;
use crate::velocity::{
    maxwellian, maxwellian_slice, moments, raw_moments, DistributionField, MacroField, PhaseSpace,
};

/// Which penalty term a stage stores for later stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PenaltyRefresh {
    /// Rebuild beta and the Maxwellian from the moments of f^(i) (the
    /// recompute-then-store order of the stage loop).
    #[default]
    Refreshed,
    /// Keep the predicted beta and Maxwellian used by the implicit solve;
    /// the direct and Shu-Osher forms coincide algebraically in this mode.
    StageConsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepOptions {
    pub limiter: LimiterConfig,
    pub penalty: PenaltyRefresh,
    /// Use Q(f) - Q(M_f) in place of Q(f).
    pub equilibrium_correction: bool,
}

/// Per-stage moments of one step.
#[derive(Debug, Clone)]
pub struct StageMoments {
    pub predicted: MacroField,
    pub actual: MacroField,
}

#[derive(Debug, Clone)]
pub struct StepOutput {
    pub f: DistributionField,
    pub stages: Vec<StageMoments>,
}

/// Stored per-stage quantities, already divided by epsilon.
struct StageData {
    f: DistributionField,
    g: Option<DistributionField>,
    qp: Option<DistributionField>,
}

pub struct Solver {
    space: Arc<PhaseSpace>,
    tableau: ButcherPair,
    class: TableauClass,
    coeffs: ShuOsherCoeffs,
    collision: Arc<CollisionPlan>,
    eps: Vec<f64>,
    cache: ShiftCache,
    options: StepOptions,
    need_g: Vec<bool>,
    need_qp: Vec<bool>,
}

impl Solver {
    /// `eps` holds epsilon at every spatial node in storage order.
    pub fn new(
        space: Arc<PhaseSpace>,
        tableau: ButcherPair,
        collision: Arc<CollisionPlan>,
        eps: Vec<f64>,
        options: StepOptions,
    ) -> Result<Self> {
        let class = tableau.classify();
        if !class.is_gsa {
            return invalid(format!(
                "tableau '{}' is not globally stiffly accurate",
                tableau.name
            ));
        }
        if eps.len() != space.n_nodes() || eps.iter().any(|e| !(*e > 0.0)) {
            return invalid("epsilon must be positive at every spatial node");
        }
        if collision.n_points() != space.grid.n_points {
            return invalid("collision plan and velocity grid disagree on N_v");
        }
        if options.limiter.enabled {
            options.limiter.validate(space.basis.degree())?;
        }
        let coeffs = shu_osher_coeffs(&tableau)?;
        let s = tableau.stages();
        let need_g = (0..s)
            .map(|j| (j + 1..s).any(|i| tableau.a[i][j] != 0.0))
            .collect();
        let need_qp = (0..s)
            .map(|j| (j + 1..s).any(|i| tableau.at[i][j] != 0.0))
            .collect();
        Ok(Solver {
            cache: ShiftCache::new(space.clone()),
            space,
            tableau,
            class,
            coeffs,
            collision,
            eps,
            options,
            need_g,
            need_qp,
        })
    }

    pub fn space(&self) -> &Arc<PhaseSpace> {
        &self.space
    }

    pub fn tableau(&self) -> &ButcherPair {
        &self.tableau
    }

    pub fn class(&self) -> TableauClass {
        self.class
    }

    pub fn coeffs(&self) -> &ShuOsherCoeffs {
        &self.coeffs
    }

    pub fn options(&self) -> StepOptions {
        self.options
    }

    pub fn set_options(&mut self, options: StepOptions) {
        self.options = options;
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }

    fn fail(stage: usize, e: SldgError) -> SldgError {
        match e {
            SldgError::StepFailure { .. } => e,
            other => SldgError::StepFailure {
                stage: stage + 1,
                reason: other.to_string(),
            },
        }
    }

    /// S_tau[x], limited when the limiter is on.
    fn shift_limited(&mut self, x: &DistributionField, tau: f64) -> Result<DistributionField> {
        let plan = self.cache.get(tau)?;
        let shifted = plan.apply(&self.space, x)?;
        if self.options.limiter.enabled && !plan.is_identity() {
            lmpp_apply(&shifted, x, &plan, &self.space, &self.options.limiter)
        } else {
            Ok(shifted)
        }
    }

    /// out += sum coef * S_tau[field], merging terms of equal duration first.
    fn add_shifted(
        &mut self,
        out: &mut DistributionField,
        terms: &[(f64, f64, &DistributionField)],
    ) -> Result<()> {
        let mut done = vec![false; terms.len()];
        for t in 0..terms.len() {
            if done[t] {
                continue;
            }
            let tau = terms[t].0;
            let mut acc = terms[t].2.clone();
            acc.scale(terms[t].1);
            for u in t + 1..terms.len() {
                if !done[u] && terms[u].0.to_bits() == tau.to_bits() {
                    acc.axpy(terms[u].1, terms[u].2);
                    done[u] = true;
                }
            }
            let plan = self.cache.get(tau)?;
            plan.apply_add(&self.space, &acc, 1.0, out)?;
        }
        Ok(())
    }

    /// Moments update: (1 - sum w) <S~_{i,0} f^n> + sum_k w_k <S~_{i,k} f^(k)>.
    fn predict(
        &mut self,
        i: usize,
        dt: f64,
        start: &DistributionField,
        history: &[&DistributionField],
    ) -> Result<MacroField> {
        let (pre, pairs) = self.coeffs.moment_weights(i);
        let grid = self.space.grid.clone();
        let mut u = raw_moments(start, &grid);
        if pairs.is_empty() {
            return Ok(u);
        }
        u.combine(pre, 0.0, &u.clone());
        for (k, w) in pairs {
            let tau = (self.tableau.ct[i] - self.tableau.ct[k]) * dt;
            let shifted = self.shift_limited(history[k], tau)?;
            u.combine(1.0, w, &raw_moments(&shifted, &grid));
        }
        Ok(u)
    }

    /// Closed-form implicit solve f = (rhs + z M)/(1 + z), z = dt a_ii beta/eps.
    fn implicit_solve(
        &self,
        rhs: &mut DistributionField,
        u: &MacroField,
        coef: f64,
        dt: f64,
    ) -> Result<()> {
        if coef == 0.0 {
            return Ok(());
        }
        let grid = &self.space.grid;
        let nv2 = grid.size();
        rhs.data_mut()
            .par_chunks_mut(nv2)
            .enumerate()
            .try_for_each_init(
                || vec![0.0; nv2],
                |m, (n, slice)| {
                    let c = &u.values[n];
                    maxwellian_slice(c, grid, m)?;
                    let z = dt * coef * c.rho / self.eps[n];
                    let inv = 1.0 / (1.0 + z);
                    slice
                        .iter_mut()
                        .zip(m.iter())
                        .for_each(|(f, m)| *f = (*f + z * m) * inv);
                    Ok(())
                },
            )
    }

    /// Stores Q_P(f)/eps and G_P(f)/eps as needed by later stages.
    fn store(
        &self,
        i: usize,
        f: DistributionField,
        predicted: &MacroField,
        force: bool,
    ) -> Result<(StageData, MacroField)> {
        let actual = raw_moments(&f, &self.space.grid);
        let need_g = self.need_g[i] || force;
        let need_qp = self.need_qp[i] || need_g;
        if !need_qp {
            return Ok((StageData { f, g: None, qp: None }, actual));
        }
        let penalty_moments = match self.options.penalty {
            PenaltyRefresh::Refreshed => {
                actual.check_admissible()?;
                &actual
            }
            PenaltyRefresh::StageConsistent => predicted,
        };
        let mut qp = maxwellian(penalty_moments, &self.space)?;
        let nv2 = self.space.grid.size();
        qp.data_mut()
            .par_chunks_mut(nv2)
            .zip(f.data().par_chunks(nv2))
            .enumerate()
            .for_each(|(n, (m, fv))| {
                let beta = penalty_moments.values[n].rho;
                m.iter_mut().zip(fv).for_each(|(m, f)| *m = beta * (*m - f));
            });
        let g = if need_g {
            let mut q = if self.options.equilibrium_correction {
                self.collision.eval_field_corrected(&f, &self.space.grid)?
            } else {
                self.collision.eval_field(&f)?
            };
            q.axpy(-1.0, &qp);
            self.divide_eps(&mut q);
            Some(q)
        } else {
            None
        };
        self.divide_eps(&mut qp);
        Ok((
            StageData {
                f,
                g,
                qp: Some(qp),
            },
            actual,
        ))
    }

    fn divide_eps(&self, x: &mut DistributionField) {
        let nv2 = self.space.grid.size();
        x.data_mut()
            .par_chunks_mut(nv2)
            .zip(self.eps.par_iter())
            .for_each(|(s, e)| {
                let inv = 1.0 / e;
                s.iter_mut().for_each(|v| *v *= inv);
            });
    }

    fn check_stage(i: usize, f: &DistributionField, u: &MacroField) -> Result<()> {
        u.check_admissible().map_err(|e| Self::fail(i, e))?;
        if !f.is_finite() {
            return Err(SldgError::StepFailure {
                stage: i + 1,
                reason: "non-finite distribution values".into(),
            });
        }
        Ok(())
    }

    /// Advances f^n by dt with the direct stage form.
    pub fn step(&mut self, f_n: &DistributionField, dt: f64) -> Result<StepOutput> {
        f_n.check_space(&self.space)?;
        moments(f_n, &self.space.grid)
            .and_then(|m| m.check_admissible())
            .map_err(|e| Self::fail(0, e))?;
        let s = self.tableau.stages();
        let t = self.tableau.clone();
        let mut data: Vec<StageData> = Vec::with_capacity(s);
        let mut report = Vec::with_capacity(s);
        for i in 0..s {
            let start = self
                .shift_limited(f_n, t.ct[i] * dt)
                .map_err(|e| Self::fail(i, e))?;
            let hist: Vec<&DistributionField> = data.iter().map(|d| &d.f).collect();
            let predicted = self
                .predict(i, dt, &start, &hist)
                .map_err(|e| Self::fail(i, e))?;
            predicted.check_admissible().map_err(|e| Self::fail(i, e))?;

            let mut rhs = start;
            let mut terms = Vec::new();
            for (j, d) in data.iter().enumerate() {
                if t.a[i][j] != 0.0 {
                    let g = d.g.as_ref().expect("explicit history present");
                    terms.push(((t.c[i] - t.c[j]) * dt, dt * t.a[i][j], g));
                }
                if t.at[i][j] != 0.0 {
                    let qp = d.qp.as_ref().expect("implicit history present");
                    terms.push(((t.ct[i] - t.ct[j]) * dt, dt * t.at[i][j], qp));
                }
            }
            self.add_shifted(&mut rhs, &terms)
                .map_err(|e| Self::fail(i, e))?;
            self.implicit_solve(&mut rhs, &predicted, t.at[i][i], dt)
                .map_err(|e| Self::fail(i, e))?;
            let (d, actual) = self
                .store(i, rhs, &predicted, false)
                .map_err(|e| Self::fail(i, e))?;
            Self::check_stage(i, &d.f, &actual)?;
            data.push(d);
            report.push(StageMoments { predicted, actual });
        }
        Ok(StepOutput {
            f: data.pop().expect("at least one stage").f,
            stages: report,
        })
    }

    /// Same step through the Shu-Osher form. Agrees with [`Solver::step`]
    /// under [`PenaltyRefresh::StageConsistent`] whenever the discrete shifts
    /// compose exactly (whole-cell shifts or x-independent data). CK tableaux
    /// additionally need c = c~.
    pub fn step_shu_osher(&mut self, f_n: &DistributionField, dt: f64) -> Result<StepOutput> {
        f_n.check_space(&self.space)?;
        let saved = self.options;
        self.options.penalty = PenaltyRefresh::StageConsistent;
        let r = match self.coeffs.clone() {
            ShuOsherCoeffs::Ck(st) => self.shu_osher_ck(f_n, dt, &st),
            ShuOsherCoeffs::TypeA(st) => self.shu_osher_a(f_n, dt, &st),
        };
        self.options = saved;
        r
    }

    fn shu_osher_ck(
        &mut self,
        f_n: &DistributionField,
        dt: f64,
        st: &[super::shu_osher::CkStage],
    ) -> Result<StepOutput> {
        let t = self.tableau.clone();
        if t.c.iter().zip(&t.ct).any(|(a, b)| (a - b).abs() > SINGULAR_TOL) {
            return invalid("the CK Shu-Osher form assumes c = c~");
        }
        let s = t.stages();
        let u0 = moments(f_n, &self.space.grid)?;
        u0.check_admissible().map_err(|e| Self::fail(0, e))?;
        let (d0, a0) = self.store(0, f_n.clone(), &u0, true)?;
        let mut data = vec![d0];
        let mut report = vec![StageMoments {
            predicted: u0,
            actual: a0,
        }];
        for i in 1..s {
            let c = &st[i];
            let start = self.shift_limited(f_n, t.ct[i] * dt)?;
            let hist: Vec<&DistributionField> = data.iter().map(|d| &d.f).collect();
            let predicted = self.predict(i, dt, &start, &hist)?;
            predicted.check_admissible().map_err(|e| Self::fail(i, e))?;
            let pre = 1.0 - c.b.iter().sum::<f64>();
            let mut rhs = start;
            rhs.scale(pre);
            let mut terms: Vec<(f64, f64, &DistributionField)> = Vec::new();
            for (k, &w) in c.b.iter().enumerate() {
                terms.push(((t.ct[i] - t.ct[k + 1]) * dt, w, &data[k + 1].f));
            }
            for (k, &w) in c.d_vec.iter().enumerate() {
                if w != 0.0 {
                    let g = data[k + 1].g.as_ref().expect("stored");
                    terms.push(((t.c[i] - t.c[k + 1]) * dt, dt * w, g));
                }
            }
            terms.push(((t.c[i] - t.c[0]) * dt, dt * c.d, data[0].g.as_ref().expect("stored")));
            if c.e != 0.0 {
                terms.push(((t.ct[i] - t.ct[0]) * dt, dt * c.e, data[0].qp.as_ref().expect("stored")));
            }
            self.add_shifted(&mut rhs, &terms)?;
            self.implicit_solve(&mut rhs, &predicted, c.implicit, dt)?;
            let (d, actual) = self.store(i, rhs, &predicted, true)?;
            Self::check_stage(i, &d.f, &actual)?;
            data.push(d);
            report.push(StageMoments { predicted, actual });
        }
        Ok(StepOutput {
            f: data.pop().expect("stages").f,
            stages: report,
        })
    }

    fn shu_osher_a(
        &mut self,
        f_n: &DistributionField,
        dt: f64,
        st: &[super::shu_osher::AStage],
    ) -> Result<StepOutput> {
        let t = self.tableau.clone();
        let s = t.stages();
        let mut data: Vec<StageData> = Vec::new();
        let mut e_terms: Vec<DistributionField> = Vec::new();
        let mut report = Vec::new();
        for i in 0..s {
            let c = &st[i];
            let start = self.shift_limited(f_n, t.ct[i] * dt)?;
            let hist: Vec<&DistributionField> = data.iter().map(|d| &d.f).collect();
            let predicted = self.predict(i, dt, &start, &hist)?;
            predicted.check_admissible().map_err(|e| Self::fail(i, e))?;

            // dt E^i
            let mut e_i = DistributionField::zeros(&self.space);
            let mut terms: Vec<(f64, f64, &DistributionField)> = Vec::new();
            for j in 0..i {
                if t.a[i][j] != 0.0 {
                    let g = data[j].g.as_ref().expect("stored");
                    terms.push(((t.c[i] - t.c[j]) * dt, dt * t.a[i][j], g));
                }
                if c.e_coef[j] != 0.0 {
                    terms.push(((t.ct[i] - t.ct[j]) * dt, -c.e_coef[j], &e_terms[j]));
                }
            }
            self.add_shifted(&mut e_i, &terms)?;

            let pre = 1.0 - c.b.iter().sum::<f64>();
            let mut rhs = start;
            rhs.scale(pre);
            let terms: Vec<(f64, f64, &DistributionField)> = c
                .b
                .iter()
                .enumerate()
                .map(|(j, &w)| ((t.ct[i] - t.ct[j]) * dt, w, &data[j].f))
                .collect();
            self.add_shifted(&mut rhs, &terms)?;
            rhs.axpy(1.0, &e_i);
            self.implicit_solve(&mut rhs, &predicted, t.at[i][i], dt)?;
            let (d, actual) = self.store(i, rhs, &predicted, true)?;
            Self::check_stage(i, &d.f, &actual)?;
            data.push(d);
            e_terms.push(e_i);
            report.push(StageMoments { predicted, actual });
        }
        Ok(StepOutput {
            f: data.pop().expect("stages").f,
            stages: report,
        })
    }

    /// Limiting scheme: stage moments from shifted Maxwellians only.
    pub fn limiting_euler_step(&mut self, u_n: &MacroField, dt: f64) -> Result<MacroField> {
        u_n.check_admissible().map_err(|e| Self::fail(0, e))?;
        let s = self.tableau.stages();
        let m_n = maxwellian(u_n, &self.space)?;
        let mut hist: Vec<DistributionField> = Vec::with_capacity(s);
        let mut last = u_n.clone();
        for i in 0..s {
            let start = self
                .shift_limited(&m_n, self.tableau.ct[i] * dt)
                .map_err(|e| Self::fail(i, e))?;
            let refs: Vec<&DistributionField> = hist.iter().collect();
            let u = self
                .predict(i, dt, &start, &refs)
                .map_err(|e| Self::fail(i, e))?;
            u.check_admissible().map_err(|e| Self::fail(i, e))?;
            if i + 1 < s {
                hist.push(maxwellian(&u, &self.space).map_err(|e| Self::fail(i, e))?);
            }
            last = u;
        }
        Ok(last)
    }
}
