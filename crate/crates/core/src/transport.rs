//! Semi-Lagrangian DG shift in x: f(x, v) -> f(x - v1 tau, v) realised by the
//! cell recombination A(alpha) f_{j*} + B(alpha) f_{j*+1}.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::mesh::{upstream_offset, NodalBasis};
use crate::velocity::{DistributionField, PhaseSpace};

/// Row-major (k+1)x(k+1) matrices; row = target node, column = source node.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftMatrices {
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

pub fn build_shift_matrices(basis: &NodalBasis, alpha: f64) -> Result<ShiftMatrices> {
    if !(0.0..1.0).contains(&alpha) {
        return invalid(format!("shift fraction {alpha} outside [0, 1)"));
    }
    let n = basis.len();
    let u = basis.nodes();
    let w = basis.weights();
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n * n];
    for pj in 0..n {
        for p in 0..n {
            let mut sa = 0.0;
            let mut sb = 0.0;
            for q in 0..n {
                let t = u[q] * (1.0 - alpha);
                sa += w[q] * basis.cardinal(p, alpha + t) * basis.cardinal(pj, t);
                let t = alpha * (u[q] - 1.0) + 1.0;
                sb += w[q] * basis.cardinal(p, alpha * u[q]) * basis.cardinal(pj, t);
            }
            a[pj * n + p] = (1.0 - alpha) * sa / w[pj];
            b[pj * n + p] = alpha * sb / w[pj];
        }
    }
    Ok(ShiftMatrices { n, a, b })
}

/// Shift data for one first-component velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityShift {
    pub offset: i64,
    pub alpha: f64,
    pub matrices: ShiftMatrices,
}

/// One [`VelocityShift`] per grid value of v1 for a fixed duration.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPlan {
    pub tau: f64,
    pub shifts: Vec<VelocityShift>,
}

pub fn build_shift_plan(space: &PhaseSpace, tau: f64) -> Result<ShiftPlan> {
    if !tau.is_finite() {
        return invalid("shift duration must be finite");
    }
    let shifts = space
        .grid
        .points
        .iter()
        .map(|&v| {
            let (offset, alpha) = upstream_offset(space.mesh.dx, v, tau);
            Ok(VelocityShift {
                offset,
                alpha,
                matrices: build_shift_matrices(&space.basis, alpha)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShiftPlan { tau, shifts })
}

impl ShiftPlan {
    /// Source cells of output cell `j` for velocity row `ix`.
    #[inline]
    pub fn sources(&self, space: &PhaseSpace, j: usize, ix: usize) -> (usize, usize) {
        let off = self.shifts[ix].offset;
        let js = j as i64 + off;
        (space.mesh.wrap_cell(js), space.mesh.wrap_cell(js + 1))
    }

    pub fn is_identity(&self) -> bool {
        self.shifts.iter().all(|s| s.offset == 0 && s.alpha == 0.0)
    }

    /// out += coef * S[f]
    pub fn apply_add(
        &self,
        space: &PhaseSpace,
        f: &DistributionField,
        coef: f64,
        out: &mut DistributionField,
    ) -> Result<()> {
        f.check_space(space)?;
        out.check_space(space)?;
        let nb = space.basis.len();
        let nv = space.grid.n_points;
        let nv2 = nv * nv;
        let cell_len = nb * nv2;
        out.data_mut()
            .par_chunks_mut(cell_len)
            .enumerate()
            .for_each(|(j, oc)| {
                for (ix, sh) in self.shifts.iter().enumerate() {
                    let (j1, j2) = self.sources(space, j, ix);
                    let c1 = f.cell(j1);
                    let c2 = f.cell(j2);
                    let m = &sh.matrices;
                    let r = ix * nv..(ix + 1) * nv;
                    for pj in 0..nb {
                        let orow_start = pj * nv2 + r.start;
                        for p in 0..nb {
                            let a = coef * m.a[pj * nb + p];
                            if a != 0.0 {
                                let src = &c1[p * nv2 + r.start..p * nv2 + r.end];
                                let dst = &mut oc[orow_start..orow_start + nv];
                                dst.iter_mut().zip(src).for_each(|(d, s)| *d += a * s);
                            }
                            if sh.alpha != 0.0 {
                                let b = coef * m.b[pj * nb + p];
                                let src = &c2[p * nv2 + r.start..p * nv2 + r.end];
                                let dst = &mut oc[orow_start..orow_start + nv];
                                dst.iter_mut().zip(src).for_each(|(d, s)| *d += b * s);
                            }
                        }
                    }
                }
            });
        Ok(())
    }

    pub fn apply(&self, space: &PhaseSpace, f: &DistributionField) -> Result<DistributionField> {
        if self.is_identity() {
            f.check_space(space)?;
            return Ok(f.clone());
        }
        let mut out = DistributionField::zeros(space);
        self.apply_add(space, f, 1.0, &mut out)?;
        Ok(out)
    }
}

pub fn shift_apply(
    plan: &ShiftPlan,
    space: &PhaseSpace,
    f: &DistributionField,
) -> Result<DistributionField> {
    plan.apply(space, f)
}

/// Plans keyed by the exact bit pattern of the duration.
#[derive(Debug)]
pub struct ShiftCache {
    space: Arc<PhaseSpace>,
    plans: HashMap<u64, Arc<ShiftPlan>>,
}

impl ShiftCache {
    pub fn new(space: Arc<PhaseSpace>) -> Self {
        ShiftCache {
            space,
            plans: HashMap::new(),
        }
    }

    pub fn space(&self) -> &Arc<PhaseSpace> {
        &self.space
    }

    pub fn get(&mut self, tau: f64) -> Result<Arc<ShiftPlan>> {
        // -0.0 and 0.0 give the same plan.
        let tau = if tau == 0.0 { 0.0 } else { tau };
        if let Some(p) = self.plans.get(&tau.to_bits()) {
            return Ok(p.clone());
        }
        let p = Arc::new(build_shift_plan(&self.space, tau)?);
        self.plans.insert(tau.to_bits(), p.clone());
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }

    pub fn shift(&mut self, f: &DistributionField, tau: f64) -> Result<DistributionField> {
        let p = self.get(tau)?;
        p.apply(&self.space, f)
    }
}
