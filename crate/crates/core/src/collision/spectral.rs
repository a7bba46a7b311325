//! Fast Fourier-spectral evaluation of the truncated 2D Maxwell-molecule
//! collision operator in Carleman form.
//!
//! With period 2L (omega = pi/L) and truncation radius R,
//!
//!   Q+(v) = (1/M) sum_p  [sum_l a_p(l) f_l e^{i omega l.v}] [sum_m a'_p(m) f_m e^{i omega m.v}]
//!   Q-(v) = f(v)   sum_m  L(m) f_m e^{i omega m.v}
//!
//! where a_p(k) = phi(k.e_p), a'_p(k) = phi(k.e_p^perp), theta_p = p pi / M,
//! phi(s) = int_{-R}^{R} e^{i omega rho s} d rho and L(m) = (1/M) sum_p a_p(m) a'_p(m).
//! phi is tabulated by Gauss-Legendre quadrature.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result, SldgError};
use crate::mesh::gauss_legendre_unit;
use crate::velocity::{maxwellian_slice, slice_moments, DistributionField, VelocityGrid};

/// Points of the radial quadrature behind phi, split over panels.
const RADIAL_PANELS: usize = 4;
const RADIAL_POINTS: usize = 32;

pub struct CollisionPlan {
    n: usize,
    half_width: f64,
    radius: f64,
    n_angles: usize,
    // Tables in transposed spectral layout [ky][kx], Nyquist modes zeroed.
    gain: Vec<(Vec<f64>, Vec<f64>)>,
    loss: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CollisionPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CollisionPlan")
            .field("n", &self.n)
            .field("half_width", &self.half_width)
            .field("radius", &self.radius)
            .field("n_angles", &self.n_angles)
            .finish()
    }
}

/// Signed Fourier mode of DFT index `i`; `None` for the Nyquist index.
fn mode(i: usize, n: usize) -> Option<f64> {
    if 2 * i == n {
        None
    } else if 2 * i < n {
        Some(i as f64)
    } else {
        Some(i as f64 - n as f64)
    }
}

/// phi(s) = int_{-R}^{R} cos(omega rho s) d rho by composite Gauss-Legendre.
pub(crate) struct RadialRule {
    rho: Vec<f64>,
    w: Vec<f64>,
}

impl RadialRule {
    pub(crate) fn new(radius: f64) -> Self {
        let (x, w) = gauss_legendre_unit(RADIAL_POINTS).expect("nonzero point count");
        let h = 2.0 * radius / RADIAL_PANELS as f64;
        let mut rho = Vec::new();
        let mut ww = Vec::new();
        for panel in 0..RADIAL_PANELS {
            let a = -radius + panel as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                rho.push(a + xi * h);
                ww.push(wi * h);
            }
        }
        RadialRule { rho, w: ww }
    }

    pub(crate) fn phi(&self, omega_s: f64) -> f64 {
        self.rho
            .iter()
            .zip(&self.w)
            .map(|(r, w)| w * (omega_s * r).cos())
            .sum()
    }
}

impl CollisionPlan {
    /// Plan with truncation radius L/2.
    pub fn new(grid: &VelocityGrid, n_angles: usize) -> Result<Self> {
        Self::with_radius(grid, n_angles, grid.half_width / 2.0)
    }

    pub fn with_radius(grid: &VelocityGrid, n_angles: usize, radius: f64) -> Result<Self> {
        let n = grid.n_points;
        if n < 8 {
            return invalid(format!("spectral collision needs N_v >= 8, got {n}"));
        }
        if n_angles < 4 {
            return invalid(format!("need at least 4 angles, got {n_angles}"));
        }
        if !(radius > 0.0) || 2.0 * radius > 2.0 * grid.half_width {
            return invalid(format!("truncation radius {radius} incompatible with L"));
        }
        let omega = std::f64::consts::PI / grid.half_width;
        let rule = RadialRule::new(radius);
        let mut gain = Vec::with_capacity(n_angles);
        let mut loss = vec![0.0; n * n];
        for p in 0..n_angles {
            let th = std::f64::consts::PI * p as f64 / n_angles as f64;
            let (s, c) = th.sin_cos();
            let mut a = vec![0.0; n * n];
            let mut b = vec![0.0; n * n];
            for iy in 0..n {
                for ix in 0..n {
                    let (Some(ky), Some(kx)) = (mode(iy, n), mode(ix, n)) else {
                        continue;
                    };
                    let idx = iy * n + ix;
                    a[idx] = rule.phi(omega * (kx * c + ky * s));
                    b[idx] = rule.phi(omega * (-kx * s + ky * c));
                }
            }
            for ((l, x), y) in loss.iter_mut().zip(&a).zip(&b) {
                *l += x * y;
            }
            gain.push((a, b));
        }
        loss.iter_mut().for_each(|l| *l /= n_angles as f64);
        let mut planner = FftPlanner::new();
        Ok(CollisionPlan {
            n,
            half_width: grid.half_width,
            radius,
            n_angles,
            gain,
            loss,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        })
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n_angles(&self) -> usize {
        self.n_angles
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Gain multipliers (a_p, a'_p) at DFT indices (ix, iy).
    pub fn gain_weights(&self, p: usize, ix: usize, iy: usize) -> (f64, f64) {
        let i = iy * self.n + ix;
        (self.gain[p].0[i], self.gain[p].1[i])
    }

    pub fn loss_weight(&self, ix: usize, iy: usize) -> f64 {
        self.loss[iy * self.n + ix]
    }

    pub fn workspace(&self) -> Workspace {
        let n2 = self.n * self.n;
        let scratch = self
            .fwd
            .get_inplace_scratch_len()
            .max(self.inv.get_inplace_scratch_len());
        Workspace {
            hat: vec![Complex::default(); n2],
            t1: vec![Complex::default(); n2],
            t2: vec![Complex::default(); n2],
            gain: vec![0.0; n2],
            scratch: vec![Complex::default(); scratch],
        }
    }

    /// Evaluates Q(fv) into `out` on one velocity slice.
    pub fn eval(&self, fv: &[f64], out: &mut [f64], ws: &mut Workspace) -> Result<()> {
        let n2 = self.n * self.n;
        if fv.len() != n2 || out.len() != n2 {
            return Err(SldgError::ShapeMismatch(format!(
                "collision plan expects {n2} values, got {} in / {} out",
                fv.len(),
                out.len()
            )));
        }
        let inv_n2 = 1.0 / n2 as f64;
        for (h, &f) in ws.hat.iter_mut().zip(fv) {
            *h = Complex::new(f * inv_n2, 0.0);
        }
        self.forward(&mut ws.hat, &mut ws.scratch);
        ws.gain.iter_mut().for_each(|g| *g = 0.0);
        for (a, b) in &self.gain {
            for ((t1, t2), (h, (x, y))) in ws
                .t1
                .iter_mut()
                .zip(ws.t2.iter_mut())
                .zip(ws.hat.iter().zip(a.iter().zip(b)))
            {
                *t1 = h * *x;
                *t2 = h * *y;
            }
            self.inverse(&mut ws.t1, &mut ws.scratch);
            self.inverse(&mut ws.t2, &mut ws.scratch);
            for (g, (x, y)) in ws.gain.iter_mut().zip(ws.t1.iter().zip(&ws.t2)) {
                *g += x.re * y.re;
            }
        }
        for (t, (h, l)) in ws.t1.iter_mut().zip(ws.hat.iter().zip(&self.loss)) {
            *t = h * *l;
        }
        self.inverse(&mut ws.t1, &mut ws.scratch);
        let inv_m = 1.0 / self.n_angles as f64;
        for (o, ((g, t), f)) in out.iter_mut().zip(ws.gain.iter().zip(&ws.t1).zip(fv)) {
            *o = g * inv_m - f * t.re;
        }
        Ok(())
    }

    /// Convenience wrapper allocating its own workspace.
    pub fn q(&self, fv: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; fv.len()];
        let mut ws = self.workspace();
        self.eval(fv, &mut out, &mut ws)?;
        Ok(out)
    }

    /// Q(f) at every spatial node, parallel over nodes.
    pub fn eval_field(&self, f: &DistributionField) -> Result<DistributionField> {
        if f.n_v() != self.n {
            return Err(SldgError::ShapeMismatch(format!(
                "field has N_v = {}, plan has {}",
                f.n_v(),
                self.n
            )));
        }
        let mut out = f.clone();
        let n2 = self.n * self.n;
        out.data_mut()
            .par_chunks_mut(n2)
            .zip(f.data().par_chunks(n2))
            .try_for_each_init(
                || self.workspace(),
                |ws, (o, fv)| self.eval(fv, o, ws),
            )?;
        Ok(out)
    }

    /// Q(f) - Q(M_f) at every spatial node: the discrete operator shifted so
    /// that Maxwellians are exact equilibria even when the grid under-resolves
    /// them.
    pub fn eval_field_corrected(
        &self,
        f: &DistributionField,
        grid: &VelocityGrid,
    ) -> Result<DistributionField> {
        if f.n_v() != self.n || grid.n_points != self.n {
            return Err(SldgError::ShapeMismatch(format!(
                "field has N_v = {}, plan has {}",
                f.n_v(),
                self.n
            )));
        }
        let mut out = f.clone();
        let n2 = self.n * self.n;
        out.data_mut()
            .par_chunks_mut(n2)
            .zip(f.data().par_chunks(n2))
            .try_for_each_init(
                || (self.workspace(), vec![0.0; n2], vec![0.0; n2]),
                |(ws, m, qm), (o, fv)| {
                    maxwellian_slice(&slice_moments(fv, grid), grid, m)?;
                    self.eval(m, qm, ws)?;
                    self.eval(fv, o, ws)?;
                    o.iter_mut().zip(qm.iter()).for_each(|(o, q)| *o -= q);
                    Ok(())
                },
            )?;
        Ok(out)
    }

    // Row FFTs, transpose, row FFTs: leaves the spectrum as [ky][kx].
    fn forward(&self, buf: &mut [Complex<f64>], scratch: &mut [Complex<f64>]) {
        self.fwd.process_with_scratch(buf, scratch);
        transpose(buf, self.n);
        self.fwd.process_with_scratch(buf, scratch);
    }

    // Inverse of `forward` up to the 1/N^2 factor folded into the input.
    fn inverse(&self, buf: &mut [Complex<f64>], scratch: &mut [Complex<f64>]) {
        self.inv.process_with_scratch(buf, scratch);
        transpose(buf, self.n);
        self.inv.process_with_scratch(buf, scratch);
    }
}

pub struct Workspace {
    hat: Vec<Complex<f64>>,
    t1: Vec<Complex<f64>>,
    t2: Vec<Complex<f64>>,
    gain: Vec<f64>,
    scratch: Vec<Complex<f64>>,
}

fn transpose(buf: &mut [Complex<f64>], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

pub fn build_collision_plan(grid: &VelocityGrid, n_angles: usize) -> Result<CollisionPlan> {
    CollisionPlan::new(grid, n_angles)
}

pub fn q_spectral(plan: &CollisionPlan, fv: &[f64]) -> Result<Vec<f64>> {
    plan.q(fv)
}
