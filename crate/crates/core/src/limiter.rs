//! Local-maximum-principle-preserving rescaling of shifted cell polynomials.
//!
//! Each shifted polynomial p is replaced by theta (p - mean) + mean, where theta
//! keeps its sampled range inside the range of the upstream cells it came from.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::transport::ShiftPlan;
use crate::velocity::{DistributionField, PhaseSpace};

/// Denominators below this are treated as an unconstrained side.
const FLAT: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimiterConfig {
    pub enabled: bool,
    /// Uniform sample points per cell in addition to nodes and endpoints.
    pub sample_count: usize,
}

impl Default for LimiterConfig {
    fn default() -> Self {
        LimiterConfig {
            enabled: false,
            sample_count: 16,
        }
    }
}

impl LimiterConfig {
    pub fn enabled() -> Self {
        LimiterConfig {
            enabled: true,
            ..Default::default()
        }
    }

    pub fn validate(&self, degree: usize) -> Result<()> {
        if self.sample_count < degree + 3 {
            return invalid(format!(
                "limiter needs at least {} samples per cell, got {}",
                degree + 3,
                self.sample_count
            ));
        }
        Ok(())
    }
}

/// Cardinal values at the sampling points, row-major [sample][node].
fn sample_matrix(space: &PhaseSpace, cfg: &LimiterConfig) -> (usize, Vec<f64>) {
    let b = &space.basis;
    let mut pts: Vec<f64> = b.nodes().to_vec();
    pts.push(0.0);
    pts.push(1.0);
    let m = cfg.sample_count;
    pts.extend((0..m).map(|i| (i as f64 + 0.5) / m as f64));
    let mat = pts.iter().flat_map(|&s| b.cardinals(s)).collect();
    (pts.len(), mat)
}

#[inline]
fn sampled_range(vals: &[f64], ns: usize, mat: &[f64]) -> (f64, f64) {
    let nb = vals.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in 0..ns {
        let row = &mat[s * nb..(s + 1) * nb];
        let v: f64 = row.iter().zip(vals).map(|(a, b)| a * b).sum();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Rescaling factor in [0, 1] for a polynomial with mean `mean` and sampled
/// range [lo, hi] against the bounds [m, big_m].
pub fn lmpp_theta(mean: f64, lo: f64, hi: f64, m: f64, big_m: f64) -> f64 {
    let ratio = |bound: f64, ext: f64| {
        let d = ext - mean;
        if d.abs() < FLAT {
            f64::INFINITY
        } else {
            ((bound - mean) / d).abs()
        }
    };
    ratio(big_m, hi).min(ratio(m, lo)).clamp(0.0, 1.0)
}

pub fn lmpp_apply(
    f_shifted: &DistributionField,
    f_before: &DistributionField,
    plan: &ShiftPlan,
    space: &PhaseSpace,
    cfg: &LimiterConfig,
) -> Result<DistributionField> {
    f_shifted.check_space(space)?;
    f_before.check_space(space)?;
    if !cfg.enabled {
        return Ok(f_shifted.clone());
    }
    cfg.validate(space.basis.degree())?;
    let nb = space.basis.len();
    let nv = space.grid.n_points;
    let nv2 = nv * nv;
    let (ns, mat) = sample_matrix(space, cfg);
    let w = space.basis.weights();

    // Sampled (min, max) of every upstream cell polynomial per velocity.
    let bounds: Vec<(f64, f64)> = (0..space.mesh.n_cells)
        .into_par_iter()
        .flat_map_iter(|j| {
            let cell = f_before.cell(j);
            let mat = &mat;
            (0..nv2).map(move |iv| {
                let vals: Vec<f64> = (0..nb).map(|p| cell[p * nv2 + iv]).collect();
                sampled_range(&vals, ns, mat)
            })
        })
        .collect();

    let mut out = f_shifted.clone();
    out.data_mut()
        .par_chunks_mut(nb * nv2)
        .enumerate()
        .for_each(|(j, oc)| {
            let mut vals = vec![0.0; nb];
            for ix in 0..nv {
                let (j1, j2) = plan.sources(space, j, ix);
                let two = plan.shifts[ix].alpha > 0.0;
                for iy in 0..nv {
                    let iv = ix * nv + iy;
                    let (mut m, mut big_m) = bounds[j1 * nv2 + iv];
                    if two {
                        let (m2, big_m2) = bounds[j2 * nv2 + iv];
                        m = m.min(m2);
                        big_m = big_m.max(big_m2);
                    }
                    for p in 0..nb {
                        vals[p] = oc[p * nv2 + iv];
                    }
                    let mean: f64 = vals.iter().zip(w).map(|(v, w)| v * w).sum();
                    let (lo, hi) = sampled_range(&vals, ns, &mat);
                    let theta = lmpp_theta(mean, lo, hi, m, big_m);
                    if theta < 1.0 {
                        for p in 0..nb {
                            oc[p * nv2 + iv] = theta * (vals[p] - mean) + mean;
                        }
                    }
                }
            }
        });
    Ok(out)
}
