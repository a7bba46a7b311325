//! Direct quadrature of the sigma-form collision integral. Used as an oracle
//! for the spectral backend; cost O(M N_v^4 P^2).

use crate::error::{invalid, Result};
use crate::velocity::VelocityGrid;

/// Kernel constant for 2D Maxwell molecules.
pub const KERNEL: f64 = 1.0 / (2.0 * std::f64::consts::PI);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectOptions {
    pub n_angles: usize,
    /// Points per direction of the tensor Lagrange interpolant used for
    /// post-collision values (2 = bilinear). Must be even.
    pub stencil: usize,
    /// Restrict to |v' - v| <= R and |v'_* - v| <= R, matching the truncation
    /// of the spectral backend. `None` integrates the full grid.
    pub truncation: Option<f64>,
}

impl Default for DirectOptions {
    /// Eight-point interpolation, eight angles, no truncation.
    fn default() -> Self {
        DirectOptions {
            n_angles: 8,
            stencil: 8,
            truncation: None,
        }
    }
}

impl DirectOptions {
    pub fn bilinear(n_angles: usize) -> Self {
        DirectOptions {
            n_angles,
            stencil: 2,
            truncation: None,
        }
    }
}

struct Interpolator<'a> {
    f: &'a [f64],
    n: usize,
    l: f64,
    dv: f64,
    stencil: usize,
}

impl Interpolator<'_> {
    fn weights(&self, t: f64, out: &mut [f64]) {
        // Stencil offsets -(P/2 - 1) ..= P/2 around the lower grid point.
        let p = self.stencil as i64;
        let lo = -(p / 2 - 1);
        for (a, o) in out.iter_mut().enumerate() {
            let na = (lo + a as i64) as f64;
            let mut w = 1.0;
            for b in 0..p {
                let nb = (lo + b) as f64;
                if b as usize != a {
                    w *= (t - nb) / (na - nb);
                }
            }
            *o = w;
        }
    }

    /// Zero outside the grid.
    fn eval(&self, x: f64, y: f64, wx: &mut [f64], wy: &mut [f64]) -> f64 {
        let sx = (x + self.l) / self.dv - 0.5;
        let sy = (y + self.l) / self.dv - 0.5;
        let ix = sx.floor();
        let iy = sy.floor();
        self.weights(sx - ix, wx);
        self.weights(sy - iy, wy);
        let lo = -(self.stencil as i64 / 2 - 1);
        let n = self.n as i64;
        let mut acc = 0.0;
        for (a, wa) in wx.iter().enumerate() {
            let i = ix as i64 + lo + a as i64;
            if i < 0 || i >= n {
                continue;
            }
            let row = &self.f[i as usize * self.n..(i as usize + 1) * self.n];
            for (b, wb) in wy.iter().enumerate() {
                let j = iy as i64 + lo + b as i64;
                if j < 0 || j >= n {
                    continue;
                }
                acc += wa * wb * row[j as usize];
            }
        }
        acc
    }
}

/// Q(f)(v) = sum_{v_*} sum_m B (2 pi/M) dv^2 [f(v') f(v'_*) - f(v) f(v_*)].
pub fn q_direct(fv: &[f64], grid: &VelocityGrid, opts: DirectOptions) -> Result<Vec<f64>> {
    let n = grid.n_points;
    if fv.len() != n * n {
        return invalid(format!("slice has {} values, grid {}", fv.len(), n * n));
    }
    if opts.n_angles < 4 {
        return invalid("direct quadrature needs at least 4 angles");
    }
    if opts.stencil < 2 || opts.stencil % 2 != 0 {
        return invalid("interpolation stencil must be even and >= 2");
    }
    let interp = Interpolator {
        f: fv,
        n,
        l: grid.half_width,
        dv: grid.dv,
        stencil: opts.stencil,
    };
    let sig: Vec<(f64, f64)> = (0..opts.n_angles)
        .map(|m| {
            let th = 2.0 * std::f64::consts::PI * m as f64 / opts.n_angles as f64;
            (th.cos(), th.sin())
        })
        .collect();
    let r2 = opts.truncation.map(|r| r * r);
    let w = KERNEL * (2.0 * std::f64::consts::PI / opts.n_angles as f64) * grid.weight();
    let mut wx = vec![0.0; opts.stencil];
    let mut wy = vec![0.0; opts.stencil];
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        let vx = grid.points[i];
        for j in 0..n {
            let vy = grid.points[j];
            let f = fv[i * n + j];
            let mut acc = 0.0;
            for a in 0..n {
                let sx = grid.points[a];
                for b in 0..n {
                    let sy = grid.points[b];
                    let fs = fv[a * n + b];
                    let cx = 0.5 * (vx + sx);
                    let cy = 0.5 * (vy + sy);
                    let half = 0.5 * ((vx - sx).powi(2) + (vy - sy).powi(2)).sqrt();
                    for &(c, s) in &sig {
                        let (px, py) = (cx + half * c, cy + half * s);
                        let (qx, qy) = (cx - half * c, cy - half * s);
                        if let Some(r2) = r2 {
                            let d1 = (px - vx).powi(2) + (py - vy).powi(2);
                            let d2 = (qx - vx).powi(2) + (qy - vy).powi(2);
                            if d1 > r2 || d2 > r2 {
                                continue;
                            }
                        }
                        let gain = interp.eval(px, py, &mut wx, &mut wy)
                            * interp.eval(qx, qy, &mut wx, &mut wy);
                        acc += gain - f * fs;
                    }
                }
            }
            q[i * n + j] = w * acc;
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_in_zero_out() {
        let g = VelocityGrid::new(7.0, 8).unwrap();
        let q = q_direct(&vec![0.0; 64], &g, DirectOptions::bilinear(8)).unwrap();
        assert!(q.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn interpolation_reproduces_grid_values() {
        let g = VelocityGrid::new(7.0, 8).unwrap();
        let f: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin()).collect();
        for stencil in [2, 4, 8] {
            let it = Interpolator {
                f: &f,
                n: 8,
                l: 7.0,
                dv: g.dv,
                stencil,
            };
            let mut wx = vec![0.0; stencil];
            let mut wy = vec![0.0; stencil];
            for i in 0..8 {
                for j in 0..8 {
                    let v = it.eval(g.points[i], g.points[j], &mut wx, &mut wy);
                    assert!((v - f[i * 8 + j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_options() {
        let g = VelocityGrid::new(7.0, 8).unwrap();
        let f = vec![0.0; 64];
        assert!(q_direct(&f, &g, DirectOptions::bilinear(2)).is_err());
        let o = DirectOptions {
            stencil: 3,
            ..DirectOptions::bilinear(8)
        };
        assert!(q_direct(&f, &g, o).is_err());
    }
}
