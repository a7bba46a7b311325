#![allow(dead_code)]

use sldg_core::mesh::{Boundary, NodalBasis, SpatialMesh};
use sldg_core::velocity::{maxwellian_slice, Conserved, PhaseSpace, VelocityGrid};

pub fn space(nx: usize, k: usize, nv: usize, bc: Boundary) -> PhaseSpace {
    PhaseSpace::new(
        SpatialMesh::new(0.0, 1.0, nx, bc).unwrap(),
        NodalBasis::new(k).unwrap(),
        VelocityGrid::new(7.0, nv).unwrap(),
    )
}

pub fn maxwellian_values(grid: &VelocityGrid, rho: f64, u: [f64; 2], t: f64) -> Vec<f64> {
    let mut out = vec![0.0; grid.size()];
    maxwellian_slice(&Conserved::from_primitive(rho, u, t), grid, &mut out).unwrap();
    out
}

/// 0.5 M((1, 0), 0.8) + 0.5 M((-1, 0.5), 0.8)
pub fn bi_maxwellian(grid: &VelocityGrid) -> Vec<f64> {
    let a = maxwellian_values(grid, 1.0, [1.0, 0.0], 0.8);
    let b = maxwellian_values(grid, 1.0, [-1.0, 0.5], 0.8);
    a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// M(1, 0, 1) (1 + 0.3 sin(vx) exp(-0.1 vy^2))
pub fn perturbed_maxwellian(grid: &VelocityGrid) -> Vec<f64> {
    let m = maxwellian_values(grid, 1.0, [0.0, 0.0], 1.0);
    let n = grid.n_points;
    (0..n * n)
        .map(|i| {
            let (vx, vy) = (grid.points[i / n], grid.points[i % n]);
            m[i] * (1.0 + 0.3 * vx.sin() * (-0.1 * vy * vy).exp())
        })
        .collect()
}

pub fn l2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn l2_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Loss term rho f, the natural scale of Q when Q itself nearly vanishes.
pub fn loss_scale(f: &[f64], grid: &VelocityGrid) -> f64 {
    let rho: f64 = f.iter().sum::<f64>() * grid.weight();
    rho * l2(f)
}
