//! Velocity grid, distribution storage, moments and Maxwellians (two velocity
//! dimensions throughout: E = 2 rho T + rho |u|^2).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SldgError};
use crate::mesh::{NodalBasis, SpatialMesh};

/// Cell-centered uniform grid on [-L, L] in each velocity direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    pub half_width: f64,
    pub n_points: usize,
    pub dv: f64,
    pub points: Vec<f64>,
}

impl VelocityGrid {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if n_points == 0 || !(half_width > 0.0) {
            return invalid(format!(
                "velocity grid needs L > 0 and N_v > 0 (got L = {half_width}, N_v = {n_points})"
            ));
        }
        let dv = 2.0 * half_width / n_points as f64;
        let points = (0..n_points)
            .map(|i| -half_width + (i as f64 + 0.5) * dv)
            .collect();
        Ok(VelocityGrid {
            half_width,
            n_points,
            dv,
            points,
        })
    }

    /// Number of 2D velocity points.
    pub fn size(&self) -> usize {
        self.n_points * self.n_points
    }

    /// Quadrature weight dv^2 of every velocity point.
    pub fn weight(&self) -> f64 {
        self.dv * self.dv
    }
}

/// Everything needed to interpret a distribution field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpace {
    pub mesh: SpatialMesh,
    pub basis: NodalBasis,
    pub grid: VelocityGrid,
}

impl PhaseSpace {
    pub fn new(mesh: SpatialMesh, basis: NodalBasis, grid: VelocityGrid) -> Self {
        PhaseSpace { mesh, basis, grid }
    }

    pub fn n_nodes(&self) -> usize {
        self.mesh.n_cells * self.basis.len()
    }

    pub fn node_coordinates(&self) -> Vec<f64> {
        self.mesh.node_coordinates(&self.basis)
    }

    /// Spatial quadrature weight omega_p dx of every node, in storage order.
    pub fn node_weights(&self) -> Vec<f64> {
        let dx = self.mesh.dx;
        (0..self.mesh.n_cells)
            .flat_map(|_| self.basis.weights().iter().map(move |w| w * dx))
            .collect()
    }
}

/// Nodal values f(x_{j,p}, v_{ix}, v_{iy}) stored node-major, then vx, then vy.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionField {
    n_cells: usize,
    n_basis: usize,
    n_v: usize,
    data: Vec<f64>,
}

impl DistributionField {
    pub fn zeros(space: &PhaseSpace) -> Self {
        DistributionField {
            n_cells: space.mesh.n_cells,
            n_basis: space.basis.len(),
            n_v: space.grid.n_points,
            data: vec![0.0; space.n_nodes() * space.grid.size()],
        }
    }

    /// Fills each node from `fill(x, node_slice)`.
    pub fn from_nodes(space: &PhaseSpace, fill: impl Fn(f64, &mut [f64]) + Sync) -> Self {
        let mut f = Self::zeros(space);
        let xs = space.node_coordinates();
        let nv2 = space.grid.size();
        f.data
            .par_chunks_mut(nv2)
            .zip(xs.par_iter())
            .for_each(|(slice, &x)| fill(x, slice));
        f
    }

    pub fn from_vec(space: &PhaseSpace, data: Vec<f64>) -> Result<Self> {
        let f = DistributionField {
            n_cells: space.mesh.n_cells,
            n_basis: space.basis.len(),
            n_v: space.grid.n_points,
            data,
        };
        if f.data.len() != space.n_nodes() * space.grid.size() {
            return Err(SldgError::ShapeMismatch(format!(
                "expected {} values, got {}",
                space.n_nodes() * space.grid.size(),
                f.data.len()
            )));
        }
        Ok(f)
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_basis(&self) -> usize {
        self.n_basis
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells * self.n_basis
    }

    pub fn node_len(&self) -> usize {
        self.n_v * self.n_v
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn node(&self, n: usize) -> &[f64] {
        let m = self.node_len();
        &self.data[n * m..(n + 1) * m]
    }

    pub fn node_mut(&mut self, n: usize) -> &mut [f64] {
        let m = self.node_len();
        &mut self.data[n * m..(n + 1) * m]
    }

    /// Slice of all nodes of cell `j`.
    pub fn cell(&self, j: usize) -> &[f64] {
        let m = self.node_len() * self.n_basis;
        &self.data[j * m..(j + 1) * m]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.n_cells == other.n_cells && self.n_basis == other.n_basis && self.n_v == other.n_v
    }

    pub fn check_space(&self, space: &PhaseSpace) -> Result<()> {
        if self.n_cells != space.mesh.n_cells
            || self.n_basis != space.basis.len()
            || self.n_v != space.grid.n_points
        {
            return Err(SldgError::ShapeMismatch(format!(
                "field ({} cells, {} nodes/cell, N_v = {}) does not match phase space ({}, {}, {})",
                self.n_cells,
                self.n_basis,
                self.n_v,
                space.mesh.n_cells,
                space.basis.len(),
                space.grid.n_points
            )));
        }
        Ok(())
    }

    pub fn check_same(&self, other: &Self) -> Result<()> {
        if !self.same_shape(other) {
            return Err(SldgError::ShapeMismatch(
                "distribution fields have different shapes".into(),
            ));
        }
        Ok(())
    }

    /// self += a * other
    pub fn axpy(&mut self, a: f64, other: &Self) {
        assert!(self.same_shape(other));
        self.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(s, o)| *s += a * o);
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|s| *s *= a);
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Weighted phase-space L2 norm with weights omega_p dx dv^2.
    pub fn l2_norm(&self, space: &PhaseSpace) -> f64 {
        let w = space.node_weights();
        let dv2 = space.grid.weight();
        let s: f64 = (0..self.n_nodes())
            .map(|n| w[n] * self.node(n).iter().map(|v| v * v).sum::<f64>())
            .sum();
        (s * dv2).sqrt()
    }

    /// Weighted phase-space L1 norm.
    pub fn l1_norm(&self, space: &PhaseSpace) -> f64 {
        let w = space.node_weights();
        let dv2 = space.grid.weight();
        (0..self.n_nodes())
            .map(|n| w[n] * self.node(n).iter().map(|v| v.abs()).sum::<f64>())
            .sum::<f64>()
            * dv2
    }
}

/// Conserved moments (rho, rho u, E) at one spatial node.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Conserved {
    pub rho: f64,
    pub momentum: [f64; 2],
    pub energy: f64,
}

impl Conserved {
    pub fn from_primitive(rho: f64, u: [f64; 2], temperature: f64) -> Self {
        Conserved {
            rho,
            momentum: [rho * u[0], rho * u[1]],
            energy: 2.0 * rho * temperature + rho * (u[0] * u[0] + u[1] * u[1]),
        }
    }

    pub fn velocity(&self) -> [f64; 2] {
        [self.momentum[0] / self.rho, self.momentum[1] / self.rho]
    }

    pub fn temperature(&self) -> f64 {
        let u = self.velocity();
        (self.energy / self.rho - (u[0] * u[0] + u[1] * u[1])) / 2.0
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.rho, self.momentum[0], self.momentum[1], self.energy]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Conserved {
            rho: a[0],
            momentum: [a[1], a[2]],
            energy: a[3],
        }
    }

    pub fn is_admissible(&self) -> bool {
        self.rho > 0.0 && self.temperature() > 0.0 && self.as_array().iter().all(|v| v.is_finite())
    }
}

/// Per-node conserved moments, cell-major like [`DistributionField`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroField {
    pub n_cells: usize,
    pub n_basis: usize,
    pub values: Vec<Conserved>,
}

impl MacroField {
    pub fn from_fn(space: &PhaseSpace, f: impl Fn(f64) -> Conserved) -> Self {
        MacroField {
            n_cells: space.mesh.n_cells,
            n_basis: space.basis.len(),
            values: space.node_coordinates().into_iter().map(f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn densities(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.rho).collect()
    }

    /// First node with nonpositive density or temperature, as an error.
    pub fn check_admissible(&self) -> Result<()> {
        for (n, c) in self.values.iter().enumerate() {
            if !c.is_admissible() {
                return Err(self.degenerate(n));
            }
        }
        Ok(())
    }

    fn degenerate(&self, n: usize) -> SldgError {
        let c = self.values[n];
        SldgError::DegenerateMoments {
            cell: n / self.n_basis,
            node: n % self.n_basis,
            rho: c.rho,
            temperature: if c.rho != 0.0 { c.temperature() } else { f64::NAN },
        }
    }

    /// self = a*self + b*other on the conserved variables.
    pub fn combine(&mut self, a: f64, b: f64, other: &MacroField) {
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            let x = s.as_array();
            let y = o.as_array();
            *s = Conserved::from_array(std::array::from_fn(|i| a * x[i] + b * y[i]));
        }
    }
}

/// Moments of one velocity slice with the rectangle rule.
pub fn slice_moments(fv: &[f64], grid: &VelocityGrid) -> Conserved {
    let n = grid.n_points;
    let mut m = [0.0; 4];
    for ix in 0..n {
        let vx = grid.points[ix];
        let row = &fv[ix * n..(ix + 1) * n];
        let mut r0 = 0.0;
        let mut ry = 0.0;
        let mut ryy = 0.0;
        for (iy, &f) in row.iter().enumerate() {
            let vy = grid.points[iy];
            r0 += f;
            ry += f * vy;
            ryy += f * vy * vy;
        }
        m[0] += r0;
        m[1] += r0 * vx;
        m[2] += ry;
        m[3] += r0 * vx * vx + ryy;
    }
    let w = grid.weight();
    Conserved::from_array(m.map(|x| x * w))
}

/// Moments without admissibility checks (linear in f).
pub fn raw_moments(f: &DistributionField, grid: &VelocityGrid) -> MacroField {
    let values = (0..f.n_nodes())
        .into_par_iter()
        .map(|n| slice_moments(f.node(n), grid))
        .collect();
    MacroField {
        n_cells: f.n_cells(),
        n_basis: f.n_basis(),
        values,
    }
}

/// Moments; nonpositive density anywhere is an error.
pub fn moments(f: &DistributionField, grid: &VelocityGrid) -> Result<MacroField> {
    let m = raw_moments(f, grid);
    for (n, c) in m.values.iter().enumerate() {
        if !(c.rho > 0.0) {
            return Err(m.degenerate(n));
        }
    }
    Ok(m)
}

/// Writes the Maxwellian of `c` into one velocity slice.
pub fn maxwellian_slice(c: &Conserved, grid: &VelocityGrid, out: &mut [f64]) -> Result<()> {
    let t = c.temperature();
    if !(c.rho > 0.0) || !(t > 0.0) {
        return Err(SldgError::DegenerateMoments {
            cell: 0,
            node: 0,
            rho: c.rho,
            temperature: t,
        });
    }
    let u = c.velocity();
    let pref = c.rho / (2.0 * std::f64::consts::PI * t);
    let n = grid.n_points;
    let inv = -0.5 / t;
    let ey: Vec<f64> = grid
        .points
        .iter()
        .map(|&vy| ((vy - u[1]) * (vy - u[1]) * inv).exp())
        .collect();
    for ix in 0..n {
        let dx = grid.points[ix] - u[0];
        let ex = pref * (dx * dx * inv).exp();
        for (o, e) in out[ix * n..(ix + 1) * n].iter_mut().zip(&ey) {
            *o = ex * e;
        }
    }
    Ok(())
}

pub fn maxwellian(u: &MacroField, space: &PhaseSpace) -> Result<DistributionField> {
    u.check_admissible()?;
    let mut f = DistributionField::zeros(space);
    let nv2 = space.grid.size();
    f.data_mut()
        .par_chunks_mut(nv2)
        .zip(u.values.par_iter())
        .try_for_each(|(slice, c)| maxwellian_slice(c, &space.grid, slice))?;
    Ok(f)
}

/// Weighted l1 distance between f and its local Maxwellian.
pub fn ap_error(f: &DistributionField, space: &PhaseSpace) -> Result<f64> {
    f.check_space(space)?;
    let m = moments(f, &space.grid)?;
    m.check_admissible()?;
    let w = space.node_weights();
    let nv2 = space.grid.size();
    let per_node: Vec<f64> = (0..f.n_nodes())
        .into_par_iter()
        .map(|n| {
            let mut mx = vec![0.0; nv2];
            maxwellian_slice(&m.values[n], &space.grid, &mut mx).expect("checked above");
            f.node(n)
                .iter()
                .zip(&mx)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
        })
        .collect();
    Ok(per_node
        .iter()
        .zip(&w)
        .map(|(s, w)| s * w)
        .sum::<f64>()
        * space.grid.weight())
}

/// Euler flux in x: (rho u1, rho u1 u + rho T e1, (E + 2 rho T) u1), with E the
/// full second moment.
pub fn euler_flux(u: &MacroField) -> Result<Vec<[f64; 4]>> {
    u.check_admissible()?;
    Ok(u.values
        .iter()
        .map(|c| {
            let v = c.velocity();
            let p = c.rho * c.temperature();
            [
                c.momentum[0],
                c.momentum[0] * v[0] + p,
                c.momentum[0] * v[1],
                (c.energy + 2.0 * p) * v[0],
            ]
        })
        .collect())
}

/// Relative weighted l1 and l2 errors of the densities of `b` against `a`.
pub fn error_norms(a: &MacroField, b: &MacroField, space: &PhaseSpace) -> Result<(f64, f64)> {
    if a.len() != b.len() || a.len() != space.n_nodes() {
        return invalid("macro fields live on different meshes");
    }
    let w = space.node_weights();
    let (mut d1, mut d2, mut n1, mut n2) = (0.0, 0.0, 0.0, 0.0);
    for ((x, y), w) in a.values.iter().zip(&b.values).zip(&w) {
        let d = x.rho - y.rho;
        d1 += w * d.abs();
        d2 += w * d * d;
        n1 += w * x.rho.abs();
        n2 += w * x.rho * x.rho;
    }
    Ok((d1 / n1, (d2 / n2).sqrt()))
}

/// Evaluates the DG polynomial of every conserved component of `fine` at the
/// nodes of `coarse`. Both meshes must span the same interval.
pub fn restrict(fine: &MacroField, fine_space: &PhaseSpace, coarse: &PhaseSpace) -> Result<MacroField> {
    if fine.len() != fine_space.n_nodes() {
        return invalid("fine field does not match its phase space");
    }
    let nb = fine_space.basis.len();
    let values = coarse
        .node_coordinates()
        .into_iter()
        .map(|x| {
            let (j, s) = fine_space.mesh.locate(x);
            let card = fine_space.basis.cardinals(s);
            let mut acc = [0.0; 4];
            for (p, l) in card.iter().enumerate() {
                let c = fine.values[j * nb + p].as_array();
                for i in 0..4 {
                    acc[i] += l * c[i];
                }
            }
            Conserved::from_array(acc)
        })
        .collect();
    Ok(MacroField {
        n_cells: coarse.mesh.n_cells,
        n_basis: coarse.basis.len(),
        values,
    })
}
