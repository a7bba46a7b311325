//! Uniform 1D mesh, Gauss-Legendre nodal basis on the reference cell [0, 1],
//! and upstream tracing for the semi-Lagrangian shift.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Periodic,
    /// Constant extension: feet outside the domain read the boundary cell.
    Neumann,
}

/// Gauss-Legendre rule with `n` points mapped to [0, 1].
///
/// Nodes are returned in increasing order and the weights sum to one.
pub fn gauss_legendre_unit(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return invalid("Gauss-Legendre rule needs at least one point");
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the i-th largest root; map (1 - x)/2 gives ascending nodes.
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.5;
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Lagrange basis through the k+1 Gauss-Legendre points of [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalBasis {
    degree: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    denom: Vec<f64>,
}

impl NodalBasis {
    pub fn new(degree: usize) -> Result<Self> {
        let (nodes, weights) = gauss_legendre_unit(degree + 1)?;
        let denom = (0..=degree)
            .map(|p| {
                (0..=degree)
                    .filter(|&q| q != p)
                    .map(|q| nodes[p] - nodes[q])
                    .product()
            })
            .collect();
        Ok(NodalBasis {
            degree,
            nodes,
            weights,
            denom,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// p-th cardinal polynomial at `s`; `p` must be in range.
    #[inline]
    pub fn cardinal(&self, p: usize, s: f64) -> f64 {
        let mut num = 1.0;
        for (q, &u) in self.nodes.iter().enumerate() {
            if q != p {
                num *= s - u;
            }
        }
        num / self.denom[p]
    }

    /// All cardinal values at `s`.
    pub fn cardinals(&self, s: f64) -> Vec<f64> {
        (0..self.len()).map(|p| self.cardinal(p, s)).collect()
    }

    /// Evaluates the polynomial with nodal values `vals` at `s`.
    pub fn interpolate(&self, vals: &[f64], s: f64) -> f64 {
        vals.iter()
            .enumerate()
            .map(|(p, v)| v * self.cardinal(p, s))
            .sum()
    }
}

pub fn lagrange_eval(basis: &NodalBasis, p: usize, s: f64) -> Result<f64> {
    if p > basis.degree() {
        return invalid(format!(
            "basis index {p} out of range for degree {}",
            basis.degree()
        ));
    }
    Ok(basis.cardinal(p, s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialMesh {
    pub x_left: f64,
    pub x_right: f64,
    pub n_cells: usize,
    pub dx: f64,
    pub boundary: Boundary,
}

impl SpatialMesh {
    pub fn new(x_left: f64, x_right: f64, n_cells: usize, boundary: Boundary) -> Result<Self> {
        if n_cells == 0 {
            return invalid("mesh needs at least one cell");
        }
        if !(x_right > x_left) || !x_left.is_finite() || !x_right.is_finite() {
            return invalid(format!("bad domain [{x_left}, {x_right}]"));
        }
        Ok(SpatialMesh {
            x_left,
            x_right,
            n_cells,
            dx: (x_right - x_left) / n_cells as f64,
            boundary,
        })
    }

    pub fn length(&self) -> f64 {
        self.x_right - self.x_left
    }

    /// Left edge of the 0-based cell `j`.
    pub fn cell_left(&self, j: usize) -> f64 {
        self.x_left + j as f64 * self.dx
    }

    pub fn node_x(&self, basis: &NodalBasis, j: usize, p: usize) -> f64 {
        self.cell_left(j) + basis.nodes()[p] * self.dx
    }

    /// Node coordinates in storage order (cell-major).
    pub fn node_coordinates(&self, basis: &NodalBasis) -> Vec<f64> {
        (0..self.n_cells)
            .flat_map(|j| (0..basis.len()).map(move |p| (j, p)))
            .map(|(j, p)| self.node_x(basis, j, p))
            .collect()
    }

    /// Locates the cell containing `x` and the local coordinate in [0, 1].
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let t = (x - self.x_left) / self.dx;
        let j = (t.floor().max(0.0) as usize).min(self.n_cells - 1);
        (j, t - j as f64)
    }

    /// Maps a possibly out-of-range cell index to a stored cell.
    #[inline]
    pub fn wrap_cell(&self, j: i64) -> usize {
        let n = self.n_cells as i64;
        match self.boundary {
            Boundary::Periodic => j.rem_euclid(n) as usize,
            Boundary::Neumann => j.clamp(0, n - 1) as usize,
        }
    }
}

/// Fractions this close to a cell edge are snapped onto it.
const SNAP: f64 = 1e-12;

/// Cell offset and fraction of the foot of the characteristic through the
/// left edge of a cell: x_{j-1/2} - v tau = x_{j*-1/2} + alpha dx.
pub fn upstream_offset(dx: f64, v: f64, tau: f64) -> (i64, f64) {
    let t = -v * tau / dx;
    let mut off = t.floor();
    let mut alpha = t - off;
    if alpha >= 1.0 - SNAP {
        alpha = 0.0;
        off += 1.0;
    } else if alpha < SNAP {
        alpha = 0.0;
    }
    (off as i64, alpha)
}

/// Upstream cell (0-based) and fraction for cell `j`.
///
/// Neumann meshes clamp the cell into range; a clamped foot sits entirely in
/// the boundary cell, so alpha is reset to zero there.
pub fn locate_upstream(mesh: &SpatialMesh, j: usize, v: f64, tau: f64) -> (usize, f64) {
    let (off, alpha) = upstream_offset(mesh.dx, v, tau);
    let js = j as i64 + off;
    match mesh.boundary {
        Boundary::Periodic => (mesh.wrap_cell(js), alpha),
        Boundary::Neumann => {
            let n = mesh.n_cells as i64;
            if js < 0 {
                (0, 0.0)
            } else if js >= n - 1 && !(js == n - 1 && alpha == 0.0) {
                (mesh.n_cells - 1, 0.0)
            } else {
                (js as usize, alpha)
            }
        }
    }
}
