//! Initial data of the four experiments.

use std::f64::consts::PI;

use sldg_core::velocity::{maxwellian_slice, Conserved, DistributionField, PhaseSpace};

use crate::config::{Epsilon, InitialCondition};

fn smooth_rho(x: f64) -> f64 {
    (2.0 + (2.0 * PI * x).sin()) / 2.0
}

fn smooth_t(x: f64) -> f64 {
    (5.0 + 2.0 * (2.0 * PI * x).cos()) / 20.0
}

/// Sum of Maxwellians with the given (density, velocity, temperature).
fn fill_sum(space: &PhaseSpace, parts: &[(f64, [f64; 2], f64)], out: &mut [f64]) {
    let mut tmp = vec![0.0; out.len()];
    out.iter_mut().for_each(|v| *v = 0.0);
    for &(rho, u, t) in parts {
        let c = Conserved::from_primitive(rho, u, t);
        maxwellian_slice(&c, &space.grid, &mut tmp).expect("positive initial data");
        out.iter_mut().zip(&tmp).for_each(|(o, m)| *o += m);
    }
}

pub fn initial_field(ic: InitialCondition, space: &PhaseSpace) -> DistributionField {
    DistributionField::from_nodes(space, |x, out| match ic {
        InitialCondition::MaxwellianSmooth => {
            fill_sum(space, &[(smooth_rho(x), [0.75, -0.75], smooth_t(x))], out)
        }
        InitialCondition::BiMaxwellianTestII => {
            let (r, t) = (0.5 * smooth_rho(x), smooth_t(x));
            fill_sum(space, &[(r, [1.25, -0.75], t), (r, [-0.45, -0.75], t)], out)
        }
        InitialCondition::Sod => {
            let (r, t) = if x <= 0.5 { (1.0, 1.0) } else { (0.125, 0.25) };
            fill_sum(space, &[(r, [0.0, 0.0], t)], out)
        }
        InitialCondition::BiMaxwellianTestIV => {
            let s = 2.0 * PI * x;
            let r = (2.0 + s.sin()) / 6.0;
            let t = (3.0 + s.cos()) / 4.0;
            let u = s.cos();
            fill_sum(space, &[(r, [u, 0.0], t), (r, [-u, 0.0], t)], out)
        }
    })
}

/// Epsilon at every spatial node in storage order.
pub fn epsilon_nodes(eps: Epsilon, space: &PhaseSpace) -> Vec<f64> {
    space.node_coordinates().into_iter().map(|x| eps.at(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use sldg_core::mesh::{Boundary, NodalBasis, SpatialMesh};
    use sldg_core::velocity::{moments, VelocityGrid};

    fn space() -> PhaseSpace {
        PhaseSpace::new(
            SpatialMesh::new(0.0, 1.0, 8, Boundary::Periodic).unwrap(),
            NodalBasis::new(2).unwrap(),
            VelocityGrid::new(7.0, 64).unwrap(),
        )
    }

    #[test]
    fn bimaxwellian_moments() {
        let sp = space();
        let f = initial_field(InitialCondition::BiMaxwellianTestII, &sp);
        let m = moments(&f, &sp.grid).unwrap();
        for (x, c) in sp.node_coordinates().iter().zip(&m.values) {
            assert!((c.rho - smooth_rho(*x)).abs() < 1e-9 * c.rho);
            // mean of U and W in the first component
            assert!((c.velocity()[0] - 0.4).abs() < 1e-9);
        }
        let f = initial_field(InitialCondition::BiMaxwellianTestIV, &sp);
        let m = moments(&f, &sp.grid).unwrap();
        for c in &m.values {
            assert!(c.velocity()[0].abs() < 1e-9);
        }
    }

    #[test]
    fn sod_states() {
        let sp = space();
        let f = initial_field(InitialCondition::Sod, &sp);
        let m = moments(&f, &sp.grid).unwrap();
        for (x, c) in sp.node_coordinates().iter().zip(&m.values) {
            let (r, t) = if *x <= 0.5 { (1.0, 1.0) } else { (0.125, 0.25) };
            assert!((c.rho - r).abs() < 1e-9 && (c.temperature() - t).abs() < 1e-8);
        }
    }
}
