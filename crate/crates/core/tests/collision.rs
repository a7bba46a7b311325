mod common;

use common::*;
use sldg_core::collision::{q_direct, CollisionPlan, DirectOptions};
use sldg_core::velocity::{slice_moments, VelocityGrid};

/// Oracle settings: eight-point Lagrange interpolation, 16 angles, matched
/// truncation. Bilinear interpolation is too crude to resolve Q at N_v = 16.
fn oracle(grid: &VelocityGrid) -> DirectOptions {
    DirectOptions {
        n_angles: 16,
        stencil: 8,
        truncation: Some(grid.half_width / 2.0),
    }
}

fn distance(nv: usize, which: fn(&VelocityGrid) -> Vec<f64>) -> f64 {
    let g = VelocityGrid::new(7.0, nv).unwrap();
    let f = which(&g);
    let plan = CollisionPlan::new(&g, 8).unwrap();
    let qs = plan.q(&f).unwrap();
    let qd = q_direct(&f, &g, oracle(&g)).unwrap();
    l2_diff(&qs, &qd) / loss_scale(&f, &g)
}

fn unit_maxwellian(g: &VelocityGrid) -> Vec<f64> {
    maxwellian_values(g, 1.0, [0.0, 0.0], 1.0)
}

#[test]
fn spectral_matches_direct_oracle() {
    let cases: [(&str, fn(&VelocityGrid) -> Vec<f64>); 3] = [
        ("maxwellian", unit_maxwellian),
        ("bi-maxwellian", bi_maxwellian),
        ("perturbed", perturbed_maxwellian),
    ];
    for (name, f) in cases {
        let e16 = distance(16, f);
        let e24 = distance(24, f);
        println!("{name}: N_v=16 {e16:.3e}, N_v=24 {e24:.3e}");
        assert!(e16 <= 5e-3, "{name}: {e16}");
        assert!(e24 < e16, "{name}: {e24} !< {e16}");
    }
}

#[test]
fn mass_conservation_and_bilinearity() {
    for nv in [16, 32] {
        let g = VelocityGrid::new(7.0, nv).unwrap();
        let plan = CollisionPlan::new(&g, 8).unwrap();
        for f in [bi_maxwellian(&g), perturbed_maxwellian(&g)] {
            let q = plan.q(&f).unwrap();
            let mass = slice_moments(&q, &g).rho;
            assert!(mass.abs() < 1e-12, "mass defect {mass}");
            for a in [2.0, 0.5, -1.0] {
                let fa: Vec<f64> = f.iter().map(|x| a * x).collect();
                let qa = plan.q(&fa).unwrap();
                let err = l2_diff(&qa, &q.iter().map(|x| a * a * x).collect::<Vec<_>>());
                assert!(err <= 1e-12 * l2(&q).max(1.0) * a * a, "alpha = {a}: {err}");
            }
        }
    }
}

#[test]
fn momentum_energy_defects_shrink() {
    let mut prev = f64::INFINITY;
    for nv in [16, 32] {
        let g = VelocityGrid::new(7.0, nv).unwrap();
        let plan = CollisionPlan::new(&g, 8).unwrap();
        let f = perturbed_maxwellian(&g);
        let m = slice_moments(&plan.q(&f).unwrap(), &g);
        let base = slice_moments(&f, &g);
        let d = (m.momentum[0].abs() + m.momentum[1].abs()) / base.rho + m.energy.abs() / base.energy;
        println!("N_v = {nv}: relative momentum/energy defect {d:.3e}");
        if nv == 32 {
            assert!(d <= 1e-5);
        }
        assert!(d < prev);
        prev = d;
    }
}

#[test]
fn maxwellian_is_nearly_annihilated() {
    let g = VelocityGrid::new(7.0, 32).unwrap();
    let plan = CollisionPlan::new(&g, 8).unwrap();
    let f = unit_maxwellian(&g);
    let r = sup(&plan.q(&f).unwrap()) / sup(&f);
    println!("sup |Q(M)| / sup M = {r:.3e}");
    assert!(r <= 1e-10);
}

#[test]
fn reflection_symmetry() {
    // For f even under v -> -v, Q(f) is even as well.
    let g = VelocityGrid::new(7.0, 16).unwrap();
    let plan = CollisionPlan::new(&g, 8).unwrap();
    let a = maxwellian_values(&g, 1.0, [1.2, 0.4], 0.7);
    let b = maxwellian_values(&g, 1.0, [-1.2, -0.4], 0.7);
    let f: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    let q = plan.q(&f).unwrap();
    let n = 16 * 16;
    for i in 0..n {
        assert!((q[i] - q[n - 1 - i]).abs() < 1e-10);
    }
}

#[test]
fn direct_equilibrium_and_conservation() {
    let mut prev = f64::INFINITY;
    for nv in [16, 24] {
        let g = VelocityGrid::new(7.0, nv).unwrap();
        let f = unit_maxwellian(&g);
        let q = q_direct(&f, &g, DirectOptions::default()).unwrap();
        let r = sup(&q) / sup(&f);
        if nv == 16 {
            assert!(r <= 5e-3, "{r}");
        }
        assert!(r < prev);
        prev = r;
        let p = perturbed_maxwellian(&g);
        let mass = slice_moments(&q_direct(&p, &g, DirectOptions::default()).unwrap(), &g).rho;
        assert!(mass.abs() <= 1e-2 * slice_moments(&p, &g).rho);
    }
    let g = VelocityGrid::new(7.0, 8).unwrap();
    let zero = q_direct(&vec![0.0; 64], &g, DirectOptions::default()).unwrap();
    assert!(zero.iter().all(|&x| x == 0.0));
}

#[test]
fn bilinear_oracle_is_coarser() {
    // Kept for comparison: first-order interpolation, much larger defect.
    let g = VelocityGrid::new(7.0, 16).unwrap();
    let f = unit_maxwellian(&g);
    let lin = sup(&q_direct(&f, &g, DirectOptions::bilinear(8)).unwrap());
    let high = sup(&q_direct(&f, &g, DirectOptions::default()).unwrap());
    assert!(high < 0.1 * lin);
}
