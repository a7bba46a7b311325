mod common;

use std::sync::Arc;

use common::space;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sldg_core::collision::CollisionPlan;
use sldg_core::imex::{Builtin, ButcherPair, PenaltyRefresh, Solver, StepOptions};
use sldg_core::mesh::Boundary;
use sldg_core::velocity::{
    ap_error, maxwellian, maxwellian_slice, moments, raw_moments, Conserved, DistributionField, MacroField,
    PhaseSpace,
};

const TPI: f64 = 2.0 * std::f64::consts::PI;

fn solver(sp: &Arc<PhaseSpace>, which: Builtin, eps: f64, penalty: PenaltyRefresh) -> Solver {
    let plan = Arc::new(CollisionPlan::new(&sp.grid, 8).unwrap());
    let opts = StepOptions {
        penalty,
        ..Default::default()
    };
    Solver::new(sp.clone(), ButcherPair::builtin(which), plan, vec![eps; sp.n_nodes()], opts).unwrap()
}

/// Two drifting Maxwellians with smooth random density modulation.
fn two_beams(sp: &PhaseSpace, seed: u64) -> DistributionField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<(f64, f64)> = (1..=3).map(|_| (rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1))).collect();
    let grid = sp.grid.clone();
    DistributionField::from_nodes(sp, move |x, out| {
        let r = 1.0 + c.iter().enumerate().map(|(m, (a, b))| {
            let k = TPI * (m + 1) as f64 * x;
            a * k.sin() + b * k.cos()
        }).sum::<f64>();
        let mut m2 = vec![0.0; out.len()];
        maxwellian_slice(&Conserved::from_primitive(0.5 * r, [0.6, 0.0], 0.7), &grid, out).unwrap();
        maxwellian_slice(&Conserved::from_primitive(0.5 * r, [-0.6, 0.2], 0.7), &grid, &mut m2).unwrap();
        out.iter_mut().zip(&m2).for_each(|(o, m)| *o += m);
    })
}

fn max_rel(a: &DistributionField, b: &DistributionField) -> f64 {
    let d = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    d / a.max_abs()
}

fn totals(f: &DistributionField, sp: &PhaseSpace) -> [f64; 4] {
    let w = sp.node_weights();
    let m = raw_moments(f, &sp.grid);
    let mut t = [0.0; 4];
    for (c, w) in m.values.iter().zip(&w) {
        for (t, v) in t.iter_mut().zip(c.as_array()) {
            *t += w * v;
        }
    }
    t
}

/// Whole-cell shifts (v dt / dx = 6 (2 ix - 7) on N_v = 8) make both forms
/// compose identically.
#[test]
fn direct_and_shu_osher_forms_agree_on_whole_cell_shifts() {
    let sp = Arc::new(space(48, 2, 8, Boundary::Periodic));
    let f = two_beams(&sp, 11);
    for which in Builtin::all() {
        let mut s = solver(&sp, which, 1.0, PenaltyRefresh::StageConsistent);
        for dt in [1.0 / 7.0, 2.0 / 7.0] {
            let a = s.step(&f, dt).unwrap().f;
            let b = s.step_shu_osher(&f, dt).unwrap().f;
            let e = max_rel(&a, &b);
            println!("{}: dt = {dt:.4}, relative difference {e:.3e}", which.name());
            assert!(e <= 1e-10, "{}: {e}", which.name());
        }
    }
}

#[test]
fn direct_and_shu_osher_forms_agree_on_homogeneous_data() {
    let sp = Arc::new(space(4, 2, 16, Boundary::Periodic));
    let g = sp.grid.clone();
    let f = DistributionField::from_nodes(&sp, |_, out| {
        let mut m2 = vec![0.0; out.len()];
        maxwellian_slice(&Conserved::from_primitive(0.7, [0.9, 0.0], 0.6), &g, out).unwrap();
        maxwellian_slice(&Conserved::from_primitive(0.3, [-1.0, 0.4], 0.5), &g, &mut m2).unwrap();
        out.iter_mut().zip(&m2).for_each(|(o, m)| *o += m);
    });
    for which in Builtin::all() {
        for eps in [1.0, 1e-3] {
            let mut s = solver(&sp, which, eps, PenaltyRefresh::StageConsistent);
            let a = s.step(&f, 0.037).unwrap().f;
            let b = s.step_shu_osher(&f, 0.037).unwrap().f;
            assert!(max_rel(&a, &b) <= 1e-10, "{} eps={eps}", which.name());
        }
    }
}

#[test]
fn refreshed_penalty_differs_only_slightly_from_stage_consistent() {
    let sp = Arc::new(space(8, 2, 16, Boundary::Periodic));
    let f = two_beams(&sp, 3);
    let a = solver(&sp, Builtin::ARS443, 1.0, PenaltyRefresh::Refreshed).step(&f, 0.01).unwrap().f;
    let b = solver(&sp, Builtin::ARS443, 1.0, PenaltyRefresh::StageConsistent).step(&f, 0.01).unwrap().f;
    let e = max_rel(&a, &b);
    assert!(e < 1e-3, "{e}");
}

fn rel_mass_change(sp: &Arc<PhaseSpace>, which: Builtin, eps: f64, f: &DistributionField, dt: f64) -> f64 {
    let m0 = totals(f, sp)[0];
    let f1 = solver(sp, which, eps, PenaltyRefresh::Refreshed).step(f, dt).unwrap().f;
    ((totals(&f1, sp)[0] - m0) / m0).abs()
}

/// FBEuler on equilibrium data keeps global mass to round-off.
#[test]
fn mass_is_conserved_from_equilibrium_with_fbeuler() {
    let sp = Arc::new(space(8, 2, 32, Boundary::Periodic));
    let u = MacroField::from_fn(&sp, |x| {
        Conserved::from_primitive(1.0 + 0.2 * (TPI * x).sin(), [0.3 * (TPI * x).cos(), 0.0], 0.8)
    });
    let f = maxwellian(&u, &sp).unwrap();
    for eps in [1.0, 1e-2, 1e-6] {
        let rel = rel_mass_change(&sp, Builtin::FBEuler, eps, &f, 0.02);
        assert!(rel <= 1e-12, "eps={eps}: {rel:.3e}");
    }
}

/// Away from equilibrium the stage Maxwellians are built from predicted
/// moments, which omit the shifted G_P terms; the resulting global mass
/// change is a local truncation error and shrinks at least like dt^2.
#[test]
fn mass_defect_is_a_truncation_error() {
    let sp = Arc::new(space(8, 2, 32, Boundary::Periodic));
    let f = two_beams(&sp, 5);
    let cases = [
        (Builtin::FBEuler, 1.0),
        (Builtin::FBEuler, 1e-6),
        (Builtin::ARS443, 1.0),
        (Builtin::ARS443, 1e-6),
        (Builtin::DP2A242, 1.0),
    ];
    for (which, eps) in cases {
        let d: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&dt| rel_mass_change(&sp, which, eps, &f, dt)).collect();
        println!("{} eps={eps:e}: {:.3e} {:.3e} {:.3e}", which.name(), d[0], d[1], d[2]);
        assert!(d[0] <= 1e-4, "{}: {:.3e}", which.name(), d[0]);
        assert!(d[0] >= 3.0 * d[1] && d[1] >= 3.0 * d[2], "{} eps={eps}: {d:?}", which.name());
    }
}

#[test]
fn tiny_steps_change_nothing() {
    let sp = Arc::new(space(6, 2, 16, Boundary::Periodic));
    let f = two_beams(&sp, 8);
    for which in Builtin::all() {
        let f1 = solver(&sp, which, 1.0, PenaltyRefresh::Refreshed).step(&f, 1e-10).unwrap().f;
        assert!(max_rel(&f, &f1) <= 1e-6, "{}", which.name());
    }
}

#[test]
fn homogeneous_relaxation_conserves_moments() {
    let sp = Arc::new(space(2, 1, 32, Boundary::Periodic));
    let g = sp.grid.clone();
    let f = DistributionField::from_nodes(&sp, |_, out| {
        let mut m2 = vec![0.0; out.len()];
        maxwellian_slice(&Conserved::from_primitive(0.5, [0.8, 0.0], 0.6), &g, out).unwrap();
        maxwellian_slice(&Conserved::from_primitive(0.5, [-0.8, 0.3], 0.6), &g, &mut m2).unwrap();
        out.iter_mut().zip(&m2).for_each(|(o, m)| *o += m);
    });
    let u0 = moments(&f, &sp.grid).unwrap().values[0].as_array();
    for which in Builtin::all() {
        let mut s = solver(&sp, which, 1.0, PenaltyRefresh::Refreshed);
        let mut fk = f.clone();
        let mut prev = ap_error(&fk, &sp).unwrap();
        for _ in 0..5 {
            fk = s.step(&fk, 0.1).unwrap().f;
            let e = ap_error(&fk, &sp).unwrap();
            assert!(e < prev, "{}: relaxation stalled", which.name());
            prev = e;
        }
        let u = moments(&fk, &sp.grid).unwrap().values[0].as_array();
        for c in 0..4 {
            let d = (u[c] - u0[c]).abs() / u0[0].max(u0[3]);
            assert!(d <= 1e-10, "{} component {c}: {d:.3e}", which.name());
        }
    }
}

#[test]
fn stiff_relaxation_lands_on_equilibrium() {
    let sp = Arc::new(space(8, 2, 32, Boundary::Periodic));
    let u = MacroField::from_fn(&sp, |x| {
        Conserved::from_primitive(1.0 + 0.2 * (TPI * x).sin(), [0.3, 0.0], 0.8)
    });
    let f = maxwellian(&u, &sp).unwrap();
    let eps = 1e-8;
    for which in Builtin::all() {
        let mut s = solver(&sp, which, eps, PenaltyRefresh::Refreshed);
        let mut fk = f.clone();
        for _ in 0..3 {
            fk = s.step(&fk, 0.01).unwrap().f;
            let e = ap_error(&fk, &sp).unwrap();
            let scale = fk.l1_norm(&sp);
            println!("{}: ap_error {e:.3e} (l1 {scale:.3})", which.name());
            assert!(e <= 10.0 * eps * scale, "{}: {e:.3e}", which.name());
        }
    }
}

/// Well-prepared data: the predicted stage moments converge to the moments of
/// the solved stage as eps -> 0.
#[test]
fn predicted_moments_approach_actual_as_eps_vanishes() {
    let sp = Arc::new(space(8, 2, 32, Boundary::Periodic));
    let u = MacroField::from_fn(&sp, |x| {
        Conserved::from_primitive(1.0 + 0.2 * (TPI * x).sin(), [0.3 * (TPI * x).cos(), 0.0], 0.8)
    });
    let f = maxwellian(&u, &sp).unwrap();
    for which in Builtin::all() {
        let mut prev = f64::INFINITY;
        for eps in [1e-2, 1e-4, 1e-6, 1e-8] {
            let out = solver(&sp, which, eps, PenaltyRefresh::Refreshed).step(&f, 0.02).unwrap();
            let gap = out
                .stages
                .iter()
                .flat_map(|st| st.predicted.values.iter().zip(&st.actual.values))
                .map(|(p, a)| {
                    let (p, a) = (p.as_array(), a.as_array());
                    (0..4).map(|c| (p[c] - a[c]).abs()).fold(0.0, f64::max) / a[0]
                })
                .fold(0.0, f64::max);
            println!("{} eps={eps:.0e}: max relative stage gap {gap:.3e}", which.name());
            if eps < 1e-7 {
                assert!(gap <= 1e-4, "{}: {gap:.3e}", which.name());
            }
            // Once at the quadrature floor of Q(M) the gap stops shrinking.
            assert!(gap < prev || gap <= 1e-10, "{}: gap grew at eps={eps}", which.name());
            prev = gap;
        }
    }
}

#[test]
fn limiting_euler_keeps_constant_states() {
    let sp = Arc::new(space(8, 2, 32, Boundary::Periodic));
    // Cool enough that the Gaussian tails beyond |v| = 7 are far below 1e-12.
    let u = MacroField::from_fn(&sp, |_| Conserved::from_primitive(1.0, [0.4, -0.1], 0.5));
    for which in Builtin::all() {
        let mut s = solver(&sp, which, 1e-8, PenaltyRefresh::Refreshed);
        let u1 = s.limiting_euler_step(&u, 0.013).unwrap();
        for (a, b) in u.values.iter().zip(&u1.values) {
            for (x, y) in a.as_array().iter().zip(b.as_array()) {
                assert!((x - y).abs() <= 1e-12, "{}: {x} vs {y}", which.name());
            }
        }
    }
}

#[test]
fn kinetic_step_tracks_limiting_euler_at_small_eps() {
    let sp = Arc::new(space(16, 2, 32, Boundary::Periodic));
    let u = MacroField::from_fn(&sp, |x| {
        Conserved::from_primitive(1.0 + 0.2 * (TPI * x).sin(), [0.2 * (TPI * x).cos(), 0.0], 0.8)
    });
    let f = maxwellian(&u, &sp).unwrap();
    for which in Builtin::all() {
        let mut s = solver(&sp, which, 1e-8, PenaltyRefresh::Refreshed);
        let kin = moments(&s.step(&f, 0.01).unwrap().f, &sp.grid).unwrap();
        let lim = s.limiting_euler_step(&u, 0.01).unwrap();
        let rel = kin
            .values
            .iter()
            .zip(&lim.values)
            .map(|(a, b)| (a.rho - b.rho).abs() / b.rho)
            .fold(0.0, f64::max);
        assert!(rel <= 1e-3, "{}: {rel:.3e}", which.name());
    }
}

#[test]
fn step_failure_reports_the_stage() {
    let sp = Arc::new(space(4, 1, 16, Boundary::Periodic));
    let f = DistributionField::zeros(&sp);
    let err = solver(&sp, Builtin::FBEuler, 1.0, PenaltyRefresh::Refreshed).step(&f, 0.1).unwrap_err();
    assert!(matches!(err, sldg_core::SldgError::StepFailure { stage: 1, .. }), "{err}");
}

#[test]
fn non_gsa_tableaux_are_rejected() {
    let sp = Arc::new(space(4, 1, 16, Boundary::Periodic));
    let t = ButcherPair::parse(
        "name: midpoint\nexplicit:\n0 0\n1/2 0\nexplicit_b: 0 1\nimplicit:\n0 0\n0 1/2\nimplicit_b: 0 1\n",
    )
    .unwrap();
    let plan = Arc::new(CollisionPlan::new(&sp.grid, 8).unwrap());
    assert!(Solver::new(sp.clone(), t, plan, vec![1.0; sp.n_nodes()], StepOptions::default()).is_err());
}

/// Every stage shift is limited, including the shifted stage values entering
/// the moment predictor; otherwise ARS443 produces negative temperatures at a
/// density jump within its first step.
#[test]
fn limited_stages_keep_shock_data_admissible() {
    let sp = Arc::new(space(80, 2, 32, Boundary::Neumann));
    let u = MacroField::from_fn(&sp, |x| {
        if x < 0.5 {
            Conserved::from_primitive(1.0, [0.0, 0.0], 1.0)
        } else {
            Conserved::from_primitive(0.125, [0.0, 0.0], 0.25)
        }
    });
    let f = maxwellian(&u, &sp).unwrap();
    let plan = Arc::new(CollisionPlan::new(&sp.grid, 8).unwrap());
    let opts = StepOptions {
        limiter: sldg_core::limiter::LimiterConfig::enabled(),
        ..Default::default()
    };
    let mut s = Solver::new(sp.clone(), ButcherPair::builtin(Builtin::ARS443), plan, vec![1e-2; sp.n_nodes()], opts)
        .unwrap();
    let dt = 0.5 / 80.0 / 7.0;
    let f1 = s.step(&f, dt).unwrap().f;
    let m = moments(&f1, &sp.grid).unwrap();
    assert!(m.check_admissible().is_ok());
}
