use proptest::prelude::*;
use sldg_core::analysis::{first_order_gh, limiting_order_coeffs, positivity_margins, positivity_zmax};
use sldg_core::imex::{shu_osher_coeffs, Builtin, ButcherPair, ShuOsherCoeffs};
use sldg_core::SldgError;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

/// Last-stage (c~, D, B, G, H, B*, B**, B***), from exact rational arithmetic.
const GOLDEN: [(Builtin, [f64; 8], u8); 3] = [
    (Builtin::FBEuler, [1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0], 1),
    (Builtin::DP2A242, [1.0, 0.5, 0.0, -0.75, 1.0, -1.0, -1.5, 2.5], 2),
    (Builtin::ARS443, [1.0, 0.5, 0.0, 0.25, -1.0 / 12.0, 0.25, 0.5, -0.75], 2),
];

#[test]
fn limiting_order_coefficients_match_exact_values() {
    for (which, want, verdict) in GOLDEN {
        let r = limiting_order_coeffs(&ButcherPair::builtin(which)).unwrap();
        let got = r.last();
        for (i, (g, w)) in got.iter().zip(want).enumerate() {
            assert!(close(*g, w), "{} entry {i}: {g} vs {w}", which.name());
        }
        assert_eq!(r.verdict, verdict, "{}", which.name());
        assert!(!r.third_order_conditions());
    }
}

#[test]
fn classification_of_builtins() {
    let f = ButcherPair::builtin(Builtin::FBEuler).classify();
    assert!(f.is_type_ck && f.is_ars && f.is_gsa && !f.is_type_a);
    let a = ButcherPair::builtin(Builtin::ARS443).classify();
    assert!(a.is_type_ck && a.is_ars && a.is_gsa && !a.is_type_a);
    let d = ButcherPair::builtin(Builtin::DP2A242).classify();
    assert!(d.is_type_a && d.is_gsa && !d.is_type_ck && !d.is_ars);
}

#[test]
fn builtin_abscissae() {
    let f = ButcherPair::builtin(Builtin::FBEuler);
    assert_eq!((f.c.clone(), f.ct.clone()), (vec![0.0, 1.0], vec![0.0, 1.0]));
    let a = ButcherPair::builtin(Builtin::ARS443);
    for (x, y) in a.ct.iter().zip([0.0, 0.5, 2.0 / 3.0, 0.5, 1.0]) {
        assert!(close(*x, y));
    }
    let d = ButcherPair::builtin(Builtin::DP2A242);
    assert!((0..4).all(|i| d.at[i][i] == 2.0));
    assert!(ButcherPair::by_name("RK4").is_err());
}

#[test]
fn first_order_recursion_reaches_one() {
    for which in [Builtin::FBEuler, Builtin::ARS443] {
        let r = first_order_gh(&ButcherPair::builtin(which)).unwrap();
        let s = r.g.len() - 1;
        assert!(close(r.g[s], 1.0) && close(r.h[s], 1.0), "{}: {r:?}", which.name());
        assert!(r.verdict);
    }
}

#[test]
fn positivity_thresholds() {
    let f = positivity_zmax(&ButcherPair::builtin(Builtin::FBEuler)).unwrap();
    assert!(f.z_max.is_infinite() && f.violated.is_empty() && !f.partial_coverage);
    let a = ButcherPair::builtin(Builtin::ARS443);
    let r = positivity_zmax(&a).unwrap();
    assert!((r.z_max - 4.0).abs() <= 1e-6, "{}", r.z_max);
    assert!(r.partial_coverage);
    // The binding condition changes sign at z = 4.
    let below = positivity_margins(&a, 3.999).unwrap();
    let above = positivity_margins(&a, 4.001).unwrap();
    assert!(below.iter().all(|(_, m)| *m >= 0.0));
    assert!(above.iter().any(|(_, m)| *m < 0.0));
}

#[test]
fn shu_osher_examples() {
    let ShuOsherCoeffs::Ck(st) = shu_osher_coeffs(&ButcherPair::builtin(Builtin::ARS443)).unwrap() else {
        panic!("ARS443 is CK");
    };
    assert!(close(st[2].b[0], 1.0 / 3.0));
    assert!(st.iter().all(|s| s.e == 0.0));
    let ShuOsherCoeffs::Ck(st) = shu_osher_coeffs(&ButcherPair::builtin(Builtin::FBEuler)).unwrap() else {
        panic!("FBEuler is CK");
    };
    assert!(st[1].b.is_empty() && st[1].d == 1.0);
}

#[test]
fn tableau_text_round_trip_and_errors() {
    let text = "\
name: ars222-like
# explicit part
explicit:
0 0 0
1/2 0 0
0 1 0
explicit_b: 0 1 0
implicit:
0 0 0
0 1/2 0
0 1/2 1/2
implicit_b: 0 1/2 1/2
implicit_c: 0 1/2 1
";
    let t = ButcherPair::parse(text).unwrap();
    assert_eq!(t.name, "ars222-like");
    assert_eq!(t.stages(), 3);
    let c = t.classify();
    assert!(c.is_type_ck && c.is_ars && c.is_gsa);

    let bad = text.replace("0 1/2 0\n", "0 x 0\n");
    match ButcherPair::parse(&bad) {
        Err(SldgError::Parse { line, .. }) => assert_eq!(line, 10),
        other => panic!("expected parse error, got {other:?}"),
    }
    let short = text.replace("1/2 0 0\n", "1/2 0\n");
    match ButcherPair::parse(&short) {
        Err(SldgError::Parse { line, .. }) => assert_eq!(line, 5),
        other => panic!("expected parse error, got {other:?}"),
    }
    let wrong_c = text.replace("implicit_c: 0 1/2 1", "implicit_c: 0 1 1");
    assert!(matches!(ButcherPair::parse(&wrong_c), Err(SldgError::Parse { line: 13, .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn analysis_is_deterministic(i in 0usize..3) {
        let t = ButcherPair::builtin(Builtin::all()[i]);
        prop_assert_eq!(limiting_order_coeffs(&t).unwrap(), limiting_order_coeffs(&t).unwrap());
        if let (Ok(a), Ok(b)) = (positivity_zmax(&t), positivity_zmax(&t)) {
            prop_assert_eq!(a.z_max.to_bits(), b.z_max.to_bits());
        }
    }
}
