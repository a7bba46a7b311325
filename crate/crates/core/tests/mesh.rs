use proptest::prelude::*;
use sldg_core::mesh::{gauss_legendre_unit, locate_upstream, upstream_offset, Boundary, NodalBasis, SpatialMesh};

#[test]
fn gauss_rule_is_exact_to_degree_2n_minus_1() {
    for n in 1..=8 {
        let (x, w) = gauss_legendre_unit(n).unwrap();
        for d in 0..2 * n {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
            let exact = 1.0 / (d as f64 + 1.0);
            assert!((q - exact).abs() <= 1e-13, "n={n} d={d}: {q}");
        }
    }
}

#[test]
fn mesh_geometry() {
    let m = SpatialMesh::new(-0.5, 0.5, 80, Boundary::Neumann).unwrap();
    assert!((m.dx - 1.0 / 80.0).abs() < 1e-15);
    assert_eq!(m.locate(0.5).0, 79);
    assert_eq!(m.locate(-0.5), (0, 0.0));
    assert!(SpatialMesh::new(1.0, 0.0, 4, Boundary::Periodic).is_err());
    assert!(SpatialMesh::new(0.0, 1.0, 0, Boundary::Periodic).is_err());
}

proptest! {
    #[test]
    fn cardinals_form_partition_of_unity(k in 0usize..6, s in -0.5f64..1.5) {
        let b = NodalBasis::new(k).unwrap();
        let sum: f64 = b.cardinals(s).iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-11);
    }

    #[test]
    fn interpolation_reproduces_polynomials(k in 1usize..5, s in 0.0f64..1.0, c in prop::collection::vec(-2.0f64..2.0, 5)) {
        let b = NodalBasis::new(k).unwrap();
        let p = |x: f64| (0..=k).map(|e| c[e] * x.powi(e as i32)).sum::<f64>();
        let vals: Vec<f64> = b.nodes().iter().map(|&x| p(x)).collect();
        prop_assert!((b.interpolate(&vals, s) - p(s)).abs() <= 1e-11);
    }

    #[test]
    fn tracing_lands_on_the_foot(v in -7.0f64..7.0, tau in 0.0f64..0.3, j in 0usize..20) {
        let m = SpatialMesh::new(0.0, 1.0, 20, Boundary::Periodic).unwrap();
        let (off, alpha) = upstream_offset(m.dx, v, tau);
        prop_assert!((0.0..1.0).contains(&alpha));
        let foot = m.cell_left(j) - v * tau;
        let recon = m.cell_left(j) + (off as f64 + alpha) * m.dx;
        prop_assert!((foot - recon).abs() <= 1e-12);
        let (js, a2) = locate_upstream(&m, j, v, tau);
        prop_assert_eq!(js, m.wrap_cell(j as i64 + off));
        prop_assert_eq!(a2, alpha);
    }
}
