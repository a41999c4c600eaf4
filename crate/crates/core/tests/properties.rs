use bsweak_core::grid::{build_polar, Point2};
use bsweak_core::potential::Potential;
use bsweak_core::specfun::{green, green_cell_avg, k0, k1};
use bsweak_core::{BsKind, BsMatrix};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn green_depends_on_product(r in 1e-6f64..1e3, alpha in 1e-6f64..1e2) {
        let a = green(r, alpha).unwrap();
        let b = green(alpha * r, 1.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-14 * b.abs());
    }

    #[test]
    fn cell_average_exceeds_edge_value(rho in 1e-6f64..10.0, alpha in 1e-4f64..10.0) {
        prop_assert!(green_cell_avg(rho, alpha).unwrap() > green(rho, alpha).unwrap());
    }

    #[test]
    fn bessel_decreasing(w in 1e-8f64..690.0, step in 1e-6f64..1.0) {
        let w2 = w * (1.0 + step);
        prop_assert!(k0(w2) < k0(w));
        prop_assert!(k1(w2) < k1(w));
        prop_assert!(k1(w) > k0(w));
    }

    #[test]
    fn radial_potentials_rotation_invariant(r in 0.01f64..6.0, theta in 0.0f64..6.283) {
        for v in [
            Potential::disk(1.5, 1.0).unwrap(),
            Potential::gaussian(0.7).unwrap(),
            Potential::v_zero(),
            Potential::annulus_signed(1.0, 2.0, 1.0, -0.2).unwrap(),
        ] {
            let base = v.evaluate(Point2::polar(r, theta));
            for k in 1..16 {
                let phi = theta + k as f64 * std::f64::consts::TAU / 16.0;
                let x = v.evaluate(Point2::polar(r, phi));
                prop_assert!((x - base).abs() <= 1e-14 * base.abs().max(1.0));
            }
        }
    }
}

#[test]
fn disk_integrals() {
    for radius in [0.5, 1.0, 2.0] {
        for height in [-1.0, 1.0] {
            let u = Potential::disk(radius, height).unwrap().integral_u().unwrap().value;
            let exact = height * std::f64::consts::PI * radius * radius;
            assert!((u - exact).abs() < 1e-10);
        }
    }
}

#[test]
fn kernel_matrix_symmetry() {
    let v = Potential::gaussian(1.0).unwrap();
    let g = build_polar(5.0, 10, 12, 1.0).unwrap();
    for kind in [BsKind::Q, BsKind::M] {
        let m = BsMatrix::assemble(&v, &g, 0.2, kind).unwrap();
        assert!(m.entries().max_asymmetry() <= 1e-15 * m.entries().max_abs());
    }
}
