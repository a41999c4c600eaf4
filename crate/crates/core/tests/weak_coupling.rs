use bsweak_core::fd::{cross_validate, OracleOutcome};
use bsweak_core::grid::{build_cartesian, build_polar};
use bsweak_core::potential::Potential;
use bsweak_core::weakcoupling::{RootOptions, SolveStatus, WcError, WeakCoupling};
use bsweak_core::Discretization;

#[test]
fn disk_sweep_approaches_limit() {
    let v = Potential::disk(1.0, 1.0).unwrap();
    let g = build_polar(1.0, 32, 32, 1.0).unwrap();
    let wc = WeakCoupling::new(&v, &g, RootOptions::default()).unwrap();
    let recs = wc.sweep(&[0.5, 0.3, 0.2, 0.1]).unwrap();
    let dev: Vec<f64> = recs.iter().map(|r| (r.eps_times_ln + 4.0).abs()).collect();
    assert!(dev.windows(2).all(|w| w[1] < w[0]), "{dev:?}");
    assert!(recs.iter().all(|r| r.status == SolveStatus::Found));
    assert!(recs.iter().all(|r| r.eps_times_ln > -4.0));
}

#[test]
fn dense_and_radial_roots_agree() {
    let v = Potential::gaussian(1.0).unwrap();
    let g = build_polar(5.3, 16, 16, 1.0).unwrap();
    let mut roots = Vec::new();
    for discretization in [Discretization::Dense, Discretization::Radial] {
        let opts = RootOptions {
            discretization,
            ..RootOptions::default()
        };
        let r = WeakCoupling::new(&v, &g, opts).unwrap().find_root(0.4).unwrap();
        roots.push(r.ln_lambda);
    }
    assert!((roots[0] - roots[1]).abs() < 1e-8 * roots[0].abs(), "{roots:?}");
}

#[test]
fn cross_route_matches_root() {
    let v = Potential::disk(1.0, 1.0).unwrap();
    let g = build_polar(1.0, 24, 24, 1.0).unwrap();
    let wc = WeakCoupling::new(&v, &g, RootOptions::default()).unwrap();
    let r = wc.find_root(0.6).unwrap();
    let a = wc.cross_route_alpha(0.6).unwrap().unwrap();
    assert!(((a - r.alpha_root) / r.alpha_root).abs() < 1e-6);
}

#[test]
fn signed_potential_on_cartesian_grid() {
    let v = Potential::annulus_signed(1.0, 2.0, 1.0, -0.2).unwrap();
    let g = build_cartesian(2.0, 24).unwrap();
    let wc = WeakCoupling::new(&v, &g, RootOptions::default()).unwrap();
    let r = wc.find_root(0.6).unwrap();
    assert_eq!(r.status, SolveStatus::Found);
    assert!(r.eig_distance < 1e-8);
    assert!(r.bs_gap > 1e-3);
}

#[test]
fn hypothesis_violations() {
    let g = build_polar(1.0, 8, 8, 1.0).unwrap();
    let neg = Potential::disk(1.0, -1.0).unwrap();
    assert!(matches!(
        WeakCoupling::new(&neg, &g, RootOptions::default()).unwrap().find_root(0.5),
        Err(WcError::Hypothesis(_))
    ));
    let zero = Potential::disk(1.0, 0.0).unwrap();
    let wc = WeakCoupling::with_u(&zero, &g, 1.0, RootOptions::default());
    assert_eq!(wc.find_root(0.5).unwrap().status, SolveStatus::NoRoot);
}

#[test]
fn finite_differences_confirm_gaussian() {
    let v = Potential::gaussian(1.0).unwrap();
    let g = build_polar(5.257, 32, 32, 1.0).unwrap();
    let wc = WeakCoupling::new(&v, &g, RootOptions::default()).unwrap();
    let r = wc.find_root(0.7).unwrap();
    let c = cross_validate(&v, 0.7, &r, 1.0).unwrap();
    assert_eq!(c.outcome, OracleOutcome::Compared);
    assert!(c.rel_diff_ln < 0.01, "{c:?}");
    assert!(c.residual <= 1e-8);
}
