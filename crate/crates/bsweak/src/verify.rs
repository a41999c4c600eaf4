//! The acceptance suite behind `verify-paper`.
//!
//! Every criterion yields a pass flag, a one-line detail and a CSV artifact.
//! Details and artifacts contain no timings, so two runs can be compared
//! byte for byte; wall-clock seconds are kept separately.

use crate::commands::{self, cross_reports, hs_oracle, ineq_table, mnorm_table, sample_plan, sweep_table};
use crate::config::{PotentialSpec, RunConfig};
use crate::table::{Cell, Table};
use bsweak_core::bsop::{BsKind, BsMatrix, BsOperator, Discretization};
use bsweak_core::fd::OracleOutcome;
use bsweak_core::grid::{build_cartesian, build_polar};
use bsweak_core::potential::{verify_example_v0, Condition, Potential, Verdict};
use bsweak_core::quad::{integrate, QuadOptions};
use bsweak_core::specfun::{g_of_alpha, k0, k1, EULER_GAMMA};
use bsweak_core::weakcoupling::{SolveStatus, WeakCoupling};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{LN_2, PI, TAU};
use std::fmt::Write as _;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Settings {
    /// Half resolutions, tolerances relaxed by 2.
    pub quick: bool,
    pub seed: u64,
}

impl Settings {
    fn tol(&self, t: f64) -> f64 {
        if self.quick {
            2.0 * t
        } else {
            t
        }
    }

    fn config(&self, name: &str, params: &[(&str, f64)]) -> RunConfig {
        let mut cfg = RunConfig::new(PotentialSpec::named(name, params));
        cfg.quick = self.quick;
        cfg.seed = self.seed;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub artifact: String,
    pub seconds: f64,
}

impl Criterion {
    pub fn line(&self) -> String {
        format!(
            "criterion {:<3} {:<34} {}  {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub criteria: Vec<Criterion>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn get(&self, id: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.id == id)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["criterion", "name", "status", "detail"]);
        for c in &self.criteria {
            t.push(vec![
                c.id.into(),
                c.name.into(),
                (if c.passed { "pass" } else { "fail" }).into(),
                c.detail.clone().into(),
            ]);
        }
        t
    }

    /// Everything that must be reproducible: details and artifacts.
    pub fn fingerprint(&self) -> String {
        let mut s = String::new();
        for c in &self.criteria {
            let _ = write!(s, "## {} {} {}\n{}\n", c.id, c.passed, c.detail, c.artifact);
        }
        s
    }
}

type Outcome = (bool, String, String);

fn timed(id: &'static str, name: &'static str, f: impl FnOnce() -> Outcome) -> Criterion {
    let t0 = Instant::now();
    let (passed, detail, artifact) = f();
    Criterion {
        id,
        name,
        passed,
        detail,
        artifact,
        seconds: t0.elapsed().as_secs_f64(),
    }
}

fn failed(msg: impl std::fmt::Display) -> Outcome {
    (false, format!("error: {msg}"), String::new())
}

macro_rules! attempt {
    ($e:expr) => {
        match $e {
            Ok(x) => x,
            Err(e) => return failed(e),
        }
    };
}

/// Criteria 1 to 9, then criterion 10 which reruns them and compares.
pub fn run_suite(s: &Settings) -> Report {
    let mut report = run_numeric(s);
    let first = report.fingerprint();
    let c10 = timed("10", "determinism", || {
        let second = run_numeric(s).fingerprint();
        let same = first == second;
        let detail = format!(
            "two runs of criteria 1-9: {} bytes, {}",
            first.len(),
            if same { "identical" } else { "differ" }
        );
        (same, detail, String::new())
    });
    report.criteria.push(c10);
    report
}

/// Criteria 1 to 9.
pub fn run_numeric(s: &Settings) -> Report {
    Report {
        criteria: vec![
            timed("1", "asymptotic law trend", || asymptotic_trend(s)),
            timed("2", "cross-solver agreement", || cross_solver(s)),
            timed("3", "Birman-Schwinger equivalence", || bs_equivalence(s)),
            timed("4", "Hilbert-Schmidt norm", || hilbert_schmidt(s)),
            timed("5", "M(alpha) rates", || m_rates(s)),
            timed("6", "kernel inequality constants", || kernel_constants(s)),
            timed("7", "hypothesis examples", || hypothesis_examples(s)),
            timed("8a", "K0/K1 accuracy", || bessel_accuracy(s)),
            timed("8b", "K0 small-argument envelope", k0_envelope),
            timed("9", "identities", || identities(s)),
        ],
    }
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn asymptotic_trend(s: &Settings) -> Outcome {
    let t0 = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    let mut artifact = String::new();
    for (name, params) in [("disk", vec![("radius", 1.0), ("height", 1.0)]), ("gaussian", vec![("a", 1.0)])] {
        let mut cfg = s.config(name, &params);
        cfg.eps = Some(commands::SWEEP_EPS.to_vec());
        let v = attempt!(cfg.potential.build());
        let grid = attempt!(cfg.grid_for(&v));
        let wc = attempt!(WeakCoupling::new(&v, &grid, cfg.root_options()));
        let results: Vec<_> = commands::SWEEP_EPS
            .iter()
            .map(|&e| wc.find_root(e).map_err(|x| x.to_string()))
            .collect();
        let (table, any_failed) = sweep_table(&results, &commands::SWEEP_EPS);
        let limit = -4.0 * PI / wc.u;
        let devs: Vec<f64> = table
            .column("eps_times_ln")
            .unwrap_or_default()
            .iter()
            .map(|c| (c.as_f64().unwrap_or(f64::NAN) - limit).abs())
            .collect();
        let first = devs[0];
        let last = devs[devs.len() - 1];
        let pass = !any_failed && strictly_decreasing(&devs) && last < 0.5 * first;
        ok &= pass;
        let _ = write!(
            detail,
            "{name}: |eps ln(-lambda) + 4pi/U| {:.4} -> {:.4} ({}, {} nodes); ",
            first,
            last,
            if strictly_decreasing(&devs) { "decreasing" } else { "not decreasing" },
            grid.len()
        );
        let _ = write!(artifact, "# sweep {name}\n{}", table.to_csv());
        ok &= grid.len() <= 4096;
    }
    let runtime_ok = t0.elapsed().as_secs_f64() <= 60.0;
    ok &= runtime_ok;
    detail.push_str(if runtime_ok { "runtime within 60 s" } else { "runtime above 60 s" });
    (ok, detail, artifact)
}

fn cross_solver(s: &Settings) -> Outcome {
    let t0 = Instant::now();
    let mut cfg = s.config("disk", &[("radius", 1.0), ("height", 1.0)]);
    cfg.eps = Some(vec![0.5, 0.4]);
    let v = attempt!(cfg.potential.build());
    let reports = attempt!(cross_reports(&cfg, &v));
    let tol = s.tol(0.05);
    let mut ok = true;
    let mut detail = String::new();
    let mut t = Table::new(&commands::ORACLE_COLUMNS);
    for r in &reports {
        let r = attempt!(r.as_ref());
        let pass = r.outcome == OracleOutcome::Compared && r.rel_diff_ln <= tol;
        ok &= pass;
        let _ = write!(
            detail,
            "eps {}: rel diff of ln(-lambda) {:.2e} (FD n {}->{}, L {:.0}); ",
            r.epsilon, r.rel_diff_ln, r.n_coarse, r.n_fine, r.half_width
        );
        t.push(commands::oracle_row(r));
    }
    let runtime_ok = t0.elapsed().as_secs_f64() <= 120.0;
    ok &= runtime_ok;
    let _ = write!(detail, "tol {tol}; {}", if runtime_ok { "runtime within 120 s" } else { "runtime above 120 s" });
    (ok, detail, t.to_csv())
}

fn bs_equivalence(s: &Settings) -> Outcome {
    let cases: [(&str, Vec<(&str, f64)>, f64); 6] = [
        ("disk", vec![], 0.5),
        ("disk", vec![], 0.3),
        ("gaussian", vec![], 0.5),
        ("gaussian", vec![], 0.3),
        ("annulus_signed", vec![], 0.5),
        ("v_zero", vec![], 0.5),
    ];
    let dist_tol = s.tol(1e-6);
    let mut t = Table::new(&["potential", "epsilon", "alpha_root", "eig_distance", "near_one", "second_gap"]);
    let mut ok = true;
    let mut worst = 0.0f64;
    for (name, params, eps) in cases {
        let cfg = s.config(name, &params);
        let v = attempt!(cfg.potential.build());
        let grid = attempt!(cfg.grid_for(&v));
        let wc = attempt!(WeakCoupling::new(&v, &grid, cfg.root_options()));
        let r = attempt!(wc.find_root(eps));
        if r.status != SolveStatus::Found {
            return (false, format!("{name} eps {eps}: {}", r.status.as_str()), t.to_csv());
        }
        let op = attempt!(wc.operator(r.alpha_root));
        let eigs = attempt!(op.q_eigenvalues(8));
        let mut d: Vec<f64> = eigs.iter().map(|mu| (1.0 - eps * mu).abs()).collect();
        d.sort_by(f64::total_cmp);
        let near = d.iter().filter(|x| **x <= 1e-3).count();
        ok &= d[0] <= dist_tol && near == 1;
        worst = worst.max(d[0]);
        t.push(vec![
            name.into(),
            eps.into(),
            r.alpha_root.into(),
            d[0].into(),
            near.into(),
            d.get(1).copied().unwrap_or(f64::NAN).into(),
        ]);
    }
    let detail = format!(
        "{} pairs; worst |1 - eps mu| {:.1e} (tol {dist_tol:.0e}); exactly one eigenvalue within 1e-3 of 1: {}",
        t.rows.len(),
        worst,
        t.rows.iter().all(|r| r[4] == Cell::U(1))
    );
    (ok, detail, t.to_csv())
}

fn hilbert_schmidt(s: &Settings) -> Outcome {
    let cfg = s.config("disk", &[("radius", 1.0), ("height", 1.0)]);
    let v = attempt!(cfg.potential.build());
    let grid = attempt!(cfg.grid_for(&v));
    let tol = s.tol(0.02);
    let mut t = Table::new(&["alpha", "hs_norm", "hs_oracle", "rel_diff"]);
    let mut ok = true;
    let mut worst = 0.0f64;
    for a in [0.5, 1.0, 2.0] {
        let hs = attempt!(BsOperator::new(&v, &grid, a, Discretization::Auto)).hs_norm();
        let oracle = hs_oracle(&v, a).unwrap_or(f64::NAN);
        let rel = ((hs - oracle) / oracle).abs();
        ok &= rel <= tol;
        worst = worst.max(rel);
        t.push(vec![a.into(), hs.into(), oracle.into(), rel.into()]);
    }
    let mut hs = Vec::new();
    for a in [0.1, 1.0, 10.0, 50.0] {
        let h = attempt!(BsOperator::new(&v, &grid, a, Discretization::Auto)).hs_norm();
        t.push(vec![a.into(), h.into(), f64::NAN.into(), f64::NAN.into()]);
        hs.push(h);
    }
    let monotone = hs.windows(2).all(|w| w[1] <= w[0]);
    let ratio = hs[3] / hs[0];
    ok &= monotone && ratio < 0.05;
    let detail = format!(
        "worst rel diff vs autocorrelation oracle {worst:.2e} (tol {tol}); nonincreasing {monotone}; hs(50)/hs(0.1) = {ratio:.3e}"
    );
    (ok, detail, t.to_csv())
}

fn m_rates(s: &Settings) -> Outcome {
    let cfg = s.config("disk", &[("radius", 1.0), ("height", 1.0)]);
    let v = attempt!(cfg.potential.build());
    let t = attempt!(mnorm_table(&v, &cfg, &[0.0, 0.5], &commands::LEMMA_ALPHA));
    let mut ok = true;
    let mut detail = String::new();
    for (k, s_val) in [0.0, 0.5].iter().enumerate() {
        let rows = &t.rows[4 * k..4 * k + 4];
        let norm: Vec<f64> = rows.iter().map(|r| r[3].as_f64().unwrap_or(f64::NAN)).collect();
        let form: Vec<f64> = rows.iter().map(|r| r[4].as_f64().unwrap_or(f64::NAN)).collect();
        let pass = strictly_decreasing(&norm) && strictly_decreasing(&form);
        ok &= pass;
        let _ = write!(
            detail,
            "s={s_val}: |M|^2/|g|^(2-s) {:.3e} -> {:.3e}, |<Mb,c>|/|g|^(1-s) {:.3e} -> {:.3e}; ",
            norm[0], norm[3], form[0], form[3]
        );
    }
    detail.push_str(if ok { "both strictly decreasing" } else { "not strictly decreasing" });
    (ok, detail, t.to_csv())
}

fn kernel_constants(s: &Settings) -> Outcome {
    let plan = sample_plan(s.quick);
    let t = attempt!(ineq_table(&[0.5, 1.0], &plan));
    let tol = 0.05;
    let mut worst = 0.0f64;
    for r in &t.rows {
        worst = worst.max(r[4].as_f64().unwrap_or(f64::INFINITY));
    }
    let ok = worst < tol;
    let detail = format!(
        "largest C_emp change under plan doubling {worst:.2e} over {} (inequality, s) pairs (tol {tol})",
        t.rows.len()
    );
    (ok, detail, t.to_csv())
}

fn hypothesis_examples(s: &Settings) -> Outcome {
    let mut t = Table::new(&["potential", "condition", "parameter", "verdict", "expected"]);
    let mut ok = true;
    let mut check = |v: &Potential, c: Condition, p: f64, want: Verdict| -> Result<(), String> {
        let r = v.check_assumption(c, p).map_err(|e| e.to_string())?;
        ok &= r.verdict == want;
        t.push(vec![
            v.name().to_string().into(),
            c.as_str().into(),
            p.into(),
            r.verdict.as_str().into(),
            want.as_str().into(),
        ]);
        Ok(())
    };
    for delta in [0.25, 0.5] {
        let v = attempt!(Potential::v_infinity(delta));
        attempt!(check(&v, Condition::LnS, delta, Verdict::Converged));
        for sp in [0.1, 0.5] {
            attempt!(check(&v, Condition::SimonS, sp, Verdict::Divergent));
        }
    }
    let v0 = Potential::v_zero();
    attempt!(check(&v0, Condition::Roll, 0.0, Verdict::Converged));
    for eta in [0.05, 0.2] {
        attempt!(check(&v0, Condition::SimonEta, eta, Verdict::Divergent));
    }
    let rep = verify_example_v0();
    let tol = s.tol(0.005);
    let roll_ok = rep.converged && rep.value.is_finite() && rep.last_change < tol;
    ok &= roll_ok;
    let detail = format!(
        "{} verdicts as expected: {}; v_zero roll integral {:.6} with last doubling change {:.2e} (tol {tol})",
        t.rows.len(),
        t.rows.iter().all(|r| r[3] == r[4]),
        rep.value,
        rep.last_change
    );
    (ok, detail, t.to_csv())
}

/// `K_ν(w) = ∫₀^∞ e^{-w cosh t} cosh(νt) dt`, with `e^{-w}` factored out.
pub fn bessel_k_integral(nu: f64, w: f64) -> f64 {
    let upper = (1.0 + 760.0 / w).acosh();
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-15,
        max_intervals: 4000,
    };
    let r = integrate(
        |t| (-w * 2.0 * (0.5 * t).sinh().powi(2)).exp() * (nu * t).cosh(),
        0.0,
        upper,
        &[],
        opts,
    );
    r.value * (-w).exp()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| if i + 1 == n { hi } else { (a + (b - a) * i as f64 / (n - 1) as f64).exp() })
        .collect()
}

fn bessel_accuracy(s: &Settings) -> Outcome {
    let tol = s.tol(1e-12);
    let mut t = Table::new(&["w", "k0", "k0_oracle", "k0_rel", "k1", "k1_oracle", "k1_rel"]);
    let mut worst = (0.0f64, 0.0f64);
    for w in log_grid(1e-8, 700.0, 200) {
        let (a, b) = (k0(w), k1(w));
        let (oa, ob) = (bessel_k_integral(0.0, w), bessel_k_integral(1.0, w));
        let (ra, rb) = (((a - oa) / oa).abs(), ((b - ob) / ob).abs());
        worst = (worst.0.max(ra), worst.1.max(rb));
        t.push(vec![w.into(), a.into(), oa.into(), ra.into(), b.into(), ob.into(), rb.into()]);
    }
    let ok = worst.0 <= tol && worst.1 <= tol;
    let detail = format!(
        "200 points on [1e-8, 700]: worst rel err K0 {:.2e}, K1 {:.2e} vs integral representation (tol {tol:.0e})",
        worst.0, worst.1
    );
    (ok, detail, t.to_csv())
}

fn k0_envelope() -> Outcome {
    let c = LN_2 - EULER_GAMMA;
    let mut t = Table::new(&["w", "lhs", "envelope", "holds"]);
    let mut first_bad = None;
    let mut bad = 0usize;
    for w in log_grid(1e-6, 1.0, 200) {
        let lhs = (k0(w) + w.ln() - c).abs();
        let env = 0.6 * w * w * w.ln().abs() + 1e-10;
        let holds = lhs <= env;
        if !holds {
            bad += 1;
            first_bad.get_or_insert(w);
        }
        t.push(vec![w.into(), lhs.into(), env.into(), holds.into()]);
    }
    let detail = match first_bad {
        None => "|K0(w) + ln w - (ln 2 - gamma)| <= 0.6 w^2 |ln w| + 1e-10 on all 200 points of [1e-6, 1]".into(),
        Some(w) => format!(
            "envelope violated at {bad} of 200 points of [1e-6, 1], first at w = {w:.4}; \
             near w = 1 the bound tends to 1e-10 while the left side is about 0.3"
        ),
    };
    (bad == 0, detail, t.to_csv())
}

fn identities(s: &Settings) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut t = Table::new(&["check", "case", "value"]);
    let mut ok = true;

    // Q = L + M entrywise, on both grid kinds and with a sign change.
    let mut worst_split = 0.0f64;
    let grids = [attempt!(build_polar(2.0, 12, 12, 1.0)), attempt!(build_cartesian(2.0, 16))];
    let pots = [
        attempt!(Potential::disk(1.0, 1.0)),
        attempt!(Potential::annulus_signed(1.0, 2.0, 1.0, -0.2)),
        attempt!(Potential::gaussian(1.0)),
    ];
    for grid in &grids {
        for v in &pots {
            for alpha in [1e-4, 0.3, 3.0] {
                let q = attempt!(BsMatrix::assemble(v, grid, alpha, BsKind::Q));
                let m = attempt!(BsMatrix::assemble(v, grid, alpha, BsKind::M));
                let g = g_of_alpha(alpha);
                let c = q.c_vec();
                let scale = (0..q.len())
                    .flat_map(|i| (0..q.len()).map(move |j| (i, j)))
                    .map(|(i, j)| q.entry(i, j).abs())
                    .fold(0.0, f64::max);
                let mut err = 0.0f64;
                for i in 0..q.len() {
                    for j in 0..q.len() {
                        let l = g * q.b_vec[i] * c[j];
                        err = err.max((q.entry(i, j) - l - m.entry(i, j)).abs());
                    }
                }
                worst_split = worst_split.max(err / scale);
            }
        }
    }
    ok &= worst_split <= 1e-12;
    t.push(vec!["q_equals_l_plus_m".into(), "max rel entry".into(), worst_split.into()]);

    // Λ expansion: g (first + second) = 1 - Λ - ε g U_h at random (α, ε).
    let grid = attempt!(build_polar(5.3, 24, 24, 1.0));
    let mut worst_lambda = 0.0f64;
    for k in 0..10 {
        let v = &pots[k % 3];
        let alpha = (-1.0 - 20.0 * rng.gen::<f64>()).exp();
        let op = attempt!(BsOperator::new(v, &grid, alpha, Discretization::Auto));
        let m = attempt!(op.m_norm());
        let eps = (0.1 + 0.8 * rng.gen::<f64>()) / m.max(1.0);
        let (a, b) = attempt!(op.remainder(eps));
        let lam = attempt!(op.lambda(eps));
        let lhs = 1.0 - lam - eps * op.g() * op.u_discrete();
        let err = (op.g() * (a + b) - lhs).abs();
        worst_lambda = worst_lambda.max(err);
        t.push(vec![
            "lambda_expansion".into(),
            format!("{} alpha={alpha:e} eps={eps:e}", v.name()).into(),
            err.into(),
        ]);
    }
    ok &= worst_lambda <= 1e-10;

    // g(α(g)) = g with α(g) = e^{-2πg}.
    let mut worst_g = 0.0f64;
    for k in 0..200 {
        let g = -3.0 + 0.5 * k as f64 + rng.gen::<f64>() * 0.5;
        let alpha = (-TAU * g).exp();
        let back = g_of_alpha(alpha);
        worst_g = worst_g.max((back - g).abs() / g.abs().max(1.0));
    }
    ok &= worst_g <= 1e-12;
    t.push(vec!["g_alpha_round_trip".into(), "200 seeded points".into(), worst_g.into()]);

    let detail = format!(
        "Q - L - M {worst_split:.1e} (rel); Lambda expansion {worst_lambda:.1e} at 10 points; g round trip {worst_g:.1e}"
    );
    (ok, detail, t.to_csv())
}
