//! Subcommands as functions from a resolved [`RunConfig`] to a table.

use crate::config::{ConfigError, RunConfig};
use crate::table::{Cell, Table};
use crate::verify;
use bsweak_core::bsop::BsOperator;
use bsweak_core::fd::{self, CrossReport};
use bsweak_core::potential::{Condition, Potential, Verdict};
use bsweak_core::specfun::{k0, lemma_ineq_constant, KernelInequality, SamplePlan};
use bsweak_core::weakcoupling::{EigenSolveResult, SolveStatus, WcError, WeakCoupling};
use bsweak_core::bsop::m_norm_curve;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::f64::consts::TAU;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum LemmaTable {
    /// Empirical constants of the kernel inequalities.
    Ineq,
    /// `‖M(α)‖` rate columns.
    Mnorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CheckAssumptions,
    Solve,
    Sweep,
    HsNorm,
    OracleCompare,
    LemmaCheck(LemmaTable),
    VerifyPaper,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckAssumptions => "check-assumptions",
            Command::Solve => "solve",
            Command::Sweep => "sweep",
            Command::HsNorm => "hs-norm",
            Command::OracleCompare => "oracle-compare",
            Command::LemmaCheck(_) => "lemma-check",
            Command::VerifyPaper => "verify-paper",
        }
    }
}

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Exit {
    Success = 0,
    Usage = 1,
    Hypothesis = 2,
    Partial = 3,
    Acceptance = 4,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CmdError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Hypothesis(String),
    #[error("{0}")]
    Numeric(String),
}

impl CmdError {
    pub fn exit(&self) -> Exit {
        match self {
            CmdError::Config(_) => Exit::Usage,
            CmdError::Hypothesis(_) => Exit::Hypothesis,
            CmdError::Numeric(_) => Exit::Partial,
        }
    }
}

impl From<WcError> for CmdError {
    fn from(e: WcError) -> Self {
        match e {
            WcError::Hypothesis(_) => CmdError::Hypothesis(e.to_string()),
            WcError::Epsilon(_) => CmdError::Config(ConfigError::new("eps", e.to_string())),
            _ => CmdError::Numeric(e.to_string()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub summary: Value,
    pub exit: Exit,
}

pub const SWEEP_EPS: [f64; 5] = [0.5, 0.4, 0.3, 0.25, 0.2];
pub const HS_ALPHA: [f64; 6] = [0.1, 0.5, 1.0, 2.0, 10.0, 50.0];
pub const LEMMA_ALPHA: [f64; 4] = [1e-2, 1e-4, 1e-6, 1e-8];

/// Fills command-specific defaults so the embedded config is complete.
pub fn resolve(cmd: Command, mut cfg: RunConfig) -> RunConfig {
    match cmd {
        Command::Solve => {
            cfg.eps.get_or_insert_with(|| vec![0.5]);
        }
        Command::Sweep => {
            cfg.eps.get_or_insert_with(|| SWEEP_EPS.to_vec());
        }
        Command::OracleCompare => {
            cfg.eps.get_or_insert_with(|| vec![0.5, 0.4]);
        }
        Command::HsNorm => {
            cfg.alpha.get_or_insert_with(|| HS_ALPHA.to_vec());
            cfg.k.get_or_insert(3);
        }
        Command::LemmaCheck(LemmaTable::Mnorm) => {
            cfg.alpha.get_or_insert_with(|| LEMMA_ALPHA.to_vec());
            cfg.s.get_or_insert_with(|| vec![0.0, 0.5]);
        }
        Command::LemmaCheck(LemmaTable::Ineq) => {
            cfg.s.get_or_insert_with(|| vec![0.5, 1.0]);
        }
        Command::CheckAssumptions => {
            cfg.conditions
                .get_or_insert_with(|| Condition::ALL.iter().map(|c| c.as_str().to_string()).collect());
            cfg.s.get_or_insert_with(|| vec![0.5]);
            cfg.eta.get_or_insert_with(|| vec![0.2]);
        }
        Command::VerifyPaper => {}
    }
    cfg
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome, CmdError> {
    match cmd {
        Command::CheckAssumptions => check_assumptions(cfg),
        Command::Solve => solve(cfg),
        Command::Sweep => sweep(cfg),
        Command::HsNorm => hs_norm(cfg),
        Command::OracleCompare => oracle_compare(cfg),
        Command::LemmaCheck(LemmaTable::Ineq) => lemma_ineq(cfg),
        Command::LemmaCheck(LemmaTable::Mnorm) => lemma_mnorm(cfg),
        Command::VerifyPaper => verify_paper(cfg),
    }
}

fn list<'a>(field: &'a Option<Vec<f64>>, name: &str) -> Result<&'a [f64], CmdError> {
    field
        .as_deref()
        .ok_or_else(|| CmdError::Config(ConfigError::new(name, "missing")))
}

fn root_solves(cfg: &RunConfig, v: &Potential) -> Result<(Vec<Result<EigenSolveResult, String>>, Value), CmdError> {
    let grid = cfg.grid_for(v)?;
    let wc = WeakCoupling::new(v, &grid, cfg.root_options())?;
    if !(wc.u > 0.0) {
        return Err(WcError::Hypothesis(wc.u).into());
    }
    let eps = list(&cfg.eps, "eps")?;
    let results: Vec<_> = eps
        .par_iter()
        .map(|&e| wc.find_root(e).map_err(|err| err.to_string()))
        .collect();
    let info = json!({"u": wc.u, "nodes": grid.len(), "resolution": cfg.resolution()});
    Ok((results, info))
}

fn failure_exit(any_failed: bool) -> Exit {
    if any_failed {
        Exit::Partial
    } else {
        Exit::Success
    }
}

pub const SOLVE_COLUMNS: [&str; 14] = [
    "epsilon",
    "u",
    "t_root",
    "alpha_root",
    "lambda",
    "ln_lambda",
    "predictor",
    "rel_dev",
    "bs_gap",
    "eig_distance",
    "m_norm",
    "lambda_residual",
    "iterations",
    "status",
];

fn solve(cfg: &RunConfig) -> Result<Outcome, CmdError> {
    let v = cfg.potential.build().map_err(|e| e.with_prefix("potential"))?;
    let (results, info) = root_solves(cfg, &v)?;
    let mut t = Table::new(&SOLVE_COLUMNS);
    let mut failed = false;
    for (r, &e) in results.iter().zip(list(&cfg.eps, "eps")?) {
        match r {
            Ok(r) => {
                failed |= r.status != SolveStatus::Found;
                t.push(vec![
                    r.epsilon.into(),
                    r.u.into(),
                    r.t_root.into(),
                    r.alpha_root.into(),
                    r.lambda.into(),
                    r.ln_lambda.into(),
                    r.predictor.into(),
                    r.rel_dev.into(),
                    r.bs_gap.into(),
                    r.eig_distance.into(),
                    r.m_norm_at_root.into(),
                    r.lambda_residual.into(),
                    r.iterations.into(),
                    r.status.as_str().into(),
                ]);
            }
            Err(msg) => {
                failed = true;
                let mut row: Vec<Cell> = vec![e.into()];
                row.extend((1..13).map(|_| Cell::F(f64::NAN)));
                row.push(format!("error: {msg}").into());
                t.push(row);
            }
        }
    }
    Ok(Outcome {
        table: t,
        summary: info,
        exit: failure_exit(failed),
    })
}

pub const SWEEP_COLUMNS: [&str; 7] = [
    "epsilon",
    "lambda",
    "ln_lambda",
    "predictor",
    "rel_dev",
    "eps_times_ln",
    "status",
];

pub fn sweep_table(results: &[Result<EigenSolveResult, String>], eps: &[f64]) -> (Table, bool) {
    let mut t = Table::new(&SWEEP_COLUMNS);
    let mut failed = false;
    for (r, &e) in results.iter().zip(eps) {
        match r {
            Ok(r) => {
                let s = bsweak_core::SweepRecord::from(r);
                failed |= s.status != SolveStatus::Found;
                t.push(vec![
                    s.epsilon.into(),
                    s.lambda.into(),
                    s.ln_lambda.into(),
                    s.predictor.into(),
                    s.rel_dev.into(),
                    s.eps_times_ln.into(),
                    s.status.as_str().into(),
                ]);
            }
            Err(msg) => {
                failed = true;
                let mut row: Vec<Cell> = vec![e.into()];
                row.extend((1..6).map(|_| Cell::F(f64::NAN)));
                row.push(format!("error: {msg}").into());
                t.push(row);
            }
        }
    }
    (t, failed)
}

fn sweep(cfg: &RunConfig) -> Result<Outcome, CmdError> {
    let v = cfg.potential.build().map_err(|e| e.with_prefix("potential"))?;
    let (results, info) = root_solves(cfg, &v)?;
    let (table, failed) = sweep_table(&results, list(&cfg.eps, "eps")?);
    Ok(Outcome {
        table,
        summary: info,
        exit: failure_exit(failed),
    })
}

fn check_assumptions(cfg: &RunConfig) -> Result<Outcome, CmdError> {
    let v = cfg.potential.build().map_err(|e| e.with_prefix("potential"))?;
    let names = cfg.conditions.clone().unwrap_or_default();
    let mut jobs: Vec<(Condition, f64)> = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let c = Condition::from_str(name).map_err(|_| {
            ConfigError::new(
                format!("conditions[{i}]"),
                format!("unknown condition `{name}` (expected L1, ln_s, roll, simon_s or simon_eta)"),
            )
        })?;
        let params: Vec<f64> = match c {
            Condition::L1 | Condition::Roll => vec![0.0],
            Condition::LnS | Condition::SimonS => list(&cfg.s, "s")?.to_vec(),
            Condition::SimonEta => list(&cfg.eta, "eta")?.to_vec(),
        };
        jobs.extend(params.into_iter().map(|p| (c, p)));
    }
    let reports: Vec<_> = jobs.par_iter().map(|&(c, p)| v.check_assumption(c, p)).collect();
    let mut t = Table::new(&[
        "condition",
        "parameter",
        "verdict",
        "converged",
        "value",
        "last_change",
        "refinements",
    ]);
    let mut all_hold = true;
    for (&(c, p), r) in jobs.iter().zip(reports) {
        let r = r.map_err(|e| {
            let field = if c == Condition::SimonEta { "eta" } else { "s" };
            ConfigError::new(field, e.to_string())
        })?;
        all_hold &= r.verdict == Verdict::Converged;
        let h = &r.refinement_history;
        let last_change = match h.len() {
            n if n >= 2 => ((h[n - 1].1 - h[n - 2].1) / h[n - 1].1).abs(),
            _ => f64::NAN,
        };
        t.push(vec![
            c.as_str().into(),
            p.into(),
            r.verdict.as_str().into(),
            r.converged.into(),
            r.value.into(),
            last_change.into(),
            h.len().into(),
        ]);
    }
    Ok(Outcome {
        table: t,
        summary: json!({"all_hold": all_hold}),
        exit: if all_hold { Exit::Success } else { Exit::Hypothesis },
    })
}

/// `‖Q(α)‖_HS² = ∫ F(|u|) 𝒢(u; α)² du` by quadrature over `ln|u|`.
pub fn hs_oracle(v: &Potential, alpha: f64) -> Option<f64> {
    if !v.is_radial() {
        return None;
    }
    let reach = 2.0 * v.support_radius()?;
    let m = v
        .autocorrelation_moment(
            |l| {
                let g = k0(alpha * l.exp()) / TAU;
                g * g
            },
            -60.0,
            reach.ln(),
            1e-8,
        )
        .ok()?;
    Some(m.value.sqrt())
}

fn hs_norm(cfg: &RunConfig) -> Result<Outcome, CmdError> {
    let v = cfg.potential.build().map_err(|e| e.with_prefix("potential"))?;
    let grid = cfg.grid_for(&v)?;
    let alphas = list(&cfg.alpha, "alpha")?;
    let k = cfg.k.unwrap_or(3);
    let disc = cfg.root_options().discretization;
    let rows: Vec<Result<Vec<Cell>, String>> = alphas
        .par_iter()
        .map(|&a| {
            let op = BsOperator::new(&v, &grid, a, disc).map_err(|e| e.to_string())?;
            let hs = op.hs_norm();
            let oracle = hs_oracle(&v, a).unwrap_or(f64::NAN);
            let eig = op.q_eigenvalues(k).map_err(|e| e.to_string())?;
            let eig: Vec<String> = eig.iter().map(|x| Cell::F(*x).text()).collect();
            Ok(vec![
                a.into(),
                hs.into(),
                oracle.into(),
                ((hs - oracle) / oracle).abs().into(),
                eig.join(";").into(),
            ])
        })
        .collect();
    let mut t = Table::new(&["alpha", "hs_norm", "hs_oracle", "rel_diff", "top_eigenvalues"]);
    for r in rows {
        t.push(r.map_err(CmdError::Numeric)?);
    }
    Ok(Outcome {
        table: t,
        summary: json!({"nodes": grid.len()}),
        exit: Exit::Success,
    })
}

pub const ORACLE_COLUMNS: [&str; 14] = [
    "epsilon",
    "outcome",
    "lambda_bs",
    "ln_lambda_bs",
    "lambda_fd",
    "lambda_fd_coarse",
    "lambda_fd_fine",
    "fd_error_estimate",
    "rel_diff_ln",
    "half_width",
    "n_coarse",
    "n_fine",
    "residual",
    "note",
];

pub fn oracle_row(r: &CrossReport) -> Vec<Cell> {
    vec![
        r.epsilon.into(),
        r.outcome.as_str().into(),
        r.lambda_bs.into(),
        r.ln_lambda_bs.into(),
        r.lambda_fd.into(),
        r.lambda_fd_coarse.into(),
        r.lambda_fd_fine.into(),
        r.fd_error_estimate.into(),
        r.rel_diff_ln.into(),
        r.half_width.into(),
        r.n_coarse.into(),
        r.n_fine.into(),
        r.residual.into(),
        r.note.into(),
    ]
}

pub fn cross_reports(cfg: &RunConfig, v: &Potential) -> Result<Vec<Result<CrossReport, String>>, CmdError> {
    let (results, _) = root_solves(cfg, v)?;
    let eps = list(&cfg.eps, "eps")?;
    Ok(results
        .par_iter()
        .zip(eps)
        .map(|(r, &e)| {
            let r = r.as_ref().map_err(|m| m.clone())?;
            fd::cross_validate(v, e, r, cfg.solver.fd_safety).map_err(|m| m.to_string())
        })
        .collect())
}

fn oracle_compare(cfg: &RunConfig) -> Result<Outcome, CmdError> {
    let v = cfg.potential.build().map_err(|e| e.with_prefix("potential"))?;
    let reports = cross_reports(cfg, &v)?;
    let mut t = Table::new(&ORACLE_COLUMNS);
    let mut failed = false;
    for (r, &e) in reports.iter().zip(list(&cfg.eps, "eps")?) {
        match r {
            Ok(r) => {
                failed |= r.outcome == fd::OracleOutcome::Disagree;
                t.push(oracle_row(r));
            }
            Err(msg) => {
                failed = true;
                let mut row: Vec<Cell> = vec![e.into(), "error".into()];
                row.extend((2..13).map(|_| Cell::F(f64::NAN)));
                row.push(msg.clone().into());
                t.push(row);
            }
        }
    }
    Ok(Outcome {
        table: t,
        summary: json!({}),
        exit: failure_exit(failed),
    })
}

pub fn sample_plan(quick: bool) -> SamplePlan {
    if quick {
        SamplePlan::new((1e-12, 0.36), (1e-8, 1e12), 25, 81)
    } else {
        SamplePlan::default()
    }
}

pub const INEQ_COLUMNS: [&str; 8] = [
    "inequality",
    "s",
    "c_emp",
    "c_emp_refined",
    "rel_change",
    "argmax_alpha",
    "argmax_r",
    "samples",
];

pub fn inequality_label(which: KernelInequality) -> &'static str {
    match which {
        KernelInequality::I => "i",
        KernelInequality::II => "ii",
        KernelInequality::III => "iii",
    }
}

pub fn ineq_table(s_list: &[f64], plan: &SamplePlan) -> Result<Table, CmdError> {
    let mut jobs: Vec<(KernelInequality, f64)> = Vec::new();
    for &s in s_list {
        jobs.push((KernelInequality::I, s));
        jobs.push((KernelInequality::II, s));
    }
    jobs.push((KernelInequality::III, 2.0));
    let fine = plan.refined();
    let mut t = Table::new(&INEQ_COLUMNS);
    for (which, s) in jobs {
        let a = lemma_ineq_constant(which, s, plan).map_err(|e| ConfigError::new("s", e.to_string()))?;
        let b = lemma_ineq_constant(which, s, &fine).map_err(|e| ConfigError::new("s", e.to_string()))?;
        t.push(vec![
            inequality_label(which).into(),
            s.into(),
            a.c_emp.into(),
            b.c_emp.into(),
            ((b.c_emp - a.c_emp) / a.c_emp).abs().into(),
            b.argmax_alpha.into(),
            b.argmax_r.into(),
            b.samples.into(),
        ]);
    }
    Ok(t)
}

fn lemma_ineq(cfg: &RunConfig) -> Result<Outcome, CmdError> {
    let plan = sample_plan(cfg.quick);
    let t = ineq_table(list(&cfg.s, "s")?, &plan)?;
    Ok(Outcome {
        table: t,
        summary: json!({"sample_plan_version": SamplePlan::VERSION}),
        exit: Exit::Success,
    })
}

pub fn mnorm_table(v: &Potential, cfg: &RunConfig, s_list: &[f64], alphas: &[f64]) -> Result<Table, CmdError> {
    let grid = cfg.grid_for(v)?;
    let mut t = Table::new(&["s", "alpha", "m_norm", "norm_ratio", "form_ratio"]);
    for &s in s_list {
        let curve = m_norm_curve(v, &grid, s, alphas).map_err(|e| CmdError::Numeric(e.to_string()))?;
        for p in curve {
            t.push(vec![s.into(), p.alpha.into(), p.m_norm.into(), p.norm_ratio.into(), p.form_ratio.into()]);
        }
    }
    Ok(t)
}

fn lemma_mnorm(cfg: &RunConfig) -> Result<Outcome, CmdError> {
    let v = cfg.potential.build().map_err(|e| e.with_prefix("potential"))?;
    let t = mnorm_table(&v, cfg, list(&cfg.s, "s")?, list(&cfg.alpha, "alpha")?)?;
    Ok(Outcome {
        table: t,
        summary: json!({}),
        exit: Exit::Success,
    })
}

fn verify_paper(cfg: &RunConfig) -> Result<Outcome, CmdError> {
    let settings = verify::Settings {
        quick: cfg.quick,
        seed: cfg.seed,
    };
    let report = verify::run_suite(&settings);
    let table = report.table();
    let all = report.all_passed();
    Ok(Outcome {
        table,
        summary: json!({
            "passed": report.criteria.iter().filter(|c| c.passed).count(),
            "failed": report.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect::<Vec<_>>(),
            "seconds": report.criteria.iter().map(|c| json!({"id": c.id, "seconds": c.seconds})).collect::<Vec<_>>(),
        }),
        exit: if all { Exit::Success } else { Exit::Acceptance },
    })
}
