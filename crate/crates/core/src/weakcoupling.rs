//! The weakly coupled eigenvalue `λ_ε = -α²` as the zero of `Λ_ε(α)`.
//!
//! Roots are located in the coordinate `t` of
//! `α(t) = exp(-2π(1 + t) / (Uε))`, in which `Λ_ε(α(t)) ≈ -t` and the
//! predictor `ln(-λ_ε) ≈ -4π / (Uε)` corresponds to `t = 0`.

use crate::bsop::{BsError, BsOperator, Discretization};
use crate::grid::Grid2D;
use crate::math::{exp, ln, PI, TAU};
use crate::potential::{Potential, PotentialError};
use alloc::vec::Vec;

pub use crate::specfun::g_of_alpha;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WcError {
    #[error("theorem hypothesis ∫V > 0 violated (U = {0})")]
    Hypothesis(f64),
    #[error("epsilon must be positive and finite, got {0}")]
    Epsilon(f64),
    #[error("t = {0} outside [-1/2, 1/2]")]
    TRange(f64),
    #[error(transparent)]
    Bs(#[from] BsError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// Half-width of the default bracket in `t`.
pub const T_BRACKET: f64 = 0.5;
/// Half-width of the single expanded bracket.
pub const T_BRACKET_WIDE: f64 = 0.9;
/// Smallest `α` treated as representable.
pub const ALPHA_FLOOR: f64 = 1e-300;

/// `exp(-2π(1 + t) / (Uε))`. `wide` admits `|t|` up to
/// [`T_BRACKET_WIDE`].
pub fn alpha_of_t(t: f64, epsilon: f64, u: f64, wide: bool) -> Result<f64, WcError> {
    if !(u > 0.0) {
        return Err(WcError::Hypothesis(u));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(WcError::Epsilon(epsilon));
    }
    let lim = if wide { T_BRACKET_WIDE } else { T_BRACKET };
    if !(t.abs() <= lim) {
        return Err(WcError::TRange(t));
    }
    Ok(exp(ln_alpha_of_t(t, epsilon, u)))
}

fn ln_alpha_of_t(t: f64, epsilon: f64, u: f64) -> f64 {
    -TAU * (1.0 + t) / (u * epsilon)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Found,
    NoRoot,
    PreconditionFailed,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Found => "found",
            SolveStatus::NoRoot => "no_root",
            SolveStatus::PreconditionFailed => "precondition_failed",
        }
    }
}

/// Outcome of [`WeakCoupling::find_root`]. Numeric fields are NaN unless
/// `status` is `Found`; `predictor` is always set.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolveResult {
    pub epsilon: f64,
    pub u: f64,
    pub t_root: f64,
    pub alpha_root: f64,
    /// `-alpha_root²` (may underflow to `-0`; `ln_lambda` does not).
    pub lambda: f64,
    pub ln_lambda: f64,
    /// `-4π / (Uε)`.
    pub predictor: f64,
    pub rel_dev: f64,
    /// `|1 - εμ₂|` for the second largest eigenvalue `μ₂` of `Q(α_root)`.
    pub bs_gap: f64,
    /// `min |1 - εμ|` over the eigenvalues of `Q(α_root)`.
    pub eig_distance: f64,
    pub m_norm_at_root: f64,
    /// `|Λ_ε(α_root)|`.
    pub lambda_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Why the search stopped without a root.
    pub note: &'static str,
}

impl EigenSolveResult {
    fn failed(epsilon: f64, u: f64, status: SolveStatus, note: &'static str) -> Self {
        Self {
            epsilon,
            u,
            t_root: f64::NAN,
            alpha_root: f64::NAN,
            lambda: f64::NAN,
            ln_lambda: f64::NAN,
            predictor: -4.0 * PI / (u * epsilon),
            rel_dev: f64::NAN,
            bs_gap: f64::NAN,
            eig_distance: f64::NAN,
            m_norm_at_root: f64::NAN,
            lambda_residual: f64::NAN,
            iterations: 0,
            status,
            note,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub epsilon: f64,
    pub lambda: f64,
    pub ln_lambda: f64,
    pub predictor: f64,
    pub rel_dev: f64,
    /// `ε ln(-λ_ε)`.
    pub eps_times_ln: f64,
    pub status: SolveStatus,
}

impl From<&EigenSolveResult> for SweepRecord {
    fn from(r: &EigenSolveResult) -> Self {
        Self {
            epsilon: r.epsilon,
            lambda: r.lambda,
            ln_lambda: r.ln_lambda,
            predictor: r.predictor,
            rel_dev: r.rel_dev,
            eps_times_ln: r.epsilon * r.ln_lambda,
            status: r.status,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Bracket width in `t` at which the search stops.
    pub t_tol: f64,
    /// `|Λ|` at which the search stops early.
    pub lambda_tol: f64,
    pub max_iter: usize,
    pub discretization: Discretization,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            t_tol: 1e-10,
            lambda_tol: 1e-12,
            max_iter: 200,
            discretization: Discretization::Auto,
        }
    }
}

/// A potential on a fixed grid with `U = ∫V` resolved once.
#[derive(Debug, Clone)]
pub struct WeakCoupling<'a> {
    pub potential: &'a Potential,
    pub grid: &'a Grid2D,
    pub u: f64,
    pub options: RootOptions,
}

enum Probe {
    Value(f64),
    Precondition(&'static str),
}

impl<'a> WeakCoupling<'a> {
    /// `U` is the closed form when known, else the quadrature value.
    pub fn new(potential: &'a Potential, grid: &'a Grid2D, options: RootOptions) -> Result<Self, WcError> {
        let u = potential.integral_u()?.value;
        Ok(Self::with_u(potential, grid, u, options))
    }

    pub fn with_u(potential: &'a Potential, grid: &'a Grid2D, u: f64, options: RootOptions) -> Self {
        Self {
            potential,
            grid,
            u,
            options,
        }
    }

    pub fn operator(&self, alpha: f64) -> Result<BsOperator, WcError> {
        Ok(BsOperator::new(self.potential, self.grid, alpha, self.options.discretization)?)
    }

    fn probe(&self, t: f64, eps: f64) -> Result<Probe, WcError> {
        let la = ln_alpha_of_t(t, eps, self.u);
        if la < ln(ALPHA_FLOOR) {
            return Ok(Probe::Precondition("alpha below representable range"));
        }
        let op = self.operator(exp(la))?;
        match op.lambda(eps) {
            Ok(v) => Ok(Probe::Value(v)),
            Err(BsError::MTooLarge { .. }) => Ok(Probe::Precondition("epsilon times norm of M reaches 1")),
            Err(e) => Err(e.into()),
        }
    }

    /// Root of `t ↦ Λ_ε(α(t))` on `[-1/2, 1/2]`, widened once to
    /// `[-0.9, 0.9]` when `Λ` does not change sign.
    pub fn find_root(&self, epsilon: f64) -> Result<EigenSolveResult, WcError> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(WcError::Epsilon(epsilon));
        }
        let probe0 = self.operator(1.0)?;
        if probe0.hs_norm() == 0.0 {
            return Ok(EigenSolveResult::failed(
                epsilon,
                self.u,
                SolveStatus::NoRoot,
                "potential vanishes on the grid",
            ));
        }
        if !(self.u > 0.0) {
            return Err(WcError::Hypothesis(self.u));
        }
        let fail = |s, note| Ok(EigenSolveResult::failed(epsilon, self.u, s, note));
        let value = |t| -> Result<Result<f64, &'static str>, WcError> {
            Ok(match self.probe(t, epsilon)? {
                Probe::Value(v) => Ok(v),
                Probe::Precondition(n) => Err(n),
            })
        };
        let mut lo = -T_BRACKET;
        let mut hi = T_BRACKET;
        let (mut flo, mut fhi) = match (value(lo)?, value(0.0)?, value(hi)?) {
            (Ok(a), Ok(_), Ok(b)) => (a, b),
            (Err(n), ..) | (_, Err(n), _) | (.., Err(n)) => return fail(SolveStatus::PreconditionFailed, n),
        };
        if flo * fhi > 0.0 {
            lo = -T_BRACKET_WIDE;
            hi = T_BRACKET_WIDE;
            match (value(lo)?, value(hi)?) {
                (Ok(a), Ok(b)) => {
                    flo = a;
                    fhi = b;
                }
                (Err(n), _) | (_, Err(n)) => return fail(SolveStatus::PreconditionFailed, n),
            }
            if flo * fhi > 0.0 {
                return fail(SolveStatus::NoRoot, "no sign change on the widened bracket");
            }
        }
        let (t, iterations) = self.illinois(lo, hi, flo, fhi, epsilon)?;
        self.finish(epsilon, t, iterations)
    }

    /// Regula falsi with the Illinois weight halving. Stops when the step
    /// or the bracket falls below `t_tol`, or `|Λ| ≤ lambda_tol`.
    fn illinois(&self, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, eps: f64) -> Result<(f64, usize), WcError> {
        // The bracket ends and midpoint passed the norm check.
        let eval = |t: f64| -> Result<f64, WcError> {
            Ok(self
                .operator(exp(ln_alpha_of_t(t, eps, self.u)))?
                .lambda_unchecked(eps)?)
        };
        if fa == 0.0 {
            return Ok((a, 0));
        }
        if fb == 0.0 {
            return Ok((b, 0));
        }
        let mut last = f64::NAN;
        let mut iterations = 0;
        while iterations < self.options.max_iter {
            iterations += 1;
            let mut t = (a * fb - b * fa) / (fb - fa);
            if !(t > a.min(b) && t < a.max(b)) {
                t = 0.5 * (a + b);
            }
            let ft = eval(t)?;
            let step = (t - last).abs();
            last = t;
            if ft.abs() <= self.options.lambda_tol || step <= self.options.t_tol {
                return Ok((t, iterations));
            }
            if ft * fb < 0.0 {
                a = b;
                fa = fb;
            } else {
                fa *= 0.5;
            }
            b = t;
            fb = ft;
            if (b - a).abs() <= self.options.t_tol {
                return Ok((0.5 * (a + b), iterations));
            }
        }
        Ok((last, iterations))
    }

    fn finish(&self, epsilon: f64, t: f64, iterations: usize) -> Result<EigenSolveResult, WcError> {
        let la = ln_alpha_of_t(t, epsilon, self.u);
        let alpha = exp(la);
        let op = self.operator(alpha)?;
        let residual = op.lambda_unchecked(epsilon)?.abs();
        let m_norm = op.m_norm()?;
        let eigs = op.q_eigenvalues(2)?;
        let dist = |mu: f64| (1.0 - epsilon * mu).abs();
        let eig_distance = dist(eigs[0]).min(dist(eigs[1]));
        let bs_gap = dist(eigs[1]);
        let predictor = -4.0 * PI / (self.u * epsilon);
        let ln_lambda = 2.0 * la;
        Ok(EigenSolveResult {
            epsilon,
            u: self.u,
            t_root: t,
            alpha_root: alpha,
            lambda: -alpha * alpha,
            ln_lambda,
            predictor,
            rel_dev: (ln_lambda - predictor).abs() / predictor.abs(),
            bs_gap,
            eig_distance,
            m_norm_at_root: m_norm,
            lambda_residual: residual,
            iterations,
            status: SolveStatus::Found,
            note: "",
        })
    }

    /// `(ε²⟨Mb, c⟩, ε³⟨(I - εM)^{-1} M² b, c⟩)` at `α`.
    pub fn remainder_diagnostics(&self, epsilon: f64, alpha: f64) -> Result<(f64, f64), WcError> {
        Ok(self.operator(alpha)?.remainder(epsilon)?)
    }

    /// One [`SweepRecord`] per `ε`, in input order. A failed point yields a
    /// record with its status and never stops the sweep.
    pub fn sweep(&self, epsilons: &[f64]) -> Result<Vec<SweepRecord>, WcError> {
        let mut out = Vec::with_capacity(epsilons.len());
        for &eps in epsilons {
            let r = match self.find_root(eps) {
                Ok(r) => r,
                Err(WcError::Bs(_)) => EigenSolveResult::failed(
                    eps,
                    self.u,
                    SolveStatus::PreconditionFailed,
                    "operator evaluation failed",
                ),
                Err(e) => return Err(e),
            };
            out.push(SweepRecord::from(&r));
        }
        Ok(out)
    }

    /// `α` with `μ_max(εQ(α)) = 1` by bisection on `ln α`, for `V ≥ 0`.
    /// `μ_max` grows as `α` falls, so the bracket is the `α(t)` range.
    pub fn cross_route_alpha(&self, epsilon: f64) -> Result<Option<f64>, WcError> {
        if !(self.u > 0.0) {
            return Err(WcError::Hypothesis(self.u));
        }
        let top = |la: f64| -> Result<f64, WcError> { Ok(epsilon * self.operator(exp(la))?.q_eigenvalues(1)?[0] - 1.0) };
        let mut hi = ln_alpha_of_t(-T_BRACKET_WIDE, epsilon, self.u);
        let mut lo = ln_alpha_of_t(T_BRACKET_WIDE, epsilon, self.u).max(ln(ALPHA_FLOOR));
        let (fl, fh) = (top(lo)?, top(hi)?);
        if fl * fh > 0.0 {
            return Ok(None);
        }
        let rising_low = fl > 0.0;
        for _ in 0..200 {
            if hi - lo <= 1e-12 * hi.abs().max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let f = top(mid)?;
            if (f > 0.0) == rising_low {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some(exp(0.5 * (lo + hi))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_polar;

    #[test]
    fn g_values() {
        assert_eq!(g_of_alpha(1.0), 0.0);
        assert!((g_of_alpha(exp(-TAU)) - 1.0).abs() < 1e-15);
        assert!((g_of_alpha(exp(TAU)) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn substitution() {
        assert!((alpha_of_t(0.0, 1.0, TAU, false).unwrap() - exp(-1.0)).abs() < 1e-16);
        for &(eps, u) in &[(0.3, PI), (0.05, 2.0), (1.0, 0.1)] {
            let a = alpha_of_t(0.3, eps, u, false).unwrap();
            assert!((g_of_alpha(a) - 1.3 / (u * eps)).abs() <= 1e-12 * (1.3 / (u * eps)).max(1.0));
            let sup = alpha_of_t(-0.5, eps, u, false).unwrap();
            let g_sup = g_of_alpha(alpha_of_t(0.5, eps, u, false).unwrap());
            assert!(g_sup <= 1.5 / (u * eps) * (1.0 + 1e-14));
            assert!(alpha_of_t(-0.5, eps / 2.0, u, false).unwrap() < sup);
        }
        assert!(matches!(alpha_of_t(0.0, 0.3, -1.0, false), Err(WcError::Hypothesis(_))));
        assert!(alpha_of_t(0.7, 0.3, 1.0, false).is_err());
        assert!(alpha_of_t(0.7, 0.3, 1.0, true).is_ok());
    }

    fn disk_setup() -> (Potential, Grid2D) {
        (Potential::disk(1.0, 1.0).unwrap(), build_polar(1.0, 32, 32, 1.0).unwrap())
    }

    #[test]
    fn disk_root() {
        let (v, g) = disk_setup();
        let wc = WeakCoupling::new(&v, &g, RootOptions::default()).unwrap();
        let r3 = wc.find_root(0.3).unwrap();
        let r5 = wc.find_root(0.5).unwrap();
        assert_eq!(r3.status, SolveStatus::Found);
        assert!(((r3.ln_lambda + 4.0 / 0.3) / (4.0 / 0.3)).abs() < 0.25);
        assert!(r3.rel_dev < r5.rel_dev);
        assert_eq!(r3.lambda, -r3.alpha_root * r3.alpha_root);
        assert!(r3.lambda_residual <= 1e-10);
        assert!(r3.m_norm_at_root * 0.3 < 1.0);
        assert!(r3.bs_gap > 0.0);
        assert!(r3.eig_distance < 1e-6);
        let cross = wc.cross_route_alpha(0.3).unwrap().unwrap();
        assert!(((cross - r3.alpha_root) / r3.alpha_root).abs() < 1e-6);
    }

    #[test]
    fn zero_and_negative_potentials() {
        let g = build_polar(1.0, 8, 8, 1.0).unwrap();
        let zero = Potential::disk(1.0, 0.0).unwrap();
        let wc = WeakCoupling::new(&zero, &g, RootOptions::default()).unwrap();
        assert_eq!(wc.find_root(0.3).unwrap().status, SolveStatus::NoRoot);
        let neg = Potential::disk(1.0, -1.0).unwrap();
        let wc = WeakCoupling::new(&neg, &g, RootOptions::default()).unwrap();
        assert!(matches!(wc.find_root(0.3), Err(WcError::Hypothesis(_))));
    }

    #[test]
    fn bracket_signs() {
        let (v, g) = disk_setup();
        let wc = WeakCoupling::new(&v, &g, RootOptions::default()).unwrap();
        for &eps in &[0.4, 0.2, 0.1] {
            let lam = |t| wc.operator(alpha_of_t(t, eps, wc.u, false).unwrap()).unwrap().lambda(eps).unwrap();
            assert!(lam(-0.5) > 0.0 && lam(0.5) < 0.0);
        }
    }

    #[test]
    fn sweep_converges_to_minus_four() {
        let (v, g) = disk_setup();
        let wc = WeakCoupling::new(&v, &g, RootOptions::default()).unwrap();
        let recs = wc.sweep(&[0.5, 0.4, 0.3, 0.25, 0.2]).unwrap();
        let mut prev = f64::INFINITY;
        for r in &recs {
            assert_eq!(r.status, SolveStatus::Found);
            assert_eq!(r.eps_times_ln, r.epsilon * r.ln_lambda);
            let d = (r.eps_times_ln + 4.0).abs();
            assert!(d < prev);
            prev = d;
        }
        assert!(wc.sweep(&[]).unwrap().is_empty());
    }

    #[test]
    fn remainder_shrinks_along_sweep() {
        let (v, g) = disk_setup();
        let wc = WeakCoupling::new(&v, &g, RootOptions::default()).unwrap();
        let mut prev = f64::INFINITY;
        for &eps in &[0.4, 0.2, 0.1, 0.05] {
            let a = alpha_of_t(0.0, eps, wc.u, false).unwrap();
            let (r1, r2) = wc.remainder_diagnostics(eps, a).unwrap();
            let scaled = (r1 + r2).abs() / eps;
            assert!(scaled < prev);
            prev = scaled;
        }
        let zero = Potential::disk(1.0, 0.0).unwrap();
        let wc = WeakCoupling::with_u(&zero, &g, 1.0, RootOptions::default());
        assert_eq!(wc.remainder_diagnostics(0.3, 0.01).unwrap(), (0.0, 0.0));
    }
}
