//! Finite-difference oracle for the lowest eigenvalue of `-Δ - εV` on a
//! square with Dirichlet walls.
//!
//! The grid is a tensor product of one 1-D node set. It is either uniform or
//! graded: uniform on a core covering the support of `V`, then geometrically
//! coarser out to the wall, which is what lets a box of many decay lengths
//! stay small. The 1-D operator is the finite-volume three-point
//! discretization, symmetrized with the dual-cell lengths, so the 2-D matrix
//! `H = T ⊗ I + I ⊗ T - ε V̄` is symmetric. `V̄` holds averages of `V` over the
//! dual cells.
//!
//! The eigenpair comes from shifted inverse iteration. Each inner solve uses
//! conjugate gradients preconditioned by `(T ⊗ I + I ⊗ T - σ)^{-1}`, which is
//! applied exactly through the eigenvectors of `T`.

use crate::linalg::{self, dot, norm2, Matrix};
use crate::math::{exp, ln, sqrt};
use crate::potential::Potential;
use crate::weakcoupling::{EigenSolveResult, SolveStatus};
use alloc::vec;
use alloc::vec::Vec;

/// Decay lengths of the bound state between the origin and the wall.
pub const DECAY_LENGTHS: f64 = 10.0;
/// Largest matrix dimension attempted.
pub const MAX_DIMENSION: usize = 250_000;
/// Smallest `|λ|` for which a box is sized.
pub const MIN_ABS_LAMBDA: f64 = 1e-12;
/// Outer iteration cap.
pub const MAX_OUTER: usize = 5000;
/// Relative residual `‖Hv - λv‖ / ‖v‖` accepted as converged.
pub const RESIDUAL_TOL: f64 = 1e-8;

const MAX_INNER: usize = 4000;
const SUBSAMPLES: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FdError {
    #[error("lambda estimate must be negative, got {0}")]
    LambdaEstimate(f64),
    #[error("safety factor must be at least 1, got {0}")]
    Safety(f64),
    #[error("oracle out of range: {0}")]
    OutOfRange(&'static str),
    #[error("invalid grid: {0}")]
    Grid(&'static str),
    #[error("no convergence after {iterations} iterations; residual history {history:?}")]
    NoConvergence { iterations: usize, history: Vec<f64> },
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

/// `L = safety · 10 / √(-λ)`.
pub fn size_box(lambda_estimate: f64, safety: f64) -> Result<f64, FdError> {
    if !(lambda_estimate < 0.0) {
        return Err(FdError::LambdaEstimate(lambda_estimate));
    }
    if !(safety >= 1.0) {
        return Err(FdError::Safety(safety));
    }
    if -lambda_estimate < MIN_ABS_LAMBDA {
        return Err(FdError::OutOfRange("|lambda| below 1e-12; the box would not fit"));
    }
    Ok(safety * DECAY_LENGTHS / sqrt(-lambda_estimate))
}

/// Node placement along each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisSpec {
    /// `n` interior points, `h = 2L/(n+1)`.
    Uniform { n: usize },
    /// Spacing `h0` on `|x| ≤ core`, then growing by `ratio` per cell.
    Graded { core: f64, h0: f64, ratio: f64 },
}

#[derive(Debug, Clone)]
pub struct FdProblem<'a> {
    pub potential: &'a Potential,
    pub epsilon: f64,
    /// `L`; the box is `[-L, L]²`.
    pub half_width: f64,
    pub axis: AxisSpec,
    /// Each level halves every spacing.
    pub refinement: u32,
}

impl<'a> FdProblem<'a> {
    pub fn uniform(potential: &'a Potential, epsilon: f64, half_width: f64, n: usize) -> Self {
        Self {
            potential,
            epsilon,
            half_width,
            axis: AxisSpec::Uniform { n },
            refinement: 0,
        }
    }

    /// Graded grid whose core covers the potential's support (or `[-1, 1]`
    /// when the support is unbounded) with twelve cells per support radius.
    pub fn graded(potential: &'a Potential, epsilon: f64, half_width: f64) -> Self {
        let r = potential.support_radius().unwrap_or(1.0);
        Self {
            potential,
            epsilon,
            half_width,
            axis: AxisSpec::Graded {
                core: 1.2 * r,
                h0: r / 12.0,
                ratio: 1.2,
            },
            refinement: 0,
        }
    }

    pub fn refined(&self) -> Self {
        Self {
            refinement: self.refinement + 1,
            ..self.clone()
        }
    }

    /// Node positions along one axis including both walls.
    pub fn axis_points(&self) -> Result<Vec<f64>, FdError> {
        let l = self.half_width;
        if !(l > 0.0 && l.is_finite()) {
            return Err(FdError::Grid("half width must be positive"));
        }
        let mut pts = match self.axis {
            AxisSpec::Uniform { n } => {
                if n < 1 {
                    return Err(FdError::Grid("need at least one interior point"));
                }
                let h = 2.0 * l / (n + 1) as f64;
                (0..n + 2).map(|i| -l + i as f64 * h).collect()
            }
            AxisSpec::Graded { core, h0, ratio } => {
                if !(h0 > 0.0 && ratio >= 1.0 && core >= 0.0) {
                    return Err(FdError::Grid("graded axis needs h0 > 0, ratio ≥ 1"));
                }
                let mut half = vec![0.0];
                let mut x = 0.0;
                let mut h = h0;
                while x < l {
                    if x + 1e-12 >= core {
                        h *= ratio;
                    }
                    x += h;
                    if l - x < 0.5 * h {
                        break;
                    }
                    half.push(x);
                    if half.len() > MAX_DIMENSION {
                        return Err(FdError::OutOfRange("graded axis too long"));
                    }
                }
                half.push(l);
                let mut out: Vec<f64> = half.iter().rev().map(|x| -x).collect();
                out.extend_from_slice(&half[1..]);
                out
            }
        };
        for _ in 0..self.refinement {
            let mut fine = Vec::with_capacity(2 * pts.len());
            for w in pts.windows(2) {
                fine.push(w[0]);
                fine.push(0.5 * (w[0] + w[1]));
            }
            fine.push(*pts.last().unwrap_or(&l));
            pts = fine;
        }
        Ok(pts)
    }

    /// Interior points per axis.
    pub fn n(&self) -> Result<usize, FdError> {
        Ok(self.axis_points()?.len() - 2)
    }

    pub fn dimension(&self) -> Result<usize, FdError> {
        let n = self.n()?;
        Ok(n * n)
    }
}

/// Lowest eigenpair data from [`smallest_eigenvalue`].
#[derive(Debug, Clone, PartialEq)]
pub struct FdEigen {
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
    pub inner_iterations: usize,
    pub n: usize,
    pub history: Vec<f64>,
}

struct Discrete {
    n: usize,
    /// `T = D^{-1/2} K D^{-1/2}`: diagonal and off-diagonal.
    diag: Vec<f64>,
    off: Vec<f64>,
    /// Eigenvectors of `T` (columns) and eigenvalues.
    psi: Matrix,
    mu: Vec<f64>,
    /// `ε V̄` on the grid, row-major `(ix, iy)`.
    ev: Vec<f64>,
    x: Vec<f64>,
}

fn discretize(p: &FdProblem) -> Result<Discrete, FdError> {
    let pts = p.axis_points()?;
    let n = pts.len() - 2;
    if n * n > MAX_DIMENSION {
        return Err(FdError::OutOfRange("matrix dimension above 250000"));
    }
    let x: Vec<f64> = pts[1..=n].to_vec();
    let hl: Vec<f64> = (1..=n).map(|i| pts[i] - pts[i - 1]).collect();
    let hr: Vec<f64> = (1..=n).map(|i| pts[i + 1] - pts[i]).collect();
    let dual: Vec<f64> = (0..n).map(|i| 0.5 * (hl[i] + hr[i])).collect();
    let diag: Vec<f64> = (0..n).map(|i| (1.0 / hl[i] + 1.0 / hr[i]) / dual[i]).collect();
    let off: Vec<f64> = (0..n.saturating_sub(1))
        .map(|i| -1.0 / (hr[i] * sqrt(dual[i] * dual[i + 1])))
        .collect();
    let t = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            diag[i]
        } else if j == i + 1 {
            off[i]
        } else if i == j + 1 {
            off[j]
        } else {
            0.0
        }
    });
    let eig = linalg::symmetric_eigen(&t, true)?;
    let psi = eig.vectors.ok_or(FdError::Grid("eigenvectors missing"))?;

    let lo: Vec<f64> = (0..n).map(|i| x[i] - 0.5 * hl[i]).collect();
    let hi: Vec<f64> = (0..n).map(|i| x[i] + 0.5 * hr[i]).collect();
    let reach = p.potential.support_radius().unwrap_or(f64::INFINITY);
    let mut ev = vec![0.0; n * n];
    if p.epsilon != 0.0 {
        for ix in 0..n {
            let gx = if lo[ix] > 0.0 { lo[ix] } else if hi[ix] < 0.0 { -hi[ix] } else { 0.0 };
            if gx >= reach {
                continue;
            }
            for iy in 0..n {
                let gy = if lo[iy] > 0.0 { lo[iy] } else if hi[iy] < 0.0 { -hi[iy] } else { 0.0 };
                if gx * gx + gy * gy >= reach * reach {
                    continue;
                }
                ev[ix * n + iy] = p.epsilon * cell_average(p.potential, lo[ix], hi[ix], lo[iy], hi[iy]);
            }
        }
    }
    Ok(Discrete {
        n,
        diag,
        off,
        psi,
        mu: eig.values,
        ev,
        x,
    })
}

fn cell_average(v: &Potential, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let k = SUBSAMPLES;
    let mut s = 0.0;
    for a in 0..k {
        let x = x0 + (x1 - x0) * (a as f64 + 0.5) / k as f64;
        for b in 0..k {
            let y = y0 + (y1 - y0) * (b as f64 + 0.5) / k as f64;
            s += v.evaluate(crate::grid::Point2::new(x, y));
        }
    }
    s / (k * k) as f64
}

impl Discrete {
    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = self.n;
        for ix in 0..n {
            for iy in 0..n {
                let k = ix * n + iy;
                let mut s = (self.diag[ix] + self.diag[iy] - self.ev[k]) * u[k];
                if ix > 0 {
                    s += self.off[ix - 1] * u[k - n];
                }
                if ix + 1 < n {
                    s += self.off[ix] * u[k + n];
                }
                if iy > 0 {
                    s += self.off[iy - 1] * u[k - 1];
                }
                if iy + 1 < n {
                    s += self.off[iy] * u[k + 1];
                }
                out[k] = s;
            }
        }
    }

    /// `Ψ^T X Ψ` (forward) or `Ψ X Ψ^T` for `X` stored row-major.
    fn transform(&self, x: &[f64], forward: bool, tmp: &mut [f64], out: &mut [f64]) {
        let n = self.n;
        let psi = self.psi.as_slice();
        // tmp = op(Ψ) X
        tmp.iter_mut().for_each(|t| *t = 0.0);
        for i in 0..n {
            let trow = &mut tmp[i * n..(i + 1) * n];
            for k in 0..n {
                let c = if forward { psi[k * n + i] } else { psi[i * n + k] };
                if c != 0.0 {
                    let xrow = &x[k * n..(k + 1) * n];
                    for (t, xv) in trow.iter_mut().zip(xrow) {
                        *t += c * xv;
                    }
                }
            }
        }
        // out = tmp op(Ψ)^T
        out.iter_mut().for_each(|t| *t = 0.0);
        for i in 0..n {
            let trow = &tmp[i * n..(i + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let c = trow[k];
                if c != 0.0 {
                    if forward {
                        let prow = &psi[k * n..(k + 1) * n];
                        for (o, pv) in orow.iter_mut().zip(prow) {
                            *o += c * pv;
                        }
                    } else {
                        for j in 0..n {
                            orow[j] += c * psi[j * n + k];
                        }
                    }
                }
            }
        }
    }

    fn precondition(&self, r: &[f64], sigma: f64, tmp: &mut [f64], mid: &mut [f64], out: &mut [f64]) {
        let n = self.n;
        self.transform(r, true, tmp, mid);
        for i in 0..n {
            for j in 0..n {
                mid[i * n + j] /= self.mu[i] + self.mu[j] - sigma;
            }
        }
        self.transform(mid, false, tmp, out);
    }
}

enum Inner {
    Solved(Vec<f64>, usize),
    Indefinite,
}

/// PCG for `(H - σ) y = b`; reports negative curvature.
fn pcg(d: &Discrete, sigma: f64, b: &[f64], tol: f64) -> Inner {
    let m = b.len();
    let mut y = vec![0.0; m];
    let mut r = b.to_vec();
    let mut z = vec![0.0; m];
    let mut tmp = vec![0.0; m];
    let mut mid = vec![0.0; m];
    d.precondition(&r, sigma, &mut tmp, &mut mid, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; m];
    let mut rz = dot(&r, &z);
    let bnorm = norm2(b);
    for it in 1..=MAX_INNER {
        d.apply(&p, &mut ap);
        for (a, q) in ap.iter_mut().zip(&p) {
            *a -= sigma * q;
        }
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Inner::Indefinite;
        }
        let a = rz / pap;
        for i in 0..m {
            y[i] += a * p[i];
            r[i] -= a * ap[i];
        }
        if norm2(&r) <= tol * bnorm {
            return Inner::Solved(y, it);
        }
        d.precondition(&r, sigma, &mut tmp, &mut mid, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    Inner::Solved(y, MAX_INNER)
}

/// Lowest eigenvalue of the discretized `-Δ - εV`. `estimate` (negative)
/// seeds the shift and the start vector.
pub fn smallest_eigenvalue(p: &FdProblem, estimate: Option<f64>) -> Result<FdEigen, FdError> {
    let d = discretize(p)?;
    let n = d.n;
    let m = n * n;
    let floor = -d.ev.iter().fold(0.0f64, |a, &b| a.max(b));
    // λ ≥ -ε max V̄⁺ + λ_min(T ⊗ I + I ⊗ T), so this shift starts below λ.
    let mut sigma = match estimate {
        Some(e) if e < 0.0 => 2.0 * e,
        _ => floor + 2.0 * d.mu[0] - 1e-3 * (1.0 + floor.abs()),
    };
    let kappa = estimate.filter(|e| *e < 0.0).map_or(0.0, |e| sqrt(-e));
    let mut v: Vec<f64> = (0..m)
        .map(|k| {
            let (x, y) = (d.x[k / n], d.x[k % n]);
            exp(-kappa * sqrt(x * x + y * y)) * d.psi[(k / n, 0)].abs().max(1e-300) * d.psi[(k % n, 0)].abs().max(1e-300)
        })
        .collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut history = Vec::new();
    let mut w = vec![0.0; m];
    let mut inner_total = 0;
    for outer in 1..=MAX_OUTER {
        let y = match pcg(&d, sigma, &v, 1e-11) {
            Inner::Solved(y, its) => {
                inner_total += its;
                y
            }
            Inner::Indefinite => {
                sigma -= sigma.abs().max(1e-12);
                continue;
            }
        };
        let ny = norm2(&y);
        v = y.into_iter().map(|x| x / ny).collect();
        d.apply(&v, &mut w);
        let rho = dot(&v, &w);
        let res = sqrt(w.iter().zip(&v).map(|(a, b)| (a - rho * b) * (a - rho * b)).sum::<f64>());
        history.push(res);
        if res <= RESIDUAL_TOL {
            return Ok(FdEigen {
                lambda: rho,
                residual: res,
                iterations: outer,
                inner_iterations: inner_total,
                n,
                history,
            });
        }
        let candidate = rho - 2.0 * res - 1e-3 * rho.abs();
        if candidate > sigma {
            sigma = candidate;
        }
    }
    Err(FdError::NoConvergence {
        iterations: MAX_OUTER,
        history,
    })
}

/// What the oracle concluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OracleOutcome {
    /// Both solvers found a bound state and were compared.
    Compared,
    /// Neither solver finds a bound state.
    AgreeOnAbsence,
    /// One solver finds a bound state and the other does not.
    Disagree,
    /// The finite-difference problem is infeasible at desk scale.
    OutOfRange,
}

impl OracleOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            OracleOutcome::Compared => "compared",
            OracleOutcome::AgreeOnAbsence => "agree_on_absence",
            OracleOutcome::Disagree => "disagree",
            OracleOutcome::OutOfRange => "oracle_out_of_range",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossReport {
    pub epsilon: f64,
    pub outcome: OracleOutcome,
    pub lambda_bs: f64,
    pub ln_lambda_bs: f64,
    pub half_width: f64,
    pub lambda_fd_coarse: f64,
    pub lambda_fd_fine: f64,
    /// Richardson value `(4 λ_fine - λ_coarse) / 3`.
    pub lambda_fd: f64,
    /// `|λ_fine - λ_coarse| / 3`.
    pub fd_error_estimate: f64,
    /// `|ln(-λ_BS) - ln(-λ_FD)| / |ln(-λ_FD)|`.
    pub rel_diff_ln: f64,
    pub n_coarse: usize,
    pub n_fine: usize,
    pub residual: f64,
    pub note: &'static str,
}

impl CrossReport {
    fn empty(epsilon: f64, bs: &EigenSolveResult) -> Self {
        Self {
            epsilon,
            outcome: OracleOutcome::OutOfRange,
            lambda_bs: bs.lambda,
            ln_lambda_bs: bs.ln_lambda,
            half_width: f64::NAN,
            lambda_fd_coarse: f64::NAN,
            lambda_fd_fine: f64::NAN,
            lambda_fd: f64::NAN,
            fd_error_estimate: f64::NAN,
            rel_diff_ln: f64::NAN,
            n_coarse: 0,
            n_fine: 0,
            residual: f64::NAN,
            note: "",
        }
    }
}

/// Graded-grid finite differences at `n` and `2n`, extrapolated, against a
/// Birman–Schwinger result. `safety` scales the box.
pub fn cross_validate(v: &Potential, epsilon: f64, bs: &EigenSolveResult, safety: f64) -> Result<CrossReport, FdError> {
    let mut rep = CrossReport::empty(epsilon, bs);
    if bs.status != SolveStatus::Found {
        // Look for a bound state the Birman–Schwinger route missed.
        let l = 20.0 * v.support_radius().unwrap_or(1.0);
        let p = FdProblem::graded(v, epsilon, l);
        let fine = p.refined();
        if fine.dimension()? > MAX_DIMENSION {
            rep.note = "fine grid above dimension cap";
            return Ok(rep);
        }
        let c = smallest_eigenvalue(&p, None)?;
        let f = smallest_eigenvalue(&fine, None)?;
        let err = (f.lambda - c.lambda).abs() / 3.0;
        rep.half_width = l;
        rep.lambda_fd_coarse = c.lambda;
        rep.lambda_fd_fine = f.lambda;
        rep.lambda_fd = (4.0 * f.lambda - c.lambda) / 3.0;
        rep.fd_error_estimate = err;
        rep.n_coarse = c.n;
        rep.n_fine = f.n;
        rep.residual = f.residual;
        rep.outcome = if rep.lambda_fd < -10.0 * err {
            OracleOutcome::Disagree
        } else {
            OracleOutcome::AgreeOnAbsence
        };
        return Ok(rep);
    }
    let l = match size_box(bs.lambda, safety) {
        Ok(l) => l.max(2.0 * v.support_radius().unwrap_or(1.0)),
        Err(FdError::OutOfRange(why)) => {
            rep.note = why;
            return Ok(rep);
        }
        Err(e) => return Err(e),
    };
    let p = FdProblem::graded(v, epsilon, l);
    let fine = p.refined();
    match fine.dimension() {
        Ok(dim) if dim <= MAX_DIMENSION => {}
        Ok(_) | Err(FdError::OutOfRange(_)) => {
            rep.half_width = l;
            rep.note = "fine grid above dimension cap";
            return Ok(rep);
        }
        Err(e) => return Err(e),
    }
    let c = smallest_eigenvalue(&p, Some(bs.lambda))?;
    let f = smallest_eigenvalue(&fine, Some(c.lambda))?;
    let ext = (4.0 * f.lambda - c.lambda) / 3.0;
    rep.half_width = l;
    rep.lambda_fd_coarse = c.lambda;
    rep.lambda_fd_fine = f.lambda;
    rep.lambda_fd = ext;
    rep.fd_error_estimate = (f.lambda - c.lambda).abs() / 3.0;
    rep.n_coarse = c.n;
    rep.n_fine = f.n;
    rep.residual = f.residual;
    if ext < 0.0 {
        let ln_fd = ln(-ext);
        rep.rel_diff_ln = (bs.ln_lambda - ln_fd).abs() / ln_fd.abs();
        rep.outcome = OracleOutcome::Compared;
    } else {
        rep.outcome = OracleOutcome::Disagree;
        rep.note = "finite differences find no bound state";
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{powi, sin, PI};

    #[test]
    fn box_sizes() {
        assert_eq!(size_box(-1.0, 1.0).unwrap(), 10.0);
        assert!((size_box(-0.01, 1.0).unwrap() - 100.0).abs() < 1e-12);
        assert!(size_box(-1e-3, 1.0).unwrap() < size_box(-1e-4, 1.0).unwrap());
        assert!(size_box(0.0, 1.0).is_err());
        assert!(size_box(-1.0, 0.5).is_err());
        let tiny = -exp(-4.0 / 0.05);
        assert!(matches!(size_box(tiny, 1.0), Err(FdError::OutOfRange(_))));
    }

    #[test]
    fn free_dirichlet_square() {
        let v = Potential::disk(1.0, 1.0).unwrap();
        let l = PI / 2.0;
        let n = 40;
        let p = FdProblem::uniform(&v, 0.0, l, n);
        let e = smallest_eigenvalue(&p, None).unwrap();
        let h = 2.0 * l / (n + 1) as f64;
        let discrete = 2.0 * 4.0 / (h * h) * powi(sin(PI * h / (4.0 * l)), 2);
        let exact = 2.0 * (PI / (2.0 * l)) * (PI / (2.0 * l));
        assert!((e.lambda - discrete).abs() < 1e-9);
        // O(h²) bound: λ (π h / 2L)² / 12 per axis.
        let bound = exact * powi(PI * h / (2.0 * l), 2) / 12.0;
        assert!((e.lambda - exact).abs() <= 1.01 * bound);
        assert!(e.residual <= RESIDUAL_TOL);
    }

    #[test]
    fn graded_axis_symmetric_and_refines() {
        let v = Potential::disk(1.0, 1.0).unwrap();
        let p = FdProblem::graded(&v, 0.5, 50.0);
        let pts = p.axis_points().unwrap();
        assert_eq!(pts[0], -50.0);
        assert_eq!(*pts.last().unwrap(), 50.0);
        for (a, b) in pts.iter().zip(pts.iter().rev()) {
            assert!((a + b).abs() < 1e-12);
        }
        let f = p.refined().axis_points().unwrap();
        assert_eq!(f.len(), 2 * pts.len() - 1);
    }

    #[test]
    fn disk_box_independence() {
        let v = Potential::disk(1.0, 1.0).unwrap();
        let est = -exp(-3.63 / 0.5);
        let l = size_box(est, 1.0).unwrap();
        let a = smallest_eigenvalue(&FdProblem::graded(&v, 0.5, l), Some(est)).unwrap();
        let b = smallest_eigenvalue(&FdProblem::graded(&v, 0.5, 1.5 * l), Some(est)).unwrap();
        assert!(a.lambda < 0.0);
        assert!(((a.lambda - b.lambda) / b.lambda).abs() < 0.01);
    }

    #[test]
    fn monotone_in_epsilon() {
        let v = Potential::disk(1.0, 1.0).unwrap();
        let l = 40.0;
        let mut prev = f64::NEG_INFINITY;
        for &eps in &[2.0, 1.5, 1.0] {
            let e = smallest_eigenvalue(&FdProblem::graded(&v, eps, l), None).unwrap();
            assert!(e.lambda > prev);
            prev = e.lambda;
        }
    }
}
