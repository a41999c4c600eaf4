//! Nyström discretization of the Birman–Schwinger operator
//! `Q(α) = |V|^{1/2} (-Δ + α²)^{-1} V^{1/2}` and of its split
//! `Q = L + M` with the rank-one part `L = g(α) |V|^{1/2} ⟨V^{1/2}, ·⟩`.
//!
//! Every matrix is stored as a symmetric core `A[i][j] = b_i k(x_i, x_j) b_j`
//! with `b_i = √w_i |V(x_i)|^{1/2}` plus the node signs `S = diag(sgn V)`;
//! the operator itself is `A S`. Since `S` is orthogonal on the support of
//! `V`, `‖A S‖ = ‖A‖`.
//!
//! On a polar grid with a radial potential the matrix commutes with the
//! rotations that permute the shared angles, so it splits into one
//! `n_r × n_r` block per angular Fourier mode. [`BsOperator`] uses those
//! blocks when it can; `L` lives entirely in mode 0.

use crate::grid::Grid2D;
use crate::linalg::{self, dot, LinalgError, Lu, Matrix};
use crate::math::{cos, hypot, sin, sqrt, TAU};
use crate::potential::Potential;
use crate::specfun::{self, g_of_alpha};
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BsError {
    #[error("alpha must be positive and finite, got {0}")]
    Alpha(f64),
    #[error("epsilon must be positive and finite, got {0}")]
    Epsilon(f64),
    #[error("node {index} at ({x}, {y}) lies on a singular point of the potential")]
    SingularNode { index: usize, x: f64, y: f64 },
    #[error("nodes {i} and {j} coincide")]
    DuplicateNode { i: usize, j: usize },
    #[error("potential is {value} at node {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("M too large: ε‖M(α)‖ = {scaled_norm} ≥ 1 (α = {alpha}, ε = {epsilon})")]
    MTooLarge {
        alpha: f64,
        epsilon: f64,
        scaled_norm: f64,
    },
    #[error("operation needs kind Q")]
    NeedsQ,
    #[error("radial block form needs a radial potential on an unpruned polar grid")]
    NotRadial,
    #[error("eigenvalue {re} + {im}i is not real")]
    ComplexEigenvalue { re: f64, im: f64 },
    #[error("k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which kernel a matrix carries: `𝒢` for `Q`, `𝒢 - g(α)` for `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BsKind {
    Q,
    M,
}

/// Nodal data shared by every discretization: `b`, signs and validity.
struct Nodal {
    b: Vec<f64>,
    sign: Vec<f64>,
}

fn nodal(v: &Potential, grid: &Grid2D) -> Result<Nodal, BsError> {
    let singular = v.singular_points();
    let mut b = Vec::with_capacity(grid.len());
    let mut sign = Vec::with_capacity(grid.len());
    for (index, (p, w)) in grid.nodes.iter().zip(&grid.weights).enumerate() {
        if singular.iter().any(|s| s.dist(*p) == 0.0) {
            return Err(BsError::SingularNode { index, x: p.x, y: p.y });
        }
        let val = v.evaluate(*p);
        if !val.is_finite() {
            return Err(BsError::NonFinite { index, value: val });
        }
        b.push(sqrt(w * val.abs()));
        sign.push(if val > 0.0 {
            1.0
        } else if val < 0.0 {
            -1.0
        } else {
            0.0
        });
    }
    Ok(Nodal { b, sign })
}

fn check_alpha(alpha: f64) -> Result<(), BsError> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(BsError::Alpha(alpha))
    }
}

fn check_epsilon(eps: f64) -> Result<(), BsError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(BsError::Epsilon(eps))
    }
}

fn kernel(kind: BsKind, r: f64, alpha: f64) -> f64 {
    match kind {
        BsKind::M => specfun::green_minus_g(r, alpha),
        BsKind::Q => specfun::green_minus_g(r, alpha) + g_of_alpha(alpha),
    }
}

fn cell_kernel(kind: BsKind, rho: f64, alpha: f64) -> f64 {
    match kind {
        BsKind::M => specfun::green_cell_avg_minus_g(rho, alpha),
        BsKind::Q => specfun::green_cell_avg_minus_g(rho, alpha) + g_of_alpha(alpha),
    }
}

/// Dense Nyström matrix of `Q(α)` or `M(α)` on a grid.
#[derive(Debug, Clone)]
pub struct BsMatrix {
    pub alpha: f64,
    pub kind: BsKind,
    /// `sgn V(x_i)`.
    pub sign_vec: Vec<f64>,
    /// `√w_i |V(x_i)|^{1/2}`.
    pub b_vec: Vec<f64>,
    /// Symmetric core `b_i k_ij b_j`; the matrix is `sym · diag(sign_vec)`.
    pub sym: Matrix,
}

impl BsMatrix {
    pub fn assemble(v: &Potential, grid: &Grid2D, alpha: f64, kind: BsKind) -> Result<Self, BsError> {
        check_alpha(alpha)?;
        let Nodal { b, sign } = nodal(v, grid)?;
        let n = grid.len();
        let mut sym = Matrix::zeros(n, n);
        for i in 0..n {
            if b[i] == 0.0 {
                continue;
            }
            sym[(i, i)] = b[i] * b[i] * cell_kernel(kind, grid.cell_radius[i], alpha);
            for j in i + 1..n {
                if b[j] == 0.0 {
                    continue;
                }
                let r = grid.nodes[i].dist(grid.nodes[j]);
                if r == 0.0 {
                    return Err(BsError::DuplicateNode { i, j });
                }
                let a = b[i] * kernel(kind, r, alpha) * b[j];
                sym[(i, j)] = a;
                sym[(j, i)] = a;
            }
        }
        Ok(Self {
            alpha,
            kind,
            sign_vec: sign,
            b_vec: b,
            sym,
        })
    }

    pub fn len(&self) -> usize {
        self.b_vec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b_vec.is_empty()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.sym[(i, j)] * self.sign_vec[j]
    }

    pub fn entries(&self) -> Matrix {
        let mut m = self.sym.clone();
        m.scale_columns(&self.sign_vec);
        m
    }

    /// `c_i = √w_i V^{1/2}(x_i) = b_i sgn V(x_i)`.
    pub fn c_vec(&self) -> Vec<f64> {
        self.b_vec.iter().zip(&self.sign_vec).map(|(b, s)| b * s).collect()
    }

    /// Frobenius norm, the Nyström value of `‖Q(α)‖_HS`.
    pub fn hs_norm(&self) -> Result<f64, BsError> {
        if self.kind != BsKind::Q {
            return Err(BsError::NeedsQ);
        }
        Ok(self.sym.frobenius_norm())
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> Result<f64, BsError> {
        let active = active_indices(&self.b_vec);
        Ok(linalg::symmetric_spectral_norm(&self.sym.select(&active))?)
    }

    pub fn top_spectrum(&self, k: usize) -> Result<SpectralSummary, BsError> {
        if k == 0 {
            return Err(BsError::ZeroK);
        }
        let active = active_indices(&self.b_vec);
        let a = self.sym.select(&active);
        let s: Vec<f64> = active.iter().map(|&i| self.sign_vec[i]).collect();
        let mut top = top_signed_eigenvalues(&a, &s, k)?;
        // Nodes where V vanishes contribute zero eigenvalues.
        if active.len() < self.len() {
            top.extend(core::iter::repeat(0.0).take(k));
            top.sort_by(|x, y| y.total_cmp(x));
            top.truncate(k);
        }
        top.resize(k, 0.0);
        Ok(SpectralSummary {
            top_eigenvalues: top,
            hs_norm: self.sym.frobenius_norm(),
            alpha: self.alpha,
        })
    }
}

fn active_indices(b: &[f64]) -> Vec<usize> {
    (0..b.len()).filter(|&i| b[i] != 0.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    /// Descending.
    pub top_eigenvalues: Vec<f64>,
    pub hs_norm: f64,
    pub alpha: f64,
}

/// Imaginary parts below this (relative to the spectral radius) count as
/// rounding noise.
pub const IMAG_TOL: f64 = 1e-8;

const DENSE_EIGEN_LIMIT: usize = 384;

/// Largest `k` eigenvalues of `A S` for symmetric `A` and `S = diag(±1)`,
/// descending. Fewer than `k` are returned only when `A` is smaller.
fn top_signed_eigenvalues(a: &Matrix, s: &[f64], k: usize) -> Result<Vec<f64>, BsError> {
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mixed = s.iter().any(|x| *x < 0.0);
    let mut vals = if !mixed {
        symmetric_top(a, k)?
    } else {
        match linalg::cholesky(a) {
            // A S = L Lᵀ S is similar to Lᵀ S L.
            Ok(l) => {
                let mut ls = l.clone();
                for i in 0..n {
                    for j in 0..n {
                        ls[(i, j)] *= s[i];
                    }
                }
                let c = Matrix::from_fn(n, n, |i, j| {
                    let mut acc = 0.0;
                    for r in i.max(j)..n {
                        acc += l[(r, i)] * ls[(r, j)];
                    }
                    acc
                });
                symmetric_top(&c, k)?
            }
            Err(_) => {
                let mut m = a.clone();
                m.scale_columns(s);
                let ev = linalg::general_eigenvalues(&m)?;
                let radius = ev.iter().fold(0.0f64, |r, (re, im)| r.max(hypot(*re, *im)));
                let mut out = Vec::with_capacity(n);
                for (re, im) in ev {
                    if im.abs() > IMAG_TOL * radius.max(1.0) {
                        return Err(BsError::ComplexEigenvalue { re, im });
                    }
                    out.push(re);
                }
                out
            }
        }
    };
    vals.sort_by(|x, y| y.total_cmp(x));
    vals.truncate(k);
    Ok(vals)
}

fn symmetric_top(a: &Matrix, k: usize) -> Result<Vec<f64>, BsError> {
    let n = a.rows();
    if n <= DENSE_EIGEN_LIMIT {
        Ok(linalg::symmetric_eigen(a, false)?.values)
    } else {
        let steps = n.min(120.max(6 * k));
        let mut ritz = linalg::lanczos_ritz(n, steps, |x, y| a.mul_vec_into(x, y))?;
        ritz.sort_by(|x, y| y.total_cmp(x));
        ritz.truncate(k);
        Ok(ritz)
    }
}

/// How the operator is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Discretization {
    /// Radial blocks when the grid and potential allow it, else dense.
    #[default]
    Auto,
    Dense,
    /// Angular Fourier blocks on a polar grid.
    Radial,
}

/// `Q(α)` and `M(α)` at one `α`, in whichever representation applies.
///
/// The reduced space carries mode 0 of a radial discretization (or all nodes
/// for a dense one). Vectors constant in angle have squared norm `ν Σ y_i²`
/// with `ν = n_θ`, so inner products there pick up the factor `ν`.
#[derive(Debug, Clone)]
pub struct BsOperator {
    alpha: f64,
    g: f64,
    nodes: usize,
    form: Discretization,
    nu: f64,
    b: Vec<f64>,
    sign: Vec<f64>,
    /// Symmetric core of `M` on the reduced space.
    m0: Matrix,
    /// Symmetric cores of modes `m ≥ 1` (equal for `Q` and `M`) with their
    /// multiplicities.
    modes: Vec<(Matrix, usize)>,
    hs: f64,
}

impl BsOperator {
    pub fn new(v: &Potential, grid: &Grid2D, alpha: f64, form: Discretization) -> Result<Self, BsError> {
        check_alpha(alpha)?;
        let radial_ok = v.is_radial() && grid.polar.is_some();
        match form {
            Discretization::Radial if !radial_ok => Err(BsError::NotRadial),
            Discretization::Radial => Self::radial(v, grid, alpha),
            Discretization::Auto if radial_ok => Self::radial(v, grid, alpha),
            _ => Self::dense(v, grid, alpha),
        }
    }

    fn dense(v: &Potential, grid: &Grid2D, alpha: f64) -> Result<Self, BsError> {
        let m = BsMatrix::assemble(v, grid, alpha, BsKind::M)?;
        let active = active_indices(&m.b_vec);
        let g = g_of_alpha(alpha);
        let b: Vec<f64> = active.iter().map(|&i| m.b_vec[i]).collect();
        let sign: Vec<f64> = active.iter().map(|&i| m.sign_vec[i]).collect();
        let m0 = m.sym.select(&active);
        let mut hs2 = 0.0;
        for i in 0..b.len() {
            for j in 0..b.len() {
                let q = m0[(i, j)] + g * b[i] * b[j];
                hs2 += q * q;
            }
        }
        Ok(Self {
            alpha,
            g,
            nodes: grid.len(),
            form: Discretization::Dense,
            nu: 1.0,
            b,
            sign,
            m0,
            modes: Vec::new(),
            hs: sqrt(hs2),
        })
    }

    fn radial(v: &Potential, grid: &Grid2D, alpha: f64) -> Result<Self, BsError> {
        let layout = grid.polar.as_ref().ok_or(BsError::NotRadial)?;
        let n_theta = layout.n_theta;
        let n_r = layout.n_r();
        let g = g_of_alpha(alpha);
        let mut rings = Vec::new();
        let mut b = Vec::new();
        let mut sign = Vec::new();
        for i in 0..n_r {
            let r = layout.ring_radius[i];
            let val = v.radial_value(r);
            if !val.is_finite() {
                return Err(BsError::NonFinite {
                    index: i * n_theta,
                    value: val,
                });
            }
            if val != 0.0 {
                rings.push(i);
                b.push(sqrt(layout.ring_weight(i) * val.abs()));
                sign.push(if val > 0.0 { 1.0 } else { -1.0 });
            }
        }
        let na = rings.len();
        let half = n_theta / 2;
        // d and n_θ - d give the same distance; fold them.
        let fold: Vec<f64> = (0..=half)
            .map(|d| if d == 0 || 2 * d == n_theta { 1.0 } else { 2.0 })
            .collect();
        let cosines: Vec<Vec<f64>> = (0..=half)
            .map(|m| (0..=half).map(|d| cos(TAU * (m * d) as f64 / n_theta as f64)).collect())
            .collect();
        let mut blocks: Vec<Matrix> = (0..=half).map(|_| Matrix::zeros(na, na)).collect();
        let mut hs2 = 0.0;
        let mut kap = vec![0.0; half + 1];
        for ia in 0..na {
            let ri = layout.ring_radius[rings[ia]];
            for ja in ia..na {
                let rj = layout.ring_radius[rings[ja]];
                for d in 0..=half {
                    kap[d] = if ia == ja && d == 0 {
                        let rho = sqrt(layout.ring_weight(rings[ia]) / crate::math::PI);
                        specfun::green_cell_avg_minus_g(rho, alpha)
                    } else {
                        let phi = TAU * d as f64 / n_theta as f64;
                        let dist = hypot(ri - rj * cos(phi), rj * sin(phi));
                        specfun::green_minus_g(dist, alpha)
                    };
                }
                let bb = b[ia] * b[ja];
                let mut h = 0.0;
                for d in 0..=half {
                    let q = bb * (kap[d] + g);
                    h += fold[d] * q * q;
                }
                hs2 += if ia == ja { h } else { 2.0 * h };
                for (m, block) in blocks.iter_mut().enumerate() {
                    let cm = &cosines[m];
                    let mut s = 0.0;
                    for d in 0..=half {
                        s += fold[d] * kap[d] * cm[d];
                    }
                    block[(ia, ja)] = bb * s;
                    block[(ja, ia)] = bb * s;
                }
            }
        }
        let mut it = blocks.into_iter();
        let m0 = it.next().unwrap_or_else(|| Matrix::zeros(na, na));
        let modes = it
            .enumerate()
            .map(|(k, blk)| {
                let m = k + 1;
                (blk, if 2 * m == n_theta { 1 } else { 2 })
            })
            .collect();
        Ok(Self {
            alpha,
            g,
            nodes: grid.len(),
            form: Discretization::Radial,
            nu: n_theta as f64,
            b,
            sign,
            m0,
            modes,
            hs: sqrt(n_theta as f64 * hs2),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    /// `Dense` or `Radial`, never `Auto`.
    pub fn discretization(&self) -> Discretization {
        self.form
    }

    fn c(&self) -> Vec<f64> {
        self.b.iter().zip(&self.sign).map(|(b, s)| b * s).collect()
    }

    /// `Σ w_i V(x_i)`, the grid value of `∫V`.
    pub fn u_discrete(&self) -> f64 {
        self.nu * dot(&self.b, &self.c())
    }

    /// `‖L(α)‖ = |g(α)| Σ w_i |V(x_i)|`.
    pub fn l_norm(&self) -> f64 {
        self.g.abs() * self.nu * dot(&self.b, &self.b)
    }

    /// Frobenius norm of `Q(α)`.
    pub fn hs_norm(&self) -> f64 {
        self.hs
    }

    /// Operator norm of `M(α)`.
    pub fn m_norm(&self) -> Result<f64, BsError> {
        let mut best = linalg::symmetric_spectral_norm(&self.m0)?;
        for (blk, _) in &self.modes {
            best = best.max(linalg::symmetric_spectral_norm(blk)?);
        }
        Ok(best)
    }

    fn q0(&self) -> Matrix {
        let n = self.b.len();
        let gn = self.g * self.nu;
        Matrix::from_fn(n, n, |i, j| self.m0[(i, j)] + gn * self.b[i] * self.b[j])
    }

    /// Largest `k` eigenvalues of `Q(α)` with multiplicity, descending.
    pub fn q_eigenvalues(&self, k: usize) -> Result<Vec<f64>, BsError> {
        if k == 0 {
            return Err(BsError::ZeroK);
        }
        let mut all = top_signed_eigenvalues(&self.q0(), &self.sign, k)?;
        for (blk, mult) in &self.modes {
            for x in top_signed_eigenvalues(blk, &self.sign, k)? {
                for _ in 0..*mult {
                    all.push(x);
                }
            }
        }
        let reduced: usize = self.b.len() * (1 + self.modes.iter().map(|m| m.1).sum::<usize>());
        if reduced < self.nodes {
            all.extend(core::iter::repeat(0.0).take(k));
        }
        all.sort_by(|x, y| y.total_cmp(x));
        all.truncate(k);
        all.resize(k, 0.0);
        Ok(all)
    }

    /// Applies the reduced `M` to `x`.
    fn m_apply(&self, x: &[f64]) -> Vec<f64> {
        let sx: Vec<f64> = x.iter().zip(&self.sign).map(|(a, s)| a * s).collect();
        self.m0.mul_vec(&sx)
    }

    fn resolvent(&self, eps: f64) -> Result<Lu, BsError> {
        let n = self.b.len();
        let a = Matrix::from_fn(n, n, |i, j| {
            let d = if i == j { 1.0 } else { 0.0 };
            d - eps * self.m0[(i, j)] * self.sign[j]
        });
        Ok(Lu::factor(a)?)
    }

    fn check_small(&self, eps: f64) -> Result<f64, BsError> {
        check_epsilon(eps)?;
        let norm = self.m_norm()?;
        if eps * norm >= 1.0 {
            return Err(BsError::MTooLarge {
                alpha: self.alpha,
                epsilon: eps,
                scaled_norm: eps * norm,
            });
        }
        Ok(norm)
    }

    /// `Λ_ε(α) = 1 - ε g(α) ⟨(I - εM)^{-1} b, c⟩`, requiring `ε‖M‖ < 1`.
    pub fn lambda(&self, eps: f64) -> Result<f64, BsError> {
        self.check_small(eps)?;
        self.lambda_unchecked(eps)
    }

    /// `Λ_ε(α)` without the norm precondition.
    pub fn lambda_unchecked(&self, eps: f64) -> Result<f64, BsError> {
        check_epsilon(eps)?;
        if self.b.is_empty() {
            return Ok(1.0);
        }
        let y = self.resolvent(eps)?.solve(&self.b);
        Ok(1.0 - eps * self.g * self.nu * dot(&y, &self.c()))
    }

    /// `⟨M b, c⟩`.
    pub fn mb_c(&self) -> f64 {
        let mb = self.m_apply(&self.b);
        self.nu * dot(&mb, &self.c())
    }

    /// `(ε²⟨Mb, c⟩, ε³⟨(I - εM)^{-1} M² b, c⟩)`. Their sum times `g(α)`
    /// equals `1 - Λ_ε(α) - ε g(α) U_h` with `U_h` from [`Self::u_discrete`].
    pub fn remainder(&self, eps: f64) -> Result<(f64, f64), BsError> {
        self.check_small(eps)?;
        if self.b.is_empty() {
            return Ok((0.0, 0.0));
        }
        let c = self.c();
        let mb = self.m_apply(&self.b);
        let first = eps * eps * self.nu * dot(&mb, &c);
        let mmb = self.m_apply(&mb);
        let y = self.resolvent(eps)?.solve(&mmb);
        let second = eps * eps * eps * self.nu * dot(&y, &c);
        Ok((first, second))
    }
}

/// `Λ_ε(α)` on a grid (dense or radial blocks as available).
pub fn lambda_form(v: &Potential, grid: &Grid2D, alpha: f64, epsilon: f64) -> Result<f64, BsError> {
    BsOperator::new(v, grid, alpha, Discretization::Auto)?.lambda(epsilon)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationReport {
    pub alpha: f64,
    pub epsilon: f64,
    pub lambda: f64,
    /// `min |1 - μ|` over the eigenvalues `μ` of `εQ(α)`.
    pub eig_distance: f64,
    pub m_norm: f64,
}

/// Compares `|Λ_ε(α)|` with the distance of the spectrum of `εQ(α)` from 1.
pub fn factorization_check(
    v: &Potential,
    grid: &Grid2D,
    alpha: f64,
    epsilon: f64,
) -> Result<FactorizationReport, BsError> {
    let op = BsOperator::new(v, grid, alpha, Discretization::Auto)?;
    factorization_check_op(&op, epsilon)
}

pub fn factorization_check_op(op: &BsOperator, epsilon: f64) -> Result<FactorizationReport, BsError> {
    let m_norm = op.check_small(epsilon)?;
    let lambda = op.lambda_unchecked(epsilon)?;
    let eigs = op.q_eigenvalues(8)?;
    let eig_distance = eigs.iter().map(|mu| (1.0 - epsilon * mu).abs()).fold(f64::INFINITY, f64::min);
    Ok(FactorizationReport {
        alpha: op.alpha(),
        epsilon,
        lambda,
        eig_distance,
        m_norm,
    })
}

/// One row of [`m_norm_curve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MNormPoint {
    pub alpha: f64,
    pub m_norm: f64,
    /// `‖M‖² / |g|^{2-s}`.
    pub norm_ratio: f64,
    /// `|⟨Mb, c⟩| / |g|^{1-s}`.
    pub form_ratio: f64,
}

pub fn m_norm_curve(v: &Potential, grid: &Grid2D, s: f64, alphas: &[f64]) -> Result<Vec<MNormPoint>, BsError> {
    alphas
        .iter()
        .map(|&alpha| {
            let op = BsOperator::new(v, grid, alpha, Discretization::Auto)?;
            let m_norm = op.m_norm()?;
            let g = op.g().abs();
            Ok(MNormPoint {
                alpha,
                m_norm,
                norm_ratio: m_norm * m_norm / crate::math::powf(g, 2.0 - s),
                form_ratio: op.mb_c().abs() / crate::math::powf(g, 1.0 - s),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_cartesian, build_polar};

    fn zero() -> Potential {
        Potential::disk(1.0, 0.0).unwrap()
    }

    #[test]
    fn zero_potential() {
        let g = build_polar(1.0, 8, 8, 1.0).unwrap();
        let m = BsMatrix::assemble(&zero(), &g, 0.5, BsKind::Q).unwrap();
        assert_eq!(m.sym.max_abs(), 0.0);
        assert_eq!(m.hs_norm().unwrap(), 0.0);
        assert_eq!(m.top_spectrum(3).unwrap().top_eigenvalues, vec![0.0; 3]);
        for form in [Discretization::Dense, Discretization::Radial] {
            let op = BsOperator::new(&zero(), &g, 0.01, form).unwrap();
            assert_eq!(op.lambda(0.7).unwrap(), 1.0);
            assert_eq!(op.remainder(0.7).unwrap(), (0.0, 0.0));
            let f = factorization_check_op(&op, 0.7).unwrap();
            assert_eq!(f.eig_distance, 1.0);
        }
        let curve = m_norm_curve(&zero(), &g, 0.0, &[1e-2, 1e-4]).unwrap();
        assert!(curve.iter().all(|p| p.m_norm == 0.0 && p.form_ratio == 0.0));
    }

    #[test]
    fn one_node() {
        let g = build_cartesian(0.5, 2).unwrap().pruned(|p| p.x > 0.0 && p.y > 0.0);
        let v = Potential::disk(1.0, 2.0).unwrap();
        for &alpha in &[0.1, 1.0, 7.0] {
            let m = BsMatrix::assemble(&v, &g, alpha, BsKind::Q).unwrap();
            let expect = g.weights[0] * 2.0 * specfun::green_cell_avg(g.cell_radius[0], alpha).unwrap();
            assert!((m.entry(0, 0) - expect).abs() < 1e-14 * expect.abs());
            let top = m.top_spectrum(1).unwrap().top_eigenvalues[0];
            assert!((top - m.entry(0, 0)).abs() < 1e-14 * expect.abs());
        }
    }

    #[test]
    fn symmetric_for_positive_potential() {
        let g = build_cartesian(3.0, 16).unwrap();
        let v = Potential::gaussian(1.0).unwrap();
        let m = BsMatrix::assemble(&v, &g, 0.8, BsKind::Q).unwrap();
        assert!(m.entries().max_asymmetry() <= 1e-14);
    }

    #[test]
    fn q_minus_m_is_rank_one() {
        let g = build_polar(2.0, 10, 12, 1.0).unwrap();
        let v = Potential::annulus_signed(1.0, 2.0, 1.0, -0.2).unwrap();
        let alpha = 0.03;
        let q = BsMatrix::assemble(&v, &g, alpha, BsKind::Q).unwrap();
        let m = BsMatrix::assemble(&v, &g, alpha, BsKind::M).unwrap();
        let c = q.c_vec();
        let ga = g_of_alpha(alpha);
        let mut worst: f64 = 0.0;
        for i in 0..q.len() {
            for j in 0..q.len() {
                let d = q.entry(i, j) - m.entry(i, j) - ga * q.b_vec[i] * c[j];
                worst = worst.max(d.abs());
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn rank_one_norm_is_g_times_l1() {
        let g = build_polar(1.0, 32, 32, 1.0).unwrap();
        let v = Potential::disk(1.0, 1.0).unwrap();
        let op = BsOperator::new(&v, &g, 1e-3, Discretization::Radial).unwrap();
        let expect = g_of_alpha(1e-3) * crate::math::PI;
        assert!((op.l_norm() - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn radial_blocks_match_dense() {
        let g = build_polar(2.0, 8, 10, 1.2).unwrap();
        for v in [
            Potential::disk(1.5, 1.0).unwrap(),
            Potential::annulus_signed(1.0, 2.0, 1.0, -0.2).unwrap(),
            Potential::v_zero(),
        ] {
            let alpha = 0.01;
            let d = BsOperator::new(&v, &g, alpha, Discretization::Dense).unwrap();
            let r = BsOperator::new(&v, &g, alpha, Discretization::Radial).unwrap();
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
            assert!(rel(r.hs_norm(), d.hs_norm()) < 1e-12);
            assert!(rel(r.m_norm().unwrap(), d.m_norm().unwrap()) < 1e-10);
            assert!(rel(r.u_discrete(), d.u_discrete()) < 1e-12);
            assert!(rel(r.mb_c(), d.mb_c()) < 1e-10);
            let eps = 0.3;
            assert!((r.lambda(eps).unwrap() - d.lambda(eps).unwrap()).abs() < 1e-12);
            let (a1, a2) = r.remainder(eps).unwrap();
            let (b1, b2) = d.remainder(eps).unwrap();
            assert!(rel(a1, b1) < 1e-10 && (a2 - b2).abs() < 1e-12);
            let er = r.q_eigenvalues(6).unwrap();
            let ed = d.q_eigenvalues(6).unwrap();
            for (x, y) in er.iter().zip(&ed) {
                assert!((x - y).abs() < 1e-10 * ed[0].abs(), "{er:?} {ed:?}");
            }
        }
    }

    #[test]
    fn lambda_at_alpha_one_and_small_eps() {
        let g = build_polar(1.0, 16, 16, 1.0).unwrap();
        let v = Potential::disk(1.0, 1.0).unwrap();
        let op = BsOperator::new(&v, &g, 1.0, Discretization::Auto).unwrap();
        assert_eq!(op.lambda(0.5).unwrap(), 1.0);
        let op = BsOperator::new(&v, &g, 1e-3, Discretization::Auto).unwrap();
        assert!((op.lambda(1e-9).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn m_too_large() {
        let g = build_polar(1.0, 16, 16, 1.0).unwrap();
        let v = Potential::disk(1.0, 1.0).unwrap();
        let op = BsOperator::new(&v, &g, 1e-3, Discretization::Auto).unwrap();
        let eps = 2.0 / op.m_norm().unwrap();
        assert!(matches!(op.lambda(eps), Err(BsError::MTooLarge { .. })));
    }

    #[test]
    fn remainder_reconciles() {
        let g = build_polar(5.3, 24, 24, 1.0).unwrap();
        let v = Potential::gaussian(1.0).unwrap();
        let mut state = 12345u64;
        let mut uniform = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..10 {
            let alpha = crate::math::exp(-1.0 - 20.0 * uniform());
            let eps = 0.05 + 0.4 * uniform();
            let op = BsOperator::new(&v, &g, alpha, Discretization::Auto).unwrap();
            let (a, b) = op.remainder(eps).unwrap();
            let lam = op.lambda(eps).unwrap();
            let lhs = 1.0 - lam - eps * op.g() * op.u_discrete();
            assert!((op.g() * (a + b) - lhs).abs() < 1e-10, "{alpha} {eps}");
        }
    }

    #[test]
    fn hs_norm_decreases_with_alpha() {
        let g = build_polar(1.0, 32, 32, 1.0).unwrap();
        let v = Potential::disk(1.0, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for &a in &[0.1, 1.0, 10.0, 50.0] {
            let h = BsOperator::new(&v, &g, a, Discretization::Auto).unwrap().hs_norm();
            assert!(h < prev);
            prev = h;
        }
    }

    #[test]
    fn top_eigenvalue_grows_as_alpha_falls() {
        let g = build_polar(1.0, 24, 24, 1.0).unwrap();
        let v = Potential::disk(1.0, 1.0).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for &a in &[1.0, 0.1, 0.01] {
            let m = BsMatrix::assemble(&v, &g, a, BsKind::Q).unwrap();
            let top = m.top_spectrum(1).unwrap().top_eigenvalues[0];
            assert!(top > prev);
            prev = top;
        }
    }

    #[test]
    fn signed_spectrum_is_real() {
        let g = build_polar(2.0, 12, 12, 1.0).unwrap();
        let v = Potential::annulus_signed(1.0, 2.0, 1.0, -0.6).unwrap();
        let m = BsMatrix::assemble(&v, &g, 0.2, BsKind::Q).unwrap();
        let top = m.top_spectrum(5).unwrap();
        let general = linalg::general_eigenvalues(&m.entries()).unwrap();
        let mut re: Vec<f64> = general.iter().map(|x| x.0).collect();
        re.sort_by(|x, y| y.total_cmp(x));
        for (a, b) in top.top_eigenvalues.iter().zip(&re) {
            assert!((a - b).abs() < 1e-10);
        }
        let sq: f64 = top.top_eigenvalues.iter().map(|x| x * x).sum();
        assert!(sq <= top.hs_norm * top.hs_norm * (1.0 + 1e-12));
    }

    #[test]
    fn singular_node_rejected() {
        let g = build_cartesian(0.3, 3).unwrap();
        let e = BsMatrix::assemble(&Potential::v_zero(), &g, 0.5, BsKind::Q);
        assert!(matches!(e, Err(BsError::SingularNode { .. })));
    }

    #[test]
    fn m_ratios_fall_for_disk() {
        let g = build_polar(1.0, 32, 32, 1.0).unwrap();
        let v = Potential::disk(1.0, 1.0).unwrap();
        let c = m_norm_curve(&v, &g, 0.0, &[1e-2, 1e-4, 1e-6, 1e-8]).unwrap();
        for w in c.windows(2) {
            assert!(w[1].norm_ratio < w[0].norm_ratio);
            assert!(w[1].form_ratio < w[0].form_ratio);
        }
        assert!(c.iter().all(|p| p.norm_ratio > 0.0 && p.form_ratio > 0.0));
    }
}
