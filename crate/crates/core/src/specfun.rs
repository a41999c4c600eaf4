//! Modified Bessel functions of the second kind and the 2-D free resolvent.
//!
//! `K0` and `K1` use the ascending series for `w ≤ 2` and Temme's continued
//! fraction (Steed's algorithm) above. The series are also used to evaluate
//! the cancellation-prone combinations `K0(w) + ln w` and `1 - w K1(w)`
//! directly, which the Birman–Schwinger assembly needs at tiny `α`.

use crate::math::{exp, ln, powf, sqrt, LN_2, PI, TAU};
use alloc::vec::Vec;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;

/// Arguments above this are reported as underflowed (`K0`, `K1` < 1e-306).
pub const UNDERFLOW_THRESHOLD: f64 = 705.0;

const SERIES_LIMIT: f64 = 2.0;
const CF_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SpecFnError {
    #[error("argument {0} is not a positive finite number")]
    Domain(f64),
    #[error("resolvent kernel is singular at zero separation; use the cell average on the diagonal")]
    Singular,
    #[error("exponent s = {0} outside [0, 2]")]
    Exponent(f64),
    #[error("sample plan yields no admissible samples")]
    EmptySamplePlan,
}

/// A Bessel value together with the underflow flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselValue {
    pub value: f64,
    pub underflow: bool,
}

fn check_arg(w: f64) -> Result<(), SpecFnError> {
    if w > 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(SpecFnError::Domain(w))
    }
}

/// `K0(w)` with domain checking and the underflow flag.
pub fn bessel_k0(w: f64) -> Result<BesselValue, SpecFnError> {
    check_arg(w)?;
    Ok(BesselValue {
        value: k0(w),
        underflow: w > UNDERFLOW_THRESHOLD,
    })
}

/// `K1(w)` with domain checking and the underflow flag.
pub fn bessel_k1(w: f64) -> Result<BesselValue, SpecFnError> {
    check_arg(w)?;
    Ok(BesselValue {
        value: k1(w),
        underflow: w > UNDERFLOW_THRESHOLD,
    })
}

/// Unchecked `K0`. Returns NaN for `w <= 0` and 0 past the underflow threshold.
pub fn k0(w: f64) -> f64 {
    if !(w > 0.0) {
        return f64::NAN;
    }
    if w <= SERIES_LIMIT {
        k0_plus_ln(w) - ln(w)
    } else if w > UNDERFLOW_THRESHOLD {
        0.0
    } else {
        steed_cf2(w).0
    }
}

/// Unchecked `K1`. Returns NaN for `w <= 0` and 0 past the underflow threshold.
pub fn k1(w: f64) -> f64 {
    if !(w > 0.0) {
        return f64::NAN;
    }
    if w <= SERIES_LIMIT {
        (1.0 - one_minus_x_k1(w)) / w
    } else if w > UNDERFLOW_THRESHOLD {
        0.0
    } else {
        steed_cf2(w).1
    }
}

/// `K0(w) + ln w`, accurate also as `w → 0` where it tends to `ln 2 - γ`.
pub fn k0_plus_ln(w: f64) -> f64 {
    if w > SERIES_LIMIT {
        return k0(w) + ln(w);
    }
    // K0 = -ln(w/2) I0 + Σ ψ(k+1) q^k/(k!)², q = w²/4.
    let q = 0.25 * w * w;
    let mut term = 1.0;
    let mut psi = -EULER_GAMMA;
    let mut psi_sum = psi;
    let mut tail = 0.0;
    for k in 1..64 {
        let kf = k as f64;
        term *= q / (kf * kf);
        psi += 1.0 / kf;
        psi_sum += psi * term;
        tail += term;
        if term < 1e-18 * (1.0 + tail) {
            break;
        }
    }
    psi_sum + LN_2 * (1.0 + tail) - ln(w) * tail
}

/// Series pieces shared by `K1` and the cell average:
/// `(Σ (ψ(k+1)+ψ(k+2)) t_k, Σ_{k≥1} t_k)` with `t_k = q^k / (k!(k+1)!)`.
fn k1_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let mut t = 1.0;
    let mut psi_a = -EULER_GAMMA;
    let mut psi_b = 1.0 - EULER_GAMMA;
    let mut psi_sum = psi_a + psi_b;
    let mut tail = 0.0;
    for k in 1..64 {
        let kf = k as f64;
        t *= q / (kf * (kf + 1.0));
        psi_a += 1.0 / kf;
        psi_b += 1.0 / (kf + 1.0);
        psi_sum += t * (psi_a + psi_b);
        tail += t;
        if t < 1e-18 * (1.0 + tail) {
            break;
        }
    }
    (psi_sum, tail)
}

/// `1 - x K1(x) = ∫₀ˣ t K0(t) dt`, without cancellation for small `x`.
pub fn one_minus_x_k1(x: f64) -> f64 {
    if x > SERIES_LIMIT {
        return 1.0 - x * k1(x);
    }
    let q = 0.25 * x * x;
    let (psi_sum, tail) = k1_series(x);
    q * (psi_sum - 2.0 * ln(0.5 * x) * (1.0 + tail))
}

/// `(2/x²)(1 - x K1(x)) + ln x`: the disk average of `K0` over radius `x`
/// (in units of `1/α`) plus `ln x`. Tends to `ln 2 - γ + 1/2` as `x → 0`.
pub fn cell_avg_plus_ln(x: f64) -> f64 {
    if x > SERIES_LIMIT {
        return 2.0 * one_minus_x_k1(x) / (x * x) + ln(x);
    }
    let (psi_sum, tail) = k1_series(x);
    0.5 * psi_sum + LN_2 * (1.0 + tail) - ln(x) * tail
}

/// Temme's CF2 for `(K0(x), K1(x))`, `x > 2`.
fn steed_cf2(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..CF_MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = sqrt(PI / (2.0 * x)) * exp(-x) / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// `g(α) = -ln(α) / (2π)`, the logarithmic part of the kernel.
#[inline]
pub fn g_of_alpha(alpha: f64) -> f64 {
    -ln(alpha) / TAU
}

/// Free resolvent kernel `K0(α r) / (2π)` of `-Δ + α²` on the plane.
pub fn green(r: f64, alpha: f64) -> Result<f64, SpecFnError> {
    if r == 0.0 {
        return Err(SpecFnError::Singular);
    }
    check_arg(r)?;
    check_arg(alpha)?;
    Ok(k0(alpha * r) / TAU)
}

/// Average of the resolvent kernel over a disk of radius `rho` centred at the
/// singularity: `(1/2π)(2/(αρ)²)(1 - αρ K1(αρ))`.
pub fn green_cell_avg(rho: f64, alpha: f64) -> Result<f64, SpecFnError> {
    check_arg(rho)?;
    check_arg(alpha)?;
    let x = alpha * rho;
    if x <= SERIES_LIMIT {
        Ok((cell_avg_plus_ln(x) - ln(x)) / TAU)
    } else {
        Ok(2.0 * one_minus_x_k1(x) / (x * x) / TAU)
    }
}

/// `𝒢(r; α) - g(α)`, the kernel of the remainder `M(α)`, evaluated without
/// forming the two large logarithms separately when `α r` is small.
pub fn green_minus_g(r: f64, alpha: f64) -> f64 {
    let w = alpha * r;
    if w <= SERIES_LIMIT {
        (k0_plus_ln(w) - ln(r)) / TAU
    } else {
        (k0(w) + ln(alpha)) / TAU
    }
}

/// Cell-averaged diagonal of the `M(α)` kernel.
pub fn green_cell_avg_minus_g(rho: f64, alpha: f64) -> f64 {
    let x = alpha * rho;
    if x <= SERIES_LIMIT {
        (cell_avg_plus_ln(x) - ln(rho)) / TAU
    } else {
        (2.0 * one_minus_x_k1(x) / (x * x) + ln(alpha)) / TAU
    }
}

/// The three kernel inequalities checked empirically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelInequality {
    /// `|𝒢 + lnα/2π|^s ≤ C (1 + |ln r|^s)`.
    I,
    /// `|𝒢 + lnα/2π|^s ≤ C |ln α|^s` when `α r ≥ 1`.
    II,
    /// `𝒢² ≤ C ((ln α)² + (ln r)²)`.
    III,
}

/// Deterministic log-spaced lattice over `α ∈ [alpha_min, alpha_max]` and
/// separations `r ∈ [r_min, r_max]`.
///
/// `refined()` maps `n ↦ 2n - 1` per axis so every refined lattice contains
/// the previous one exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub n_alpha: usize,
    pub n_r: usize,
}

impl SamplePlan {
    /// Bumped whenever the default lattice changes.
    pub const VERSION: u32 = 1;

    pub fn new(alpha_range: (f64, f64), r_range: (f64, f64), n_alpha: usize, n_r: usize) -> Self {
        Self {
            alpha_min: alpha_range.0,
            alpha_max: alpha_range.1,
            r_min: r_range.0,
            r_max: r_range.1,
            n_alpha,
            n_r,
        }
    }

    pub fn refined(&self) -> Self {
        Self {
            n_alpha: refine_count(self.n_alpha),
            n_r: refine_count(self.n_r),
            ..self.clone()
        }
    }

    pub fn alphas(&self) -> Vec<f64> {
        log_lattice(self.alpha_min, self.alpha_max, self.n_alpha)
    }

    pub fn radii(&self) -> Vec<f64> {
        log_lattice(self.r_min, self.r_max, self.n_r)
    }

    fn is_valid(&self) -> bool {
        self.n_alpha > 0
            && self.n_r > 0
            && self.alpha_min > 0.0
            && self.alpha_min <= self.alpha_max
            && self.alpha_max < 1.0 / crate::math::E
            && self.r_min > 0.0
            && self.r_min <= self.r_max
            && self.r_max.is_finite()
    }
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self::new((1e-12, 0.36), (1e-8, 1e12), 49, 161)
    }
}

fn refine_count(n: usize) -> usize {
    if n <= 1 {
        n
    } else {
        2 * n - 1
    }
}

fn log_lattice(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![lo];
    }
    let (a, b) = (ln(lo), ln(hi));
    let m = (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                exp(a + (i as f64 / m) * (b - a))
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub which: KernelInequality,
    pub s: f64,
    /// Empirical constant: maximum of LHS/RHS over the admissible samples.
    pub c_emp: f64,
    pub argmax_alpha: f64,
    pub argmax_r: f64,
    pub samples: usize,
}

/// Empirical constant of one kernel inequality over a sample plan.
pub fn lemma_ineq_constant(
    which: KernelInequality,
    s: f64,
    plan: &SamplePlan,
) -> Result<InequalityReport, SpecFnError> {
    if !(0.0..=2.0).contains(&s) {
        return Err(SpecFnError::Exponent(s));
    }
    if !plan.is_valid() {
        return Err(SpecFnError::EmptySamplePlan);
    }
    let radii = plan.radii();
    let mut best = InequalityReport {
        which,
        s,
        c_emp: f64::NEG_INFINITY,
        argmax_alpha: f64::NAN,
        argmax_r: f64::NAN,
        samples: 0,
    };
    for alpha in plan.alphas() {
        let ln_alpha = ln(alpha);
        for &r in &radii {
            let ln_r = ln(r);
            let ratio = match which {
                KernelInequality::I => {
                    powf(green_minus_g(r, alpha).abs(), s) / (1.0 + powf(ln_r.abs(), s))
                }
                KernelInequality::II => {
                    if alpha * r < 1.0 {
                        continue;
                    }
                    powf(green_minus_g(r, alpha).abs(), s) / powf(ln_alpha.abs(), s)
                }
                KernelInequality::III => {
                    let gr = k0(alpha * r) / TAU;
                    gr * gr / (ln_alpha * ln_alpha + ln_r * ln_r)
                }
            };
            best.samples += 1;
            if ratio > best.c_emp {
                best.c_emp = ratio;
                best.argmax_alpha = alpha;
                best.argmax_r = r;
            }
        }
    }
    if best.samples == 0 {
        return Err(SpecFnError::EmptySamplePlan);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::cosh;
    use crate::quad::{self, QuadOptions};

    const K0_AT_1: f64 = 0.421_024_438_240_708_34;
    const K1_AT_1: f64 = 0.601_907_230_197_234_6;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    /// Plain ascending series with `I0` in full, summed naively; only
    /// trustworthy for small arguments.
    fn k0_series_oracle(w: f64) -> f64 {
        let q = w * w / 4.0;
        let (mut i0, mut rest, mut term, mut h) = (1.0, 0.0, 1.0, 0.0);
        for k in 1..80 {
            let kf = k as f64;
            term *= q / (kf * kf);
            h += 1.0 / kf;
            i0 += term;
            rest += h * term;
        }
        -(ln(w / 2.0) + EULER_GAMMA) * i0 + rest
    }

    /// `K_ν(w) = ∫₀^∞ e^{-w cosh t} cosh(νt) dt` by the trapezoidal rule,
    /// which is spectrally accurate for this even, analytic integrand.
    fn k_integral_oracle(nu: f64, w: f64) -> f64 {
        let h = 0.02f64.min(0.2 / sqrt(w));
        let mut sum = 0.5;
        let mut t = h;
        loop {
            let f = exp(-w * (cosh(t) - 1.0)) * cosh(nu * t);
            sum += f;
            if f < 1e-18 * sum {
                break;
            }
            t += h;
        }
        sum * h * exp(-w)
    }

    #[test]
    fn k0_k1_at_one() {
        assert!(rel(k0(1.0), K0_AT_1) < 1e-14);
        assert!(rel(k1(1.0), K1_AT_1) < 1e-14);
        assert!(rel(k0_series_oracle(1.0), K0_AT_1) < 1e-15);
    }

    #[test]
    fn k0_matches_integral_oracle_across_range() {
        let mut w = 1e-8;
        while w < 700.0 {
            assert!(rel(k0(w), k_integral_oracle(0.0, w)) < 1e-12, "K0 at {w}");
            assert!(rel(k1(w), k_integral_oracle(1.0, w)) < 1e-12, "K1 at {w}");
            w *= 1.37;
        }
    }

    #[test]
    fn small_argument_limits() {
        let w = 1e-9;
        assert!((k0_plus_ln(w) - (LN_2 - EULER_GAMMA)).abs() < 1e-15);
        assert!((k0(w) + ln(w) - (LN_2 - EULER_GAMMA)).abs() < 1e-13);
        assert!((k0_plus_ln(1e-300) - 0.115_931_515_658_412_44).abs() < 1e-15);
        assert!((w * k1(w) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn large_argument_asymptotics() {
        let w = 50.0;
        let lead = sqrt(PI / (2.0 * w)) * exp(-w);
        assert!(rel(k0(w), lead) < 0.02);
    }

    #[test]
    fn underflow_and_domain() {
        let v = bessel_k0(800.0).unwrap();
        assert_eq!(v.value, 0.0);
        assert!(v.underflow);
        assert!(!bessel_k0(700.0).unwrap().underflow);
        assert!(bessel_k0(700.0).unwrap().value > 0.0);
        assert_eq!(bessel_k0(0.0), Err(SpecFnError::Domain(0.0)));
        assert_eq!(bessel_k1(-1.0), Err(SpecFnError::Domain(-1.0)));
        assert!(bessel_k0(f64::NAN).is_err());
    }

    #[test]
    fn integral_identity_for_k1() {
        let r = quad::integrate(|t| t * k0(t), 0.0, 1.0, &[], QuadOptions::default());
        assert!(r.converged);
        assert!((r.value - one_minus_x_k1(1.0)).abs() < 1e-10);
        assert!((one_minus_x_k1(1.0) - (1.0 - K1_AT_1)).abs() < 1e-15);
    }

    #[test]
    fn green_values_and_scaling() {
        let g11 = green(1.0, 1.0).unwrap();
        assert!(rel(g11, K0_AT_1 / TAU) < 1e-14);
        assert_eq!(green(2.0, 0.5).unwrap(), g11);
        for &(r, a) in &[(0.3, 7.0), (12.0, 0.01), (1e-5, 3.0)] {
            assert!(rel(green(r, a).unwrap(), green(a * r, 1.0).unwrap()) < 1e-15);
        }
        assert_eq!(green(0.0, 1.0), Err(SpecFnError::Singular));
    }

    #[test]
    fn cell_average_matches_polar_quadrature() {
        let (rho, alpha) = (1e-3, 1.0);
        // Radial integral of the disk average, with K0 from its integral
        // representation rather than the series under test.
        let r = quad::integrate(
            |r| r * k_integral_oracle(0.0, alpha * r),
            0.0,
            rho,
            &[],
            QuadOptions::with_rel_tol(1e-12),
        );
        let avg = 2.0 * r.value / (rho * rho) / TAU;
        assert!(rel(green_cell_avg(rho, alpha).unwrap(), avg) < 1e-8);
    }

    #[test]
    fn cell_average_small_argument_expansion() {
        let x = 1e-6;
        let expect = (-ln(x) + LN_2 - EULER_GAMMA + 0.5) / TAU;
        assert!(rel(green_cell_avg(x, 1.0).unwrap(), expect) < 1e-6);
        assert!(green_cell_avg(0.0, 1.0).is_err());
    }

    #[test]
    fn cell_average_exceeds_boundary_value() {
        for &rho in &[1e-4, 0.01, 0.3, 1.0, 4.0] {
            for &alpha in &[1e-6, 0.1, 1.0, 30.0] {
                assert!(green_cell_avg(rho, alpha).unwrap() > green(rho, alpha).unwrap());
            }
        }
    }

    #[test]
    fn cell_average_equivalent_radius() {
        // The disk average of -ln r equals -ln(ρ e^{-1/2}); at the rms radius
        // ρ/√2 a constant offset (1 - ln 2)/(4π) remains.
        let offset = (1.0 - LN_2) / (2.0 * TAU);
        let mut prev = f64::INFINITY;
        for k in 1..8 {
            let rho = powf(10.0, -(k as f64));
            let avg = green_cell_avg(rho, 1.0).unwrap();
            let d = (avg - green(rho * exp(-0.5), 1.0).unwrap()).abs();
            assert!(d < prev);
            prev = d;
            let rms = avg - green(rho / sqrt(2.0), 1.0).unwrap();
            assert!((rms - offset).abs() < rho);
        }
        assert!(prev < 1e-12);
    }

    #[test]
    fn remainder_kernel_matches_direct_difference() {
        for &(r, a) in &[(0.5, 0.1), (3.0, 1.0), (20.0, 0.3), (1e-3, 1e-4)] {
            let direct = k0(a * r) / TAU - g_of_alpha(a);
            assert!((green_minus_g(r, a) - direct).abs() < 1e-13);
            let cell = green_cell_avg(r, a).unwrap() - g_of_alpha(a);
            assert!((green_cell_avg_minus_g(r, a) - cell).abs() < 1e-13);
        }
    }

    #[test]
    fn strictly_decreasing() {
        let mut w = 1e-6;
        let (mut p0, mut p1) = (f64::INFINITY, f64::INFINITY);
        while w < 600.0 {
            let (a, b) = (k0(w), k1(w));
            assert!(a < p0 && b < p1, "at {w}");
            p0 = a;
            p1 = b;
            w *= 1.1;
        }
    }

    #[test]
    fn small_w_envelope_where_asymptotic() {
        // The O(w² ln w) remainder of the small-argument law, for w ≤ 0.4.
        let mut w = 1e-6;
        while w <= 0.4 {
            let dev = (k0(w) + ln(w) - (LN_2 - EULER_GAMMA)).abs();
            assert!(dev <= 0.6 * w * w * ln(w).abs() + 1e-10, "at {w}");
            w *= 1.05;
        }
    }

    #[test]
    fn lemma_examples() {
        let plan = SamplePlan::default();
        let r0 = lemma_ineq_constant(KernelInequality::I, 0.0, &plan).unwrap();
        assert!((r0.c_emp - 0.5).abs() < 1e-15);

        let alpha = exp(-2.0);
        let single = SamplePlan::new((alpha, alpha), (exp(2.0), exp(2.0)), 1, 1);
        let r = lemma_ineq_constant(KernelInequality::II, 1.0, &single).unwrap();
        let expect = ((K0_AT_1 - 2.0) / TAU).abs() / 2.0;
        assert!(rel(r.c_emp, expect) < 1e-12);

        let r3 = lemma_ineq_constant(KernelInequality::III, 1.0, &plan).unwrap();
        let r3b = lemma_ineq_constant(KernelInequality::III, 1.0, &plan.refined()).unwrap();
        assert!(r3.c_emp.is_finite());
        assert!((r3b.c_emp - r3.c_emp).abs() < 0.05 * r3.c_emp);
    }

    #[test]
    fn lemma_rejects_bad_input() {
        let plan = SamplePlan::default();
        assert!(lemma_ineq_constant(KernelInequality::I, 2.5, &plan).is_err());
        let empty = SamplePlan { n_r: 0, ..plan.clone() };
        assert_eq!(
            lemma_ineq_constant(KernelInequality::I, 1.0, &empty),
            Err(SpecFnError::EmptySamplePlan)
        );
        // (ii) needs αr ≥ 1.
        let tiny = SamplePlan::new((0.01, 0.1), (1e-3, 1.0), 5, 5);
        assert_eq!(
            lemma_ineq_constant(KernelInequality::II, 1.0, &tiny),
            Err(SpecFnError::EmptySamplePlan)
        );
    }

    #[test]
    fn sample_plan_refinement_is_nested() {
        let p = SamplePlan::default();
        let (a, b) = (p.alphas(), p.refined().alphas());
        for (i, x) in a.iter().enumerate() {
            assert_eq!(*x, b[2 * i]);
        }
    }

    proptest::proptest! {
        #[test]
        fn lemma_constant_monotone_under_inclusion(s in 0.0f64..2.0, which in 0usize..3) {
            let which = [KernelInequality::I, KernelInequality::II, KernelInequality::III][which];
            let p = SamplePlan::new((1e-8, 0.3), (1e-4, 1e8), 9, 17);
            let a = lemma_ineq_constant(which, s, &p).unwrap();
            let b = lemma_ineq_constant(which, s, &p.refined()).unwrap();
            proptest::prop_assert!(b.c_emp >= a.c_emp);
        }

        #[test]
        fn green_scale_invariance(r in 1e-6f64..1e3, a in 1e-6f64..1e2) {
            let lhs = green(r, a).unwrap();
            let rhs = green(a * r, 1.0).unwrap();
            proptest::prop_assert!((lhs - rhs).abs() <= 1e-14 * rhs.abs());
        }
    }
}
