//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use alloc::vec::Vec;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-11,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(inside(c - dx, a, b)) + f(inside(c + dx, a, b));
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Piece {
        a,
        b,
        value: kronrod * h,
        err: ((kronrod - gauss) * h).abs(),
    }
}

/// Nudges a node that rounded onto an endpoint back into the open interval.
#[inline]
fn inside(x: f64, a: f64, b: f64) -> f64 {
    if x <= a {
        a.next_up()
    } else if x >= b {
        b.next_down()
    } else {
        x
    }
}

/// Integrates `f` over `[a, b]`, splitting first at the interior `breaks`.
///
/// The integrand is never evaluated at `a`, `b` or a break point, so
/// integrable endpoint singularities are fine.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            abs_err: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| *x > lo && *x < hi && x.is_finite())
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut pieces: Vec<Piece> = Vec::with_capacity(cuts.len() + 64);
    let mut left = lo;
    for &x in cuts.iter().chain(core::iter::once(&hi)) {
        pieces.push(gk15(&mut f, left, x));
        left = x;
    }
    let mut evaluations = 15 * pieces.len();

    loop {
        let (value, err) = totals(&pieces);
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        let done = err <= target;
        if done || pieces.len() >= opts.max_intervals || !value.is_finite() {
            return QuadResult {
                value: sign * value,
                abs_err: err,
                evaluations,
                converged: done && value.is_finite(),
            };
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = pieces[worst];
        let mid = 0.5 * (p.a + p.b);
        let floor = 64.0 * f64::EPSILON * p.a.abs().max(p.b.abs()) + 64.0 * f64::MIN_POSITIVE;
        if p.b - p.a <= floor {
            // Interval exhausted at machine resolution.
            return QuadResult {
                value: sign * value,
                abs_err: err,
                evaluations,
                converged: false,
            };
        }
        pieces[worst] = gk15(&mut f, p.a, mid);
        pieces.push(gk15(&mut f, mid, p.b));
        evaluations += 30;
    }
}

/// Like [`integrate`] but either limit may be infinite. Infinite tails are
/// mapped onto `[0, 1)` by `x ↦ x / (1 - x)` beyond the outermost break.
pub fn integrate_line<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> QuadResult {
    if lo.is_finite() && hi.is_finite() {
        return integrate(f, lo, hi, breaks, opts);
    }
    let pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    let a = if lo.is_finite() {
        lo
    } else {
        pts.iter()
            .copied()
            .chain(core::iter::once(0.0))
            .chain(hi.is_finite().then_some(hi))
            .fold(f64::INFINITY, f64::min)
            - 1.0
    };
    let b = if hi.is_finite() {
        hi
    } else {
        pts.iter().copied().chain([0.0, a]).fold(f64::NEG_INFINITY, f64::max) + 1.0
    };
    let mut total = integrate(&mut f, a, b, &pts, opts);
    let add = |r: QuadResult, total: &mut QuadResult| {
        total.value += r.value;
        total.abs_err += r.abs_err;
        total.evaluations += r.evaluations;
        total.converged &= r.converged;
    };
    if !lo.is_finite() {
        let r = integrate(
            |x| {
                let d = 1.0 - x;
                f(a - x / d) / (d * d)
            },
            0.0,
            1.0,
            &[],
            opts,
        );
        add(r, &mut total);
    }
    if !hi.is_finite() {
        let r = integrate(
            |x| {
                let d = 1.0 - x;
                f(b + x / d) / (d * d)
            },
            0.0,
            1.0,
            &[],
            opts,
        );
        add(r, &mut total);
    }
    total
}

fn totals(pieces: &[Piece]) -> (f64, f64) {
    pieces
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{exp, ln, sqrt, PI};

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, &[], QuadOptions::default());
        assert!((r.value - 2.0).abs() < 1e-14);
        assert!(r.converged);
    }

    #[test]
    fn log_endpoint_singularity() {
        let r = integrate(ln, 0.0, 1.0, &[], QuadOptions::default());
        assert!((r.value + 1.0).abs() < 1e-10);
    }

    #[test]
    fn interior_singularity_at_break() {
        let r = integrate(
            |x| ln((x - 0.3).abs()),
            0.0,
            1.0,
            &[0.3],
            QuadOptions::default(),
        );
        let expect = 0.3 * ln(0.3) + 0.7 * ln(0.7) - 1.0;
        assert!(r.converged);
        assert!((r.value - expect).abs() < 1e-10, "{}", r.value);
        let k = integrate(|x| sqrt((x - 0.3).abs()), 0.0, 1.0, &[0.3], QuadOptions::default());
        let expect = (2.0 / 3.0) * (0.3 * sqrt(0.3) + 0.7 * sqrt(0.7));
        assert!((k.value - expect).abs() < 1e-12);
    }

    #[test]
    fn reversed_limits_and_gaussian() {
        let r = integrate(|x| exp(-x * x), 8.0, -8.0, &[], QuadOptions::default());
        assert!((r.value + sqrt(PI)).abs() < 1e-13);
    }

    #[test]
    fn infinite_limits() {
        let r = integrate_line(|x| exp(-x * x), f64::NEG_INFINITY, f64::INFINITY, &[], QuadOptions::default());
        assert!((r.value - sqrt(PI)).abs() < 1e-12);
        let r = integrate_line(|x| 1.0 / (x * x), 1.0, f64::INFINITY, &[2.0], QuadOptions::default());
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = integrate_line(exp, f64::NEG_INFINITY, -3.0, &[], QuadOptions::default());
        assert!((r.value - exp(-3.0)).abs() < 1e-14);
    }

    #[test]
    fn reports_nonconvergence() {
        let opts = QuadOptions {
            max_intervals: 3,
            ..QuadOptions::default()
        };
        let r = integrate(|x| 1.0 / x, 0.0, 1.0, &[], opts);
        assert!(!r.converged);
    }
}
