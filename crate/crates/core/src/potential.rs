//! Potentials on the plane, their integrals, and numerical checks of the
//! integrability hypotheses.
//!
//! Radial potentials expose the profile `r² |V(r)|` as a function of
//! `ℓ = ln r`. All one-dimensional hypothesis integrals and the
//! autocorrelation are evaluated in that variable, which keeps the
//! logarithmically singular and slowly decaying examples in floating-point
//! range.

use crate::grid::{build_cartesian, Point2};
use crate::math::{acos, asinh, cosh, exp, ln, powf, sinh, sqrt, PI, TAU};
use crate::quad::{self, QuadOptions, QuadResult};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

/// `|V|` below this counts as zero when sizing the effective support.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PotentialError {
    #[error("unknown potential `{0}`")]
    UnknownPotential(String),
    #[error("potential `{potential}` has no parameter `{param}`")]
    UnknownParameter { potential: String, param: String },
    #[error("parameter `{param}` = {value}: {reason}")]
    InvalidParameter {
        param: String,
        value: f64,
        reason: &'static str,
    },
    #[error("piecewise table: {0}")]
    Table(String),
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("potential is not finite at ({x}, {y}): {value}")]
    NonFinite { x: f64, y: f64, value: f64 },
}

type CustomFn = dyn Fn(Point2) -> f64 + Send + Sync;

#[derive(Clone)]
enum Family {
    VInfinity { delta: f64 },
    VZero,
    Disk { radius: f64, height: f64 },
    Gaussian { a: f64 },
    AnnulusSigned { r_in: f64, r_out: f64, inner: f64, outer: f64 },
    PiecewiseRadial { knots: Vec<(f64, f64)> },
    Custom { f: Arc<CustomFn>, support_radius: f64, radial: bool },
}

/// A real potential on the plane together with what is known about it.
#[derive(Clone)]
pub struct Potential {
    name: String,
    params: Vec<(String, f64)>,
    family: Family,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("name", &self.name)
            .field("params", &self.params)
            .finish()
    }
}

fn invalid(param: &str, value: f64, reason: &'static str) -> PotentialError {
    PotentialError::InvalidParameter {
        param: param.to_string(),
        value,
        reason,
    }
}

fn finite(param: &str, value: f64) -> Result<f64, PotentialError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(param, value, "must be finite"))
    }
}

fn positive(param: &str, value: f64) -> Result<f64, PotentialError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(param, value, "must be positive"))
    }
}

/// Parameter lookup with defaults that rejects unknown keys.
struct Params<'a> {
    potential: &'a str,
    given: &'a [(&'a str, f64)],
    known: &'static [&'static str],
}

impl Params<'_> {
    fn check(&self) -> Result<(), PotentialError> {
        for (k, _) in self.given {
            if !self.known.contains(k) {
                return Err(PotentialError::UnknownParameter {
                    potential: self.potential.to_string(),
                    param: k.to_string(),
                });
            }
        }
        Ok(())
    }

    fn get(&self, key: &str, default: f64) -> f64 {
        self.given
            .iter()
            .rev()
            .find(|(k, _)| *k == key)
            .map_or(default, |(_, v)| *v)
    }
}

impl Potential {
    /// Built-in families: `v_infinity(delta)`, `v_zero`,
    /// `disk(radius, height)`, `gaussian(a)` (`e^{-a|x|²}`) and
    /// `annulus_signed(r_in, r_out, inner, outer)`.
    pub fn builtin(name: &str, params: &[(&str, f64)]) -> Result<Self, PotentialError> {
        let known: &'static [&'static str] = match name {
            "v_infinity" => &["delta"],
            "v_zero" => &[],
            "disk" => &["radius", "height"],
            "gaussian" => &["a"],
            "annulus_signed" => &["r_in", "r_out", "inner", "outer"],
            _ => return Err(PotentialError::UnknownPotential(name.to_string())),
        };
        let p = Params {
            potential: name,
            given: params,
            known,
        };
        p.check()?;
        match name {
            "v_infinity" => Self::v_infinity(p.get("delta", 0.0)),
            "v_zero" => Ok(Self::v_zero()),
            "disk" => Self::disk(p.get("radius", 1.0), p.get("height", 1.0)),
            "gaussian" => Self::gaussian(p.get("a", 1.0)),
            _ => Self::annulus_signed(
                p.get("r_in", 1.0),
                p.get("r_out", 2.0),
                p.get("inner", 1.0),
                p.get("outer", -0.2),
            ),
        }
    }

    /// `1_{|x|>3} / (|x|² (ln|x|)^{1+δ} (ln ln|x|)²)`, `δ ∈ [0, 1)`.
    pub fn v_infinity(delta: f64) -> Result<Self, PotentialError> {
        if !(0.0..1.0).contains(&delta) {
            return Err(invalid("delta", delta, "must lie in [0, 1)"));
        }
        Ok(Self {
            name: "v_infinity".into(),
            params: vec![("delta".into(), delta)],
            family: Family::VInfinity { delta },
        })
    }

    /// `1_{|x|<1/3} / (|x|² (ln|x|)⁴)`.
    pub fn v_zero() -> Self {
        Self {
            name: "v_zero".into(),
            params: Vec::new(),
            family: Family::VZero,
        }
    }

    pub fn disk(radius: f64, height: f64) -> Result<Self, PotentialError> {
        let radius = positive("radius", radius)?;
        let height = finite("height", height)?;
        Ok(Self {
            name: "disk".into(),
            params: vec![("radius".into(), radius), ("height".into(), height)],
            family: Family::Disk { radius, height },
        })
    }

    pub fn gaussian(a: f64) -> Result<Self, PotentialError> {
        let a = positive("a", a)?;
        Ok(Self {
            name: "gaussian".into(),
            params: vec![("a".into(), a)],
            family: Family::Gaussian { a },
        })
    }

    /// `inner` on `|x| < r_in`, `outer` on `r_in ≤ |x| < r_out`.
    pub fn annulus_signed(r_in: f64, r_out: f64, inner: f64, outer: f64) -> Result<Self, PotentialError> {
        let r_in = positive("r_in", r_in)?;
        let r_out = positive("r_out", r_out)?;
        if r_out <= r_in {
            return Err(invalid("r_out", r_out, "must exceed r_in"));
        }
        let inner = finite("inner", inner)?;
        let outer = finite("outer", outer)?;
        Ok(Self {
            name: "annulus_signed".into(),
            params: vec![
                ("r_in".into(), r_in),
                ("r_out".into(), r_out),
                ("inner".into(), inner),
                ("outer".into(), outer),
            ],
            family: Family::AnnulusSigned {
                r_in,
                r_out,
                inner,
                outer,
            },
        })
    }

    /// Radial potential interpolated linearly in `r` between `(r, v)` knots,
    /// constant below the first knot and zero beyond the last.
    pub fn piecewise_radial(knots: Vec<(f64, f64)>) -> Result<Self, PotentialError> {
        if knots.is_empty() {
            return Err(PotentialError::Table("needs at least one knot".into()));
        }
        for (i, &(r, v)) in knots.iter().enumerate() {
            if !(r >= 0.0 && r.is_finite() && v.is_finite()) {
                return Err(PotentialError::Table(format!("knot {i} = ({r}, {v}) is not finite with r ≥ 0")));
            }
            if i > 0 && r <= knots[i - 1].0 {
                return Err(PotentialError::Table(format!("radii must increase strictly (knot {i})")));
            }
        }
        if knots.last().map_or(0.0, |k| k.0) <= 0.0 {
            return Err(PotentialError::Table("last knot radius must be positive".into()));
        }
        Ok(Self {
            name: "piecewise_radial".into(),
            params: vec![("knots".into(), knots.len() as f64)],
            family: Family::PiecewiseRadial { knots },
        })
    }

    /// User-supplied potential, zero outside the disk of `support_radius`.
    /// `radial` declares that `f` depends on `|x|` only.
    pub fn custom(
        name: &str,
        support_radius: f64,
        radial: bool,
        f: impl Fn(Point2) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, PotentialError> {
        let support_radius = positive("support_radius", support_radius)?;
        Ok(Self {
            name: name.to_string(),
            params: vec![("support_radius".into(), support_radius)],
            family: Family::Custom {
                f: Arc::new(f),
                support_radius,
                radial,
            },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn is_radial(&self) -> bool {
        match &self.family {
            Family::Custom { radial, .. } => *radial,
            _ => true,
        }
    }

    /// `V(x)`. Infinite only at declared singular points.
    pub fn evaluate(&self, p: Point2) -> f64 {
        match &self.family {
            Family::Custom { f, support_radius, .. } => {
                if p.norm() < *support_radius {
                    f(p)
                } else {
                    0.0
                }
            }
            _ => self.radial_value(p.norm()),
        }
    }

    /// `V` at distance `r` from the origin (radial potentials; for others the
    /// value on the positive x-axis).
    pub fn radial_value(&self, r: f64) -> f64 {
        match &self.family {
            Family::VInfinity { delta } => {
                if r > 3.0 {
                    let l = ln(r);
                    1.0 / (r * r * powf(l, 1.0 + delta) * ln(l) * ln(l))
                } else {
                    0.0
                }
            }
            Family::VZero => {
                if r == 0.0 {
                    f64::INFINITY
                } else if r < 1.0 / 3.0 {
                    let l = ln(r);
                    1.0 / (r * r * l * l * l * l)
                } else {
                    0.0
                }
            }
            Family::Disk { radius, height } => {
                if r < *radius {
                    *height
                } else {
                    0.0
                }
            }
            Family::Gaussian { a } => exp(-a * r * r),
            Family::AnnulusSigned {
                r_in,
                r_out,
                inner,
                outer,
            } => {
                if r < *r_in {
                    *inner
                } else if r < *r_out {
                    *outer
                } else {
                    0.0
                }
            }
            Family::PiecewiseRadial { knots } => interpolate(knots, r),
            Family::Custom { .. } => self.evaluate(Point2::new(r, 0.0)),
        }
    }

    /// `V^{1/2} = |V|^{1/2} sgn V`.
    pub fn signed_sqrt(&self, p: Point2) -> f64 {
        let v = self.evaluate(p);
        sqrt(v.abs()).copysign(v)
    }

    /// `r² |V(r)|` at `r = e^ℓ`, evaluated without forming `r`.
    pub fn log_profile(&self, l: f64) -> f64 {
        match &self.family {
            Family::VInfinity { delta } => {
                if l > ln(3.0) {
                    let ll = ln(l);
                    1.0 / (powf(l, 1.0 + delta) * ll * ll)
                } else {
                    0.0
                }
            }
            Family::VZero => {
                if l < -ln(3.0) {
                    1.0 / (l * l * l * l)
                } else {
                    0.0
                }
            }
            Family::Gaussian { a } => {
                if l > 400.0 {
                    0.0
                } else {
                    exp(2.0 * l - a * exp(2.0 * l))
                }
            }
            _ => {
                if l > 700.0 {
                    return 0.0;
                }
                let r = exp(l);
                if r == 0.0 {
                    return 0.0;
                }
                let v = self.radial_value(r).abs();
                if v == 0.0 {
                    0.0
                } else {
                    r * r * v
                }
            }
        }
    }

    /// `r² V(r)` at `r = e^ℓ` with sign.
    pub fn log_profile_signed(&self, l: f64) -> f64 {
        let p = self.log_profile(l);
        if p == 0.0 {
            return 0.0;
        }
        let r = exp(l);
        let v = if r > 0.0 && r.is_finite() {
            self.radial_value(r)
        } else {
            1.0
        };
        if v < 0.0 {
            -p
        } else {
            p
        }
    }

    /// Radii across which `V` jumps or has a kink.
    pub fn radial_breaks(&self) -> Vec<f64> {
        match &self.family {
            Family::VInfinity { .. } => vec![3.0],
            Family::VZero => vec![1.0 / 3.0],
            Family::Disk { radius, .. } => vec![*radius],
            Family::Gaussian { .. } => Vec::new(),
            Family::AnnulusSigned { r_in, r_out, .. } => vec![*r_in, *r_out],
            Family::PiecewiseRadial { knots } => knots.iter().map(|k| k.0).filter(|r| *r > 0.0).collect(),
            Family::Custom { support_radius, .. } => vec![*support_radius],
        }
    }

    /// Radius beyond which `|V| < SUPPORT_THRESHOLD`, or `None` when the
    /// support is unbounded in practice.
    pub fn support_radius(&self) -> Option<f64> {
        match &self.family {
            Family::VInfinity { .. } => None,
            Family::VZero => Some(1.0 / 3.0),
            Family::Disk { radius, .. } => Some(*radius),
            Family::Gaussian { a } => Some(sqrt(ln(1.0 / SUPPORT_THRESHOLD) / a)),
            Family::AnnulusSigned { r_out, .. } => Some(*r_out),
            Family::PiecewiseRadial { knots } => knots.last().map(|k| k.0),
            Family::Custom { support_radius, .. } => Some(*support_radius),
        }
    }

    /// Points where `V` is unbounded; quadrature nodes must avoid them.
    pub fn singular_points(&self) -> Vec<Point2> {
        match self.family {
            Family::VZero => vec![Point2::ORIGIN],
            _ => Vec::new(),
        }
    }

    /// True when `V` takes both signs.
    pub fn sign_changing(&self) -> bool {
        match &self.family {
            Family::Disk { .. } => false,
            Family::AnnulusSigned { inner, outer, .. } => inner * outer < 0.0,
            Family::PiecewiseRadial { knots } => {
                knots.iter().any(|k| k.1 > 0.0) && knots.iter().any(|k| k.1 < 0.0)
            }
            Family::Custom { .. } => true,
            _ => false,
        }
    }

    /// Closed-form `∫V` when known.
    pub fn analytic_integral(&self) -> Option<f64> {
        match &self.family {
            Family::VInfinity { delta } => (*delta == 0.0).then(|| TAU / ln(ln(3.0))),
            Family::VZero => {
                let l3 = ln(3.0);
                Some(TAU / (3.0 * l3 * l3 * l3))
            }
            Family::Disk { radius, height } => Some(height * PI * radius * radius),
            Family::Gaussian { a } => Some(PI / a),
            Family::AnnulusSigned {
                r_in,
                r_out,
                inner,
                outer,
            } => Some(PI * (inner * r_in * r_in + outer * (r_out * r_out - r_in * r_in))),
            Family::PiecewiseRadial { knots } => Some(piecewise_integral(knots)),
            Family::Custom { .. } => None,
        }
    }

    /// `∫V` by quadrature, or the closed form when known.
    pub fn integral_u(&self) -> Result<IntegralReport, PotentialError> {
        let numeric = if self.is_radial() {
            let study = radial_window_study(self, |l| self.log_profile_signed(l), DEFAULT_REL_TOL);
            IntegralReport {
                value: study.value,
                converged: study.verdict == Verdict::Converged,
                history: study.history,
                analytic: false,
            }
        } else {
            let radius = self
                .support_radius()
                .ok_or(PotentialError::Unsupported("non-radial potential without bounded support"))?;
            let study = cartesian_study(radius, |p| self.evaluate(p), DEFAULT_REL_TOL)?;
            IntegralReport {
                value: study.value,
                converged: study.verdict == Verdict::Converged,
                history: study.history,
                analytic: false,
            }
        };
        Ok(match self.analytic_integral() {
            Some(u) => IntegralReport {
                value: u,
                analytic: true,
                ..numeric
            },
            None => numeric,
        })
    }

    /// `F(|u|) = ∫ |V(x)| |V(x - u)| dx` for radial `V`.
    pub fn autocorrelation(&self, u_mag: f64) -> Result<f64, PotentialError> {
        if !self.is_radial() {
            return Err(PotentialError::Unsupported("autocorrelation needs a radial potential"));
        }
        if !(u_mag >= 0.0 && u_mag.is_finite()) {
            return Err(invalid("u_mag", u_mag, "must be finite and ≥ 0"));
        }
        if u_mag == 0.0 {
            // ∫ V² = 2π ∫ P(ℓ)² e^{-2ℓ} dℓ.
            let breaks: Vec<f64> = self.radial_breaks().iter().map(|r| ln(*r)).collect();
            let r = quad::integrate_line(
                |l| {
                    let p = self.log_profile(l);
                    if p == 0.0 {
                        0.0
                    } else {
                        p * p * exp(-2.0 * l)
                    }
                },
                f64::NEG_INFINITY,
                self.support_radius().map_or(f64::INFINITY, ln),
                &breaks,
                QuadOptions::with_rel_tol(1e-10),
            );
            return Ok(TAU * r.value);
        }
        let ln_rho = ln(u_mag);
        Ok(scaled_autocorrelation(self, ln_rho, Region::Full).value / (u_mag * u_mag))
    }

    /// `∫_{a < |u| < b} F(|u|) w(|u|) du` over `ln|u| ∈ [ln_lo, ln_hi]`, where
    /// `weight` receives `ln|u|`.
    pub fn autocorrelation_moment(
        &self,
        weight: impl Fn(f64) -> f64,
        ln_lo: f64,
        ln_hi: f64,
        rel_tol: f64,
    ) -> Result<QuadResult, PotentialError> {
        if !self.is_radial() {
            return Err(PotentialError::Unsupported("autocorrelation needs a radial potential"));
        }
        Ok(moment(self, &weight, ln_lo, ln_hi, Region::Full, rel_tol))
    }

    /// Numerical check of one integrability hypothesis.
    pub fn check_assumption(&self, condition: Condition, parameter: f64) -> Result<AssumptionReport, PotentialError> {
        condition.validate(parameter)?;
        let study = if self.is_radial() {
            match condition {
                Condition::Roll => roll_study(self, DEFAULT_REL_TOL),
                _ => {
                    let h = radial_integrand(self, condition, parameter);
                    radial_window_study(self, h, DEFAULT_REL_TOL)
                }
            }
        } else {
            let radius = self
                .support_radius()
                .ok_or(PotentialError::Unsupported("non-radial potential without bounded support"))?;
            match condition {
                Condition::Roll => cartesian_roll_study(self, radius, DEFAULT_REL_TOL)?,
                _ => {
                    let g = cartesian_integrand(condition, parameter);
                    cartesian_study(radius, |p| g(p, self.evaluate(p)), DEFAULT_REL_TOL)?
                }
            }
        };
        Ok(AssumptionReport {
            condition,
            parameter,
            value: study.value,
            converged: study.verdict == Verdict::Converged,
            verdict: study.verdict,
            refinement_history: study.history,
        })
    }
}

fn interpolate(knots: &[(f64, f64)], r: f64) -> f64 {
    let (r0, v0) = knots[0];
    if r <= r0 {
        return v0;
    }
    for w in knots.windows(2) {
        let ((a, va), (b, vb)) = (w[0], w[1]);
        if r < b {
            return va + (vb - va) * (r - a) / (b - a);
        }
    }
    0.0
}

fn piecewise_integral(knots: &[(f64, f64)]) -> f64 {
    let (r0, v0) = knots[0];
    let mut total = PI * r0 * r0 * v0;
    for w in knots.windows(2) {
        let ((a, va), (b, vb)) = (w[0], w[1]);
        // ∫_a^b (va + m (r - a)) 2πr dr.
        let m = (vb - va) / (b - a);
        let c = va - m * a;
        total += TAU * (c * (b * b - a * a) / 2.0 + m * (b * b * b - a * a * a) / 3.0);
    }
    total
}

/// `∫V` with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralReport {
    pub value: f64,
    pub converged: bool,
    /// `(resolution, value)` of the numerical refinement.
    pub history: Vec<(f64, f64)>,
    /// The reported value is the closed form.
    pub analytic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    /// `V ∈ L¹`.
    L1,
    /// `|ln|x||^s V ∈ L¹(|x| > 1)`, `s ∈ [0, 1)`.
    LnS,
    /// `∫_{|x-y|<e} |V(x)| (ln|x-y|)² |V(y)| < ∞`.
    Roll,
    /// `|x|^s V ∈ L¹(|x| > 1)`, `s > 0`.
    SimonS,
    /// `V ∈ L^{1+η}`, `η > 0`.
    SimonEta,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Condition::L1,
        Condition::LnS,
        Condition::Roll,
        Condition::SimonS,
        Condition::SimonEta,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::L1 => "L1",
            Condition::LnS => "ln_s",
            Condition::Roll => "roll",
            Condition::SimonS => "simon_s",
            Condition::SimonEta => "simon_eta",
        }
    }

    fn validate(self, p: f64) -> Result<(), PotentialError> {
        match self {
            Condition::LnS if !(0.0..1.0).contains(&p) => Err(invalid("s", p, "must lie in [0, 1)")),
            Condition::SimonS if !(p > 0.0 && p.is_finite()) => Err(invalid("s", p, "must be positive")),
            Condition::SimonEta if !(p > 0.0 && p.is_finite()) => Err(invalid("eta", p, "must be positive")),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Condition {
    type Err = PotentialError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Condition::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| PotentialError::UnknownParameter {
                potential: "condition".into(),
                param: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Converged,
    Divergent,
    /// Neither criterion met within the refinement budget.
    Undetermined,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Converged => "converged",
            Verdict::Divergent => "divergent",
            Verdict::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub condition: Condition,
    pub parameter: f64,
    pub value: f64,
    pub converged: bool,
    pub verdict: Verdict,
    pub refinement_history: Vec<(f64, f64)>,
}

/// Relative change between the last two refinements accepted as converged.
pub const DEFAULT_REL_TOL: f64 = 1e-3;

struct Study {
    value: f64,
    verdict: Verdict,
    history: Vec<(f64, f64)>,
}

/// Converged when the last two values agree to `rel_tol`; divergent on a
/// non-finite value or three consecutive refinements each growing by more
/// than 10%.
fn classify(history: &[(f64, f64)], rel_tol: f64) -> Verdict {
    let vals: Vec<f64> = history.iter().map(|h| h.1).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Verdict::Divergent;
    }
    let n = vals.len();
    if n >= 2 && (vals[n - 1] - vals[n - 2]).abs() <= rel_tol * vals[n - 1].abs() {
        return Verdict::Converged;
    }
    let mut run = 0;
    for w in vals.windows(2) {
        if w[1].abs() > 1.1 * w[0].abs() {
            run += 1;
            if run >= 3 {
                return Verdict::Divergent;
            }
        } else {
            run = 0;
        }
    }
    Verdict::Undetermined
}

fn finish(history: Vec<(f64, f64)>, rel_tol: f64) -> Study {
    let verdict = classify(&history, rel_tol);
    Study {
        value: history.last().map_or(0.0, |h| h.1),
        verdict,
        history,
    }
}

const WINDOW_LEVELS: u32 = 10;

fn radial_integrand(v: &Potential, condition: Condition, p: f64) -> impl Fn(f64) -> f64 + '_ {
    move |l: f64| {
        let prof = v.log_profile(l);
        if prof == 0.0 {
            return 0.0;
        }
        match condition {
            Condition::L1 | Condition::Roll => prof,
            Condition::LnS => {
                if l > 0.0 {
                    powf(l, p) * prof
                } else {
                    0.0
                }
            }
            Condition::SimonS => {
                if l > 0.0 {
                    exp(p * l) * prof
                } else {
                    0.0
                }
            }
            // r²|V|^{1+η} = P^{1+η} e^{-2ηℓ}
            Condition::SimonEta => exp((1.0 + p) * ln(prof) - 2.0 * p * l),
        }
    }
}

/// `2π ∫ h(ℓ) dℓ` over growing windows `ℓ = sinh v`, `|v| ≤ 2^k`.
fn radial_window_study(v: &Potential, h: impl Fn(f64) -> f64, rel_tol: f64) -> Study {
    let mut breaks: Vec<f64> = v.radial_breaks().iter().map(|r| asinh(ln(*r))).collect();
    breaks.push(0.0);
    let g = |t: f64| {
        let val = h(sinh(t));
        if val == 0.0 {
            0.0
        } else {
            TAU * val * cosh(t)
        }
    };
    let opts = QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-10,
        max_intervals: 4000,
    };
    let mut history = Vec::new();
    let mut total = 0.0;
    let mut prev = 0.0;
    for k in 0..WINDOW_LEVELS {
        let w = (1u64 << k) as f64;
        if k == 0 {
            total += quad::integrate(g, -w, w, &breaks, opts).value;
        } else {
            total += quad::integrate(g, prev, w, &breaks, opts).value;
            total += quad::integrate(g, -w, -prev, &breaks, opts).value;
        }
        prev = w;
        history.push((w, total));
        if !total.is_finite() {
            break;
        }
    }
    finish(history, rel_tol)
}

fn cartesian_integrand(condition: Condition, p: f64) -> impl Fn(Point2, f64) -> f64 {
    move |x: Point2, v: f64| {
        let r = x.norm();
        let a = v.abs();
        match condition {
            Condition::L1 | Condition::Roll => a,
            Condition::LnS => {
                if r > 1.0 {
                    powf(ln(r), p) * a
                } else {
                    0.0
                }
            }
            Condition::SimonS => {
                if r > 1.0 {
                    powf(r, p) * a
                } else {
                    0.0
                }
            }
            Condition::SimonEta => powf(a, 1.0 + p),
        }
    }
}

const CARTESIAN_LEVELS: [usize; 5] = [32, 64, 128, 256, 512];

fn cartesian_study(radius: f64, f: impl Fn(Point2) -> f64, rel_tol: f64) -> Result<Study, PotentialError> {
    let mut history = Vec::new();
    for &n in &CARTESIAN_LEVELS {
        let g = build_cartesian(radius, n).map_err(|_| PotentialError::Unsupported("invalid support radius"))?;
        let mut terms = Vec::with_capacity(g.len());
        for (p, w) in g.nodes.iter().zip(&g.weights) {
            terms.push(w * f(*p));
        }
        history.push((n as f64, crate::linalg::pairwise_sum(&terms)));
    }
    Ok(finish(history, rel_tol))
}

/// Product-grid double sum for non-radial `V`; the diagonal uses the disk
/// average of `(ln r)²`, which is `(ln ρ)² - ln ρ + 1/2`.
fn cartesian_roll_study(v: &Potential, radius: f64, rel_tol: f64) -> Result<Study, PotentialError> {
    let mut history = Vec::new();
    for &n in &[16usize, 32, 64, 128] {
        let g = build_cartesian(radius, n).map_err(|_| PotentialError::Unsupported("invalid support radius"))?;
        let vals: Vec<f64> = g.nodes.iter().map(|p| v.evaluate(*p).abs()).collect();
        let mut rows = Vec::with_capacity(g.len());
        for i in 0..g.len() {
            if vals[i] == 0.0 {
                continue;
            }
            let mut s = 0.0;
            for j in 0..g.len() {
                if vals[j] == 0.0 {
                    continue;
                }
                let k = if i == j {
                    let lr = ln(g.cell_radius[i]);
                    lr * lr - lr + 0.5
                } else {
                    let d = g.nodes[i].dist(g.nodes[j]);
                    if d >= crate::math::E {
                        continue;
                    }
                    let l = ln(d);
                    l * l
                };
                s += g.weights[j] * vals[j] * k;
            }
            rows.push(g.weights[i] * vals[i] * s);
        }
        history.push((n as f64, crate::linalg::pairwise_sum(&rows)));
    }
    Ok(finish(history, rel_tol))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Region {
    /// All of the plane.
    Full,
    /// `|x| > 2|u|`, the near-diagonal part of the double integral.
    Far,
}

/// `ρ² F(ρ)` at `ρ = e^{ln_rho}`, or its `|x| > 2ρ` part.
///
/// Polar coordinates about the origin with `s = |x|/ρ`; with
/// `D = 1 + s² - 2s cos θ` one has `|x - u| = ρ √D` and
/// `ρ² |V(x)||V(x-u)| dx = P(ln ρ + ln s) P(ln ρ + ½ ln D) / D d(ln s) dθ`.
/// For the full plane only the half `|x| < |x - u|` is integrated and doubled.
fn scaled_autocorrelation(v: &Potential, ln_rho: f64, region: Region) -> QuadResult {
    let rho = exp(ln_rho);
    let radii = v.radial_breaks();
    let hi = v.support_radius().map_or(f64::INFINITY, |r| ln(r) - ln_rho);
    let lo = match region {
        Region::Full => f64::NEG_INFINITY,
        Region::Far => ln(2.0),
    };
    if hi <= lo {
        return QuadResult {
            value: 0.0,
            abs_err: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    let mut breaks = vec![-ln(2.0), 0.0];
    for &rb in &radii {
        let q = rb / rho;
        breaks.push(ln(q));
        breaks.push(ln(q + 1.0));
        if q > 1.0 {
            breaks.push(ln(q - 1.0));
        } else if q < 1.0 {
            breaks.push(ln(1.0 - q));
        }
    }
    breaks.retain(|b| b.is_finite());
    let inner_opts = QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-10,
        max_intervals: 400,
    };
    let outer = |sigma: f64| {
        let pr = v.log_profile(ln_rho + sigma);
        if pr == 0.0 {
            return 0.0;
        }
        let s = exp(sigma);
        let theta_min = match region {
            Region::Full if s > 0.5 => acos(1.0 / (2.0 * s)),
            _ => 0.0,
        };
        let mut tb = Vec::new();
        for &rb in &radii {
            let q = rb / rho;
            let c = (1.0 + s * s - q * q) / (2.0 * s);
            if c > -1.0 && c < 1.0 {
                tb.push(acos(c));
            }
        }
        let r = quad::integrate(
            |theta| {
                let d = 1.0 + s * s - 2.0 * s * crate::math::cos(theta);
                let pd = v.log_profile(ln_rho + 0.5 * ln(d));
                pd / d
            },
            theta_min,
            PI,
            &tb,
            inner_opts,
        );
        let mult = match region {
            Region::Full => 4.0,
            Region::Far => 2.0,
        };
        mult * pr * r.value
    };
    quad::integrate_line(
        outer,
        lo,
        hi,
        &breaks,
        QuadOptions {
            abs_tol: 1e-300,
            rel_tol: 1e-9,
            max_intervals: 600,
        },
    )
}

fn pair_breaks(v: &Potential) -> Vec<f64> {
    let radii = v.radial_breaks();
    let mut out = vec![0.0];
    for &a in &radii {
        for &b in &radii {
            out.push(ln(a + b));
            if a != b {
                out.push(ln((a - b).abs()));
            }
        }
    }
    out
}

/// `2π ∫ ρ²F(ρ) w(ln ρ) d(ln ρ)` over `[ln_lo, ln_hi]`.
fn moment(
    v: &Potential,
    weight: &dyn Fn(f64) -> f64,
    ln_lo: f64,
    ln_hi: f64,
    region: Region,
    rel_tol: f64,
) -> QuadResult {
    let breaks = pair_breaks(v);
    quad::integrate_line(
        |l| {
            let w = weight(l);
            if w == 0.0 {
                return 0.0;
            }
            TAU * w * scaled_autocorrelation(v, l, region).value
        },
        ln_lo,
        ln_hi,
        &breaks,
        QuadOptions {
            abs_tol: 1e-300,
            rel_tol,
            max_intervals: 400,
        },
    )
}

const ROLL_LEVELS: u32 = 9;

fn log_sq(l: f64) -> f64 {
    l * l
}

/// Roll integral over `e^{-L} < |u| < e` for `L = 1, 2, 4, …, 256`.
fn roll_study(v: &Potential, rel_tol: f64) -> Study {
    let mut history = Vec::new();
    let mut total = moment(v, &log_sq, -1.0, 1.0, Region::Full, 1e-8).value;
    history.push((1.0, total));
    for k in 1..ROLL_LEVELS {
        let (a, b) = ((1u64 << k) as f64, (1u64 << (k - 1)) as f64);
        total += moment(v, &log_sq, -a, -b, Region::Full, 1e-8).value;
        history.push((a, total));
        if !total.is_finite() {
            break;
        }
    }
    finish(history, rel_tol)
}

/// Finiteness of the roll integral for `V₀` with the near/far split of the
/// `|u| < 1` part.
#[derive(Debug, Clone, PartialEq)]
pub struct V0Report {
    /// `∫_{|u|<e} F(|u|) (ln|u|)² du`.
    pub value: f64,
    pub converged: bool,
    /// `(L, value over e^{-L} < |u| < e)`.
    pub history: Vec<(f64, f64)>,
    /// Relative change at the last window doubling.
    pub last_change: f64,
    /// Part with `|u| < 1`.
    pub value_unit: f64,
    /// Part of `value_unit` with `|x - y| ≥ |x|/2`.
    pub near_origin: f64,
    /// Part of `value_unit` with `|x - y| < |x|/2`.
    pub near_diagonal: f64,
    /// Part with `1 ≤ |u| < e`.
    pub shell: f64,
}

pub fn verify_example_v0() -> V0Report {
    let v = Potential::v_zero();
    let study = roll_study(&v, DEFAULT_REL_TOL);
    let n = study.history.len();
    let last_change = if n >= 2 {
        ((study.history[n - 1].1 - study.history[n - 2].1) / study.history[n - 1].1).abs()
    } else {
        f64::INFINITY
    };
    let lo = -study.history.last().map_or(1.0, |h| h.0);
    let shell = moment(&v, &log_sq, 0.0, 1.0, Region::Full, 1e-8).value;
    let value_unit = study.value - shell;
    let near_diagonal = moment(&v, &log_sq, lo, 0.0, Region::Far, 1e-8).value;
    V0Report {
        value: study.value,
        converged: study.verdict == Verdict::Converged,
        history: study.history,
        last_change,
        value_unit,
        near_origin: value_unit - near_diagonal,
        near_diagonal,
        shell,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{cos, sin};

    #[test]
    fn v_zero_values() {
        let v = Potential::v_zero();
        assert_eq!(v.radial_value(exp(-1.0)), 0.0);
        let expect = 100.0 / powf(ln(10.0), 4.0);
        assert!((v.radial_value(0.1) - expect).abs() < 1e-12 * expect);
        assert!((expect - 3.556).abs() < 2e-3);
        assert_eq!(v.singular_points(), vec![Point2::ORIGIN]);
    }

    #[test]
    fn v_infinity_indicator() {
        let v = Potential::v_infinity(0.0).unwrap();
        assert_eq!(v.radial_value(3.0), 0.0);
        assert!(v.radial_value(3.0 + 1e-9) > 0.0);
        assert!(Potential::v_infinity(1.2).is_err());
        assert!(Potential::v_infinity(-0.1).is_err());
    }

    #[test]
    fn builtin_lookup_and_errors() {
        let g = Potential::builtin("gaussian", &[("a", 2.0)]).unwrap();
        assert_eq!(g.param("a"), Some(2.0));
        assert!(matches!(
            Potential::builtin("nope", &[]),
            Err(PotentialError::UnknownPotential(_))
        ));
        assert!(matches!(
            Potential::builtin("disk", &[("R", 1.0)]),
            Err(PotentialError::UnknownParameter { .. })
        ));
        assert!(Potential::builtin("disk", &[("radius", -1.0)]).is_err());
    }

    #[test]
    fn log_profile_matches_direct() {
        let pots = [
            Potential::v_zero(),
            Potential::v_infinity(0.5).unwrap(),
            Potential::gaussian(1.3).unwrap(),
            Potential::disk(2.0, -0.5).unwrap(),
            Potential::annulus_signed(1.0, 2.0, 1.0, -0.3).unwrap(),
        ];
        for v in &pots {
            for &r in &[0.01, 0.2, 0.9, 1.5, 3.5, 40.0] {
                let direct = r * r * v.radial_value(r).abs();
                assert!((v.log_profile(ln(r)) - direct).abs() <= 1e-13 * direct.max(1e-300), "{v:?} {r}");
            }
        }
    }

    #[test]
    fn rotation_invariance() {
        let pots = [
            Potential::v_zero(),
            Potential::v_infinity(0.3).unwrap(),
            Potential::gaussian(1.0).unwrap(),
            Potential::disk(1.0, 1.0).unwrap(),
            Potential::annulus_signed(0.5, 1.5, 2.0, -1.0).unwrap(),
            Potential::piecewise_radial(vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.0)]).unwrap(),
        ];
        for v in &pots {
            for &r in &[0.05, 0.25, 0.7, 1.2, 4.0] {
                let base = v.evaluate(Point2::new(r, 0.0));
                for k in 0..16 {
                    let t = TAU * k as f64 / 16.0;
                    let x = v.evaluate(Point2::new(r * cos(t), r * sin(t)));
                    assert!((x - base).abs() <= 1e-14 * base.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn disk_integrals() {
        for &r in &[0.5, 1.0, 2.0] {
            for &h in &[-1.0, 1.0] {
                let v = Potential::disk(r, h).unwrap();
                let u = v.integral_u().unwrap();
                assert!((u.value - h * PI * r * r).abs() < 1e-10);
                // The quadrature route agrees with the closed form as well.
                let numeric = u.history.last().unwrap().1;
                assert!((numeric - h * PI * r * r).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gaussian_and_v_zero_integrals() {
        let g = Potential::gaussian(1.0).unwrap().integral_u().unwrap();
        assert!((g.value - PI).abs() < 1e-12);
        assert!((g.history.last().unwrap().1 - PI).abs() < 1e-9);
        let v0 = Potential::v_zero();
        let u = v0.integral_u().unwrap();
        // Radial quadrature of 2π r V(r) dr after r = exp(-1/w); the
        // underflowed range w < 1/372 holds a few 1e-8 of the mass.
        let r = quad::integrate(
            |w| {
                let r = exp(-1.0 / w);
                let v = v0.radial_value(r);
                if v == 0.0 {
                    0.0
                } else {
                    TAU * r * r * v / (w * w)
                }
            },
            0.0,
            1.0 / ln(3.0),
            &[],
            QuadOptions::with_rel_tol(1e-12),
        );
        assert!(((u.value - r.value) / r.value).abs() < 1e-7);
        assert!(((u.history.last().unwrap().1 - r.value) / r.value).abs() < 1e-7);
    }

    #[test]
    fn piecewise_interpolation_and_integral() {
        let v = Potential::piecewise_radial(vec![(1.0, 2.0), (3.0, 4.0)]).unwrap();
        assert!((v.radial_value(2.0) - 3.0).abs() < 1e-15);
        assert_eq!(v.radial_value(0.5), 2.0);
        assert_eq!(v.radial_value(3.5), 0.0);
        let u = v.integral_u().unwrap();
        let num = u.history.last().unwrap().1;
        assert!((u.value - num).abs() < 1e-8 * u.value);
        assert!(Potential::piecewise_radial(vec![(1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(Potential::piecewise_radial(Vec::new()).is_err());
    }

    #[test]
    fn disk_autocorrelation() {
        let d = Potential::disk(1.0, 1.0).unwrap();
        assert!((d.autocorrelation(0.0).unwrap() - PI).abs() < 1e-10);
        assert_eq!(d.autocorrelation(2.0).unwrap(), 0.0);
        let lens = 2.0 * PI / 3.0 - sqrt(3.0) / 2.0;
        assert!((d.autocorrelation(1.0).unwrap() - lens).abs() < 1e-8);
        // Circle-intersection area at general separation.
        for &u in &[0.1, 0.5, 1.5, 1.9] {
            let expect = 2.0 * acos(u / 2.0) - u / 2.0 * sqrt(4.0 - u * u);
            assert!((d.autocorrelation(u).unwrap() - expect).abs() < 1e-8, "{u}");
        }
    }

    #[test]
    fn autocorrelation_continuity() {
        let g = Potential::gaussian(1.0).unwrap();
        // Closed form for the Gaussian: (π/2) e^{-u²/2}.
        for &u in &[0.0, 0.3, 1.0, 2.5] {
            let expect = PI / 2.0 * exp(-u * u / 2.0);
            assert!((g.autocorrelation(u).unwrap() - expect).abs() < 1e-8);
        }
        let v = Potential::v_zero();
        let mut prev: Option<f64> = None;
        for k in 0..6 {
            let u = 0.2 + 1e-3 / powf(2.0, k as f64);
            let f = v.autocorrelation(u).unwrap();
            if let Some(p) = prev {
                assert!((f - p).abs() < 1e-2 * f);
            }
            prev = Some(f);
        }
    }

    #[test]
    fn examples_hypotheses() {
        for &d in &[0.1, 0.5] {
            let v = Potential::v_infinity(d).unwrap();
            assert!(v.check_assumption(Condition::LnS, d).unwrap().converged);
            for &s in &[0.1, 0.5] {
                let r = v.check_assumption(Condition::SimonS, s).unwrap();
                assert_eq!(r.verdict, Verdict::Divergent);
            }
        }
        let v0 = Potential::v_zero();
        for &eta in &[0.05, 0.1, 0.2] {
            assert_eq!(v0.check_assumption(Condition::SimonEta, eta).unwrap().verdict, Verdict::Divergent);
        }
        assert!(v0.check_assumption(Condition::L1, 0.0).unwrap().converged);
        assert!(v0.check_assumption(Condition::SimonS, 1.0).unwrap().converged);
        assert!(v0.check_assumption(Condition::LnS, 0.5).unwrap().converged);
        assert!(Potential::v_infinity(0.0)
            .unwrap()
            .check_assumption(Condition::SimonS, 0.5)
            .map(|r| !r.converged)
            .unwrap());
        assert!(v0.check_assumption(Condition::LnS, 1.0).is_err());
        assert!(v0.check_assumption(Condition::SimonEta, 0.0).is_err());
    }

    #[test]
    fn simon_eta_implies_roll_on_builtins() {
        let pots = [
            Potential::gaussian(1.0).unwrap(),
            Potential::disk(1.0, 1.0).unwrap(),
            Potential::annulus_signed(1.0, 2.0, 1.0, -0.2).unwrap(),
        ];
        for v in &pots {
            if v.check_assumption(Condition::SimonEta, 0.5).unwrap().converged {
                assert!(v.check_assumption(Condition::Roll, 0.0).unwrap().converged);
            }
        }
    }

    #[test]
    fn v0_roll_finite() {
        let r = verify_example_v0();
        assert!(r.converged, "{r:?}");
        assert!(r.value.is_finite() && r.value > 0.0);
        assert!(r.last_change < 0.005);
        assert!(r.value >= r.value_unit);
        assert!(r.near_diagonal > 0.0 && r.near_origin > 0.0);
    }

    #[test]
    fn non_radial_roll_matches_radial_route() {
        let d = Potential::disk(1.0, 1.0).unwrap();
        let radial = d.check_assumption(Condition::Roll, 0.0).unwrap();
        let c = Potential::custom("disk_xy", 1.0, false, |p| if p.norm() < 1.0 { 1.0 } else { 0.0 }).unwrap();
        let cart = c.check_assumption(Condition::Roll, 0.0).unwrap();
        assert!(((cart.value - radial.value) / radial.value).abs() < 0.02);
        let l1 = c.check_assumption(Condition::L1, 0.0).unwrap();
        assert!((l1.value - PI).abs() < 0.01);
    }
}
