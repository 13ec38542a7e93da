//! Adaptive Gauss–Kronrod integration on the unit interval and on the
//! semi-infinite ranges `p ∈ [1, ∞)` and `ξ ∈ [0, ∞)`.
//!
//! Every integral is mapped onto a finite interval and handed to a global
//! adaptive 21-point Gauss–Kronrod scheme: the interval with the largest
//! error estimate is bisected until the summed estimate falls below
//! `max(abs_tol, rel_tol·|value|)` or the subdivision budget runs out.
//!
//! * `p`: `u = 1/p`, so `∫₁^∞ f(p) dp = ∫₀¹ f(1/u)/u² du`.
//! * `ξ`: `t = ξ/(ξ + s)`, so `∫₀^∞ f(ξ) dξ = ∫₀¹ f(s·t/(1−t))·s/(1−t)² dt`.
//!
//! Nested `p`–`ξ` integrals put `ξ` inside with a 10× tighter tolerance and
//! evaluate the outer nodes through [`Execution`], so the expensive inner
//! integrals fan out over the thread pool.

use thiserror::Error;

use crate::exec::Execution;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("integrand returned non-finite value {value} at abscissa {abscissa}")]
    NonFinite { abscissa: f64, value: f64 },
    #[error("invalid quadrature settings: {0}")]
    InvalidSpec(String),
}

/// Tolerances and budget for one integration axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of subintervals per axis.
    pub max_subdivisions: usize,
    /// How the outer nodes of nested integrals are evaluated.
    pub execution: Execution,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 60,
            execution: Execution::default(),
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(QuadratureError::InvalidSpec(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(QuadratureError::InvalidSpec(format!(
                "rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions < 10 {
            return Err(QuadratureError::InvalidSpec(format!(
                "max_subdivisions must be at least 10, got {}",
                self.max_subdivisions
            )));
        }
        Ok(())
    }

    /// Both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        QuadratureSpec {
            rel_tol: self.rel_tol / factor,
            abs_tol: self.abs_tol / factor,
            ..*self
        }
    }

    pub fn with_execution(self, execution: Execution) -> Self {
        QuadratureSpec { execution, ..self }
    }

    /// Settings for the inner axis of a nested integral.
    fn inner(&self) -> Self {
        QuadratureSpec {
            execution: Execution::Sequential,
            ..self.tightened(10.0)
        }
    }

    fn goal(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    /// Integrand evaluations, counting inner-axis evaluations of nested
    /// integrals.
    pub evaluations: usize,
    pub converged: bool,
}

impl IntegralResult {
    /// Tolerance-normalized check used by tests and the CLI.
    pub fn within(&self, spec: &QuadratureSpec) -> bool {
        self.error_estimate <= spec.goal(self.value)
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525361213,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

const RULE_POINTS: usize = 21;

/// One integrand sample. Nested integrals carry the inner error along.
#[derive(Debug, Clone, Copy)]
struct Sample {
    value: f64,
    error: f64,
    evaluations: usize,
    converged: bool,
}

impl Sample {
    fn exact(value: f64) -> Self {
        Sample {
            value,
            error: 0.0,
            evaluations: 1,
            converged: true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    rule_error: f64,
    inner_error: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn abscissae(lo: f64, hi: f64) -> [f64; RULE_POINTS] {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut xs = [center; RULE_POINTS];
    for j in 0..10 {
        xs[2 * j] = center - half * XGK[j];
        xs[2 * j + 1] = center + half * XGK[j];
    }
    xs
}

fn combine(lo: f64, hi: f64, fv: &[Sample]) -> Segment {
    let half = 0.5 * (hi - lo);
    let fc = fv[RULE_POINTS - 1].value;
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut res_abs = WGK[10] * fc.abs();
    let mut inner = WGK[10] * fv[RULE_POINTS - 1].error;
    for j in 0..10 {
        let (f1, f2) = (fv[2 * j].value, fv[2 * j + 1].value);
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        inner += WGK[j] * (fv[2 * j].error + fv[2 * j + 1].error);
        // Gauss nodes sit at the odd Kronrod indices.
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv[2 * j].value - mean).abs() + (fv[2 * j + 1].value - mean).abs());
    }
    let abs_half = half.abs();
    Segment {
        lo,
        hi,
        value: kronrod * half,
        rule_error: rescale_error(
            (kronrod - gauss) * half,
            res_abs * abs_half,
            res_asc * abs_half,
        ),
        inner_error: inner * abs_half,
    }
}

struct Tally {
    evaluations: usize,
    inner_converged: bool,
}

fn evaluate<F>(
    f: &F,
    ranges: &[(f64, f64)],
    execution: Execution,
    tally: &mut Tally,
) -> Result<Vec<Segment>, QuadratureError>
where
    F: Fn(f64) -> Result<Sample, QuadratureError> + Sync,
{
    let xs: Vec<f64> = ranges
        .iter()
        .flat_map(|&(lo, hi)| abscissae(lo, hi))
        .collect();
    let samples = execution.map(&xs, |&x| {
        let s = f(x)?;
        if !s.value.is_finite() {
            return Err(QuadratureError::NonFinite {
                abscissa: x,
                value: s.value,
            });
        }
        Ok(s)
    });
    let samples: Vec<Sample> = samples.into_iter().collect::<Result<_, _>>()?;
    for s in &samples {
        tally.evaluations += s.evaluations;
        tally.inner_converged &= s.converged;
    }
    Ok(ranges
        .iter()
        .zip(samples.chunks(RULE_POINTS))
        .map(|(&(lo, hi), fv)| combine(lo, hi, fv))
        .collect())
}

struct Outcome {
    result: IntegralResult,
    inner_error: f64,
    goal: f64,
}

fn adaptive<F>(
    f: &F,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
    execution: Execution,
) -> Result<IntegralResult, QuadratureError>
where
    F: Fn(f64) -> Result<Sample, QuadratureError> + Sync,
{
    adaptive_outcome(f, lo, hi, spec, execution).map(|o| o.result)
}

fn adaptive_outcome<F>(
    f: &F,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
    execution: Execution,
) -> Result<Outcome, QuadratureError>
where
    F: Fn(f64) -> Result<Sample, QuadratureError> + Sync,
{
    spec.validate()?;
    let mut tally = Tally {
        evaluations: 0,
        inner_converged: true,
    };
    let mut segments = evaluate(f, &[(lo, hi)], execution, &mut tally)?;

    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let rule_error: f64 = segments.iter().map(|s| s.rule_error).sum();
        let inner_error: f64 = segments.iter().map(|s| s.inner_error).sum();
        let total_error = rule_error + inner_error;
        let goal = spec.goal(value);

        let (worst, widest_err) =
            segments
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, s)| {
                    if s.rule_error > acc.1 {
                        (i, s.rule_error)
                    } else {
                        acc
                    }
                });
        let seg = segments[worst];
        let mid = 0.5 * (seg.lo + seg.hi);
        let too_narrow = !(seg.lo < mid && mid < seg.hi);

        // Bisection cannot reduce the inner-axis share of the error.
        let rule_done =
            widest_err <= 0.0 || (inner_error >= goal && rule_error <= 0.1 * inner_error);
        if total_error <= goal || rule_done || segments.len() >= spec.max_subdivisions || too_narrow
        {
            return Ok(Outcome {
                result: IntegralResult {
                    value,
                    error_estimate: total_error,
                    evaluations: tally.evaluations,
                    converged: total_error <= goal && tally.inner_converged,
                },
                inner_error,
                goal,
            });
        }

        let halves = evaluate(f, &[(seg.lo, mid), (mid, seg.hi)], execution, &mut tally)?;
        segments[worst] = halves[0];
        segments.push(halves[1]);
    }
}

/// Integrates `f` over `(0, 1)`. Integrable endpoint singularities are fine:
/// the rule never samples the endpoints.
pub fn integrate_unit<F>(f: F, spec: &QuadratureSpec) -> Result<IntegralResult, QuadratureError>
where
    F: Fn(f64) -> f64 + Sync,
{
    adaptive(
        &|u| Ok(Sample::exact(f(u))),
        0.0,
        1.0,
        spec,
        Execution::Sequential,
    )
}

/// `∫₁^∞ f(p) dp` through `u = 1/p`.
pub fn integrate_p<F>(f: F, spec: &QuadratureSpec) -> Result<IntegralResult, QuadratureError>
where
    F: Fn(f64) -> f64 + Sync,
{
    integrate_unit(|u| p_transformed(&f, u), spec)
}

/// `∫₀^∞ f(ξ) dξ` through `t = ξ/(ξ + xi_scale)`.
pub fn integrate_xi<F>(
    f: F,
    xi_scale: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult, QuadratureError>
where
    F: Fn(f64) -> f64 + Sync,
{
    check_scale(xi_scale)?;
    integrate_unit(|t| xi_transformed(&f, xi_scale, t), spec)
}

/// `∫₁^∞ dp ∫₀^∞ dξ f(p, ξ)` with `ξ` innermost.
///
/// `xi_scale(p)` picks the inner transform scale for each outer node; it
/// should sit near the decay length of `ξ ↦ f(p, ξ)`.
pub fn integrate_p_xi<F, S>(
    f: F,
    xi_scale: S,
    spec: &QuadratureSpec,
) -> Result<IntegralResult, QuadratureError>
where
    F: Fn(f64, f64) -> f64 + Sync,
    S: Fn(f64) -> f64 + Sync,
{
    spec.validate()?;
    let mut inner = spec.inner();
    let mut evaluations = 0;
    loop {
        let outer = |u: f64| -> Result<Sample, QuadratureError> {
            let p = 1.0 / u;
            let scale = xi_scale(p);
            check_scale(scale)?;
            let jac = 1.0 / (u * u);
            let r = adaptive(
                &|t| Ok(Sample::exact(xi_transformed(&|xi| f(p, xi), scale, t))),
                0.0,
                1.0,
                &inner,
                Execution::Sequential,
            )?;
            Ok(Sample {
                value: r.value * jac,
                error: r.error_estimate * jac,
                evaluations: r.evaluations,
                converged: r.converged,
            })
        };
        let out = adaptive_outcome(&outer, 0.0, 1.0, spec, spec.execution)?;
        evaluations += out.result.evaluations;
        // Inner errors are relative to each inner value; when the outer
        // integrand cancels they can exceed the outer goal on their own.
        let excess = out.inner_error / (0.5 * out.goal);
        if out.result.converged || excess <= 1.0 || inner.rel_tol <= MIN_INNER_REL_TOL {
            return Ok(IntegralResult {
                evaluations,
                ..out.result
            });
        }
        inner = inner.tightened((2.0 * excess).min(1e4));
        inner.rel_tol = inner.rel_tol.max(MIN_INNER_REL_TOL);
    }
}

const MIN_INNER_REL_TOL: f64 = 1e-14;

fn p_transformed<F: Fn(f64) -> f64>(f: &F, u: f64) -> f64 {
    f(1.0 / u) / (u * u)
}

fn xi_transformed<F: Fn(f64) -> f64>(f: &F, scale: f64, t: f64) -> f64 {
    let w = 1.0 - t;
    let v = f(scale * t / w);
    if v == 0.0 {
        0.0
    } else {
        v * scale / (w * w)
    }
}

fn check_scale(scale: f64) -> Result<(), QuadratureError> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(QuadratureError::InvalidSpec(format!(
            "xi scale must be positive and finite, got {scale}"
        )))
    }
}
