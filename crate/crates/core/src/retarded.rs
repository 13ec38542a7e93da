//! Large-separation (retarded) limit with static permittivities.
//!
//! With `ξ`-independent permittivities the frequency integral of the force
//! can be done in closed form per `p`:
//!
//! ```text
//! F = 3ħc/(16π²a⁴√ε₃ₓ) · Ψ_exact,
//! Ψ_exact = ∫₁^∞ dp/p² Li₄(r₁ᵀᴱr₂ᵀᴱ) + ∫₁^∞ p dp/P³ Li₄(r₁ᵀᴹr₂ᵀᴹ)
//! ```
//!
//! Replacing `Li₄(r)` by its leading term `r` gives the familiar factor
//! `Ψ = Ψ₁ + Ψ₂`, whose sign decides attraction (`Ψ > 0`) or repulsion
//! (`Ψ < 0`). `Ψ₁` is the TE part and does not depend on `M₃`; `Ψ₂` is the
//! TM part and carries the anisotropy of the gap.
//!
//! [`psi_exact_series`] is this crate's own refinement and is used as a
//! correctness oracle for [`psi`] and for the full Lifshitz integral.

use std::f64::consts::PI;

use thiserror::Error;

use crate::constants::{HBAR, SPEED_OF_LIGHT};
use crate::kernels::reflections;
use crate::lifshitz::ForceResult;
use crate::materials::{ratios, MaterialError, MaterialSystem, RatioSet};
use crate::polylog::polylog;
use crate::quadrature::{integrate_p, IntegralResult, QuadratureError, QuadratureSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RetardedError {
    #[error("permittivity ratios must be positive and finite, got ({0}, {1}, {2})")]
    NonpositiveRatio(f64, f64, f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("separation must be positive, got {0}")]
    NonpositiveSeparation(f64),
    #[error("bose integral: {0}")]
    BoseDomain(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiBreakdown {
    pub psi: f64,
    /// TE part, independent of `M₃`.
    pub psi1: f64,
    /// TM part.
    pub psi2: f64,
    pub error_estimate: f64,
    pub converged: bool,
}

fn checked(m1: f64, m2: f64, m3: f64) -> Result<RatioSet, RetardedError> {
    let r = RatioSet::from_ratios(m1, m2, m3);
    if r.is_valid() {
        Ok(r)
    } else {
        Err(RetardedError::NonpositiveRatio(m1, m2, m3))
    }
}

#[derive(Clone, Copy)]
enum Part {
    Te,
    Tm,
    Both,
}

fn integrand(r: &RatioSet, p: f64, part: Part, lift: fn(f64) -> f64) -> f64 {
    let (refl, p_tm) = reflections(r, p);
    let te = || lift(refl.te_product()) / (p * p);
    let tm = || lift(refl.tm_product()) * p / (p_tm * p_tm * p_tm);
    match part {
        Part::Te => te(),
        Part::Tm => tm(),
        Part::Both => te() + tm(),
    }
}

fn leading(r: f64) -> f64 {
    r
}

fn li4(r: f64) -> f64 {
    polylog(4, r)
}

fn integrate_part(
    r: &RatioSet,
    part: Part,
    lift: fn(f64) -> f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult, RetardedError> {
    Ok(integrate_p(|p| integrand(r, p, part, lift), spec)?)
}

/// `Ψ₁(M₁, M₂) = ∫₁^∞ dp/p² · r₁ᵀᴱ r₂ᵀᴱ`.
pub fn psi1(m1: f64, m2: f64, spec: &QuadratureSpec) -> Result<IntegralResult, RetardedError> {
    let r = checked(m1, m2, 1.0)?;
    integrate_part(&r, Part::Te, leading, spec)
}

/// `Ψ₂(M₁, M₂, M₃) = ∫₁^∞ p dp/P³ · r₁ᵀᴹ r₂ᵀᴹ`.
pub fn psi2(
    m1: f64,
    m2: f64,
    m3: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult, RetardedError> {
    let r = checked(m1, m2, m3)?;
    integrate_part(&r, Part::Tm, leading, spec)
}

fn breakdown(
    m1: f64,
    m2: f64,
    m3: f64,
    lift: fn(f64) -> f64,
    spec: &QuadratureSpec,
) -> Result<PsiBreakdown, RetardedError> {
    let r = checked(m1, m2, m3)?;
    let total = integrate_part(&r, Part::Both, lift, spec)?;
    let te = integrate_part(&r, Part::Te, lift, spec)?;
    let tm = integrate_part(&r, Part::Tm, lift, spec)?;
    Ok(PsiBreakdown {
        psi: total.value,
        psi1: te.value,
        psi2: tm.value,
        error_estimate: total.error_estimate + te.error_estimate + tm.error_estimate,
        converged: total.converged && te.converged && tm.converged,
    })
}

/// `Ψ` from the combined integrand, with `Ψ₁` and `Ψ₂` computed separately.
pub fn psi(
    m1: f64,
    m2: f64,
    m3: f64,
    spec: &QuadratureSpec,
) -> Result<PsiBreakdown, RetardedError> {
    breakdown(m1, m2, m3, leading, spec)
}

/// Exact static-limit reduction: every reflection product `r` replaced by
/// `Li₄(r)`, i.e. the Bose-type frequency integral done exactly.
pub fn psi_exact_series(
    m1: f64,
    m2: f64,
    m3: f64,
    spec: &QuadratureSpec,
) -> Result<PsiBreakdown, RetardedError> {
    breakdown(m1, m2, m3, li4, spec)
}

/// Upper bound on `|psi_exact_series − psi|`, from
/// `|Li₄(r) − r| ≤ Σ_{k≥2} |r|^k/k⁴ ≤ |r|²/(16(1 − |r|))`.
pub fn series_remainder_bound(
    m1: f64,
    m2: f64,
    m3: f64,
    spec: &QuadratureSpec,
) -> Result<f64, RetardedError> {
    let r = checked(m1, m2, m3)?;
    let bound = |x: f64| x * x / (16.0 * (1.0 - x.abs()));
    let res = integrate_p(
        |p| {
            let (refl, p_tm) = reflections(&r, p);
            bound(refl.te_product()) / (p * p) + bound(refl.tm_product()) * p / p_tm.powi(3)
        },
        spec,
    )?;
    Ok(res.value + res.error_estimate)
}

/// `3ħc/(16π²a⁴√ε₃ₓ)`, N/m².
pub fn retarded_prefactor(a: f64, eps3x: f64) -> f64 {
    3.0 * HBAR * SPEED_OF_LIGHT / (16.0 * PI * PI * a.powi(4) * eps3x.sqrt())
}

/// Large-separation force `3ħc/(16π²a⁴√ε₃ₓ)·Ψ`. Positive = attractive.
pub fn force_retarded(
    system: &MaterialSystem,
    a: f64,
    spec: &QuadratureSpec,
) -> Result<ForceResult, RetardedError> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(RetardedError::NonpositiveSeparation(a));
    }
    system.ensure_valid()?;
    if !system.is_static() {
        return Err(MaterialError::NotStatic.into());
    }
    let r = ratios(system, 0.0)?;
    let b = psi(r.m1, r.m2, r.m3, spec)?;
    let k = retarded_prefactor(a, r.eps3x);
    Ok(ForceResult {
        value: k * b.psi,
        error_estimate: k * b.error_estimate,
        separation: a,
        converged: b.converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoseMode {
    /// `n!/m`
    Approx,
    /// `n!·Σ_{k≥1} m^{−k}/k^{n+1}`
    Exact,
}

/// `∫₀^∞ xⁿ dx/(m eˣ − 1)`.
pub fn bose_integral(m: f64, n: u32, mode: BoseMode) -> Result<f64, RetardedError> {
    if !(1..=6).contains(&n) {
        return Err(RetardedError::BoseDomain(format!(
            "n must be in 1..=6, got {n}"
        )));
    }
    let n_fact: f64 = (1..=n).map(f64::from).product();
    match mode {
        BoseMode::Approx => {
            if !(m > 0.0 && m.is_finite()) {
                return Err(RetardedError::BoseDomain(format!(
                    "m must be positive, got {m}"
                )));
            }
            Ok(n_fact / m)
        }
        BoseMode::Exact => {
            if !(m >= 1.0 && m.is_finite()) {
                return Err(RetardedError::BoseDomain(format!(
                    "exact series needs m >= 1, got {m}"
                )));
            }
            Ok(n_fact * polylog(n + 1, 1.0 / m))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifshitz::casimir_force;
    use crate::quadrature::integrate_xi;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn vanishes_without_contrast() {
        assert_eq!(psi1(1.0, 1.0, &spec()).unwrap().value, 0.0);
        assert_eq!(psi2(1.0, 1.0, 1.0, &spec()).unwrap().value, 0.0);
        for m3 in [0.1, 1.0, 7.0] {
            let b = psi(1.0, 1.0, m3, &spec()).unwrap();
            assert_eq!(b.psi1, 0.0);
            if m3 == 1.0 {
                assert_eq!(b.psi, 0.0);
            }
        }
        let b = psi_exact_series(1.0, 1.0, 1.0, &spec()).unwrap();
        assert_eq!((b.psi, b.psi1, b.psi2), (0.0, 0.0, 0.0));
        assert_eq!(psi1(1.0, 0.3, &spec()).unwrap().value, 0.0);
    }

    #[test]
    fn grid_oracle_values() {
        let s = spec().tightened(10.0);
        let cases = [
            (psi1(1.5, 0.8, &s).unwrap().value, -1.152_776_830_8e-3),
            (psi1(1.5, 1.5, &s).unwrap().value, 2.290_808_920_6e-3),
            (psi2(1.5, 0.8, 2.0, &s).unwrap().value, -2.008_494_724_2e-2),
            (psi(1.5, 0.8, 1.0, &s).unwrap().psi, -1.702_201_184_8e-2),
        ];
        for (got, want) in cases {
            assert!((got / want - 1.0).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn signs() {
        assert!(psi1(1.5, 0.8, &spec()).unwrap().value < 0.0);
        assert!(psi1(1.5, 1.5, &spec()).unwrap().value > 0.0);
        assert!(psi2(1.3, 1.3, 1.0, &spec()).unwrap().value > 0.0);
        assert!(psi(1.5, 0.8, 1.0, &spec()).unwrap().psi < 0.0);
        assert!(psi(1.5, 1.1, 1.0, &spec()).unwrap().psi > 0.0);
    }

    #[test]
    fn rejects_nonpositive_ratios() {
        assert!(matches!(
            psi1(0.0, 1.0, &spec()),
            Err(RetardedError::NonpositiveRatio(..))
        ));
        assert!(psi(1.0, 1.0, -2.0, &spec()).is_err());
    }

    #[test]
    fn breakdown_is_additive_and_m3_free_in_psi1() {
        let a = psi(1.5, 0.8, 0.3, &spec()).unwrap();
        let b = psi(1.5, 0.8, 4.0, &spec()).unwrap();
        assert_eq!(a.psi1, b.psi1);
        for x in [a, b] {
            assert!((x.psi - x.psi1 - x.psi2).abs() <= 2.0 * x.error_estimate);
        }
    }

    #[test]
    fn bose_integral_modes() {
        let exact = bose_integral(1.0, 3, BoseMode::Exact).unwrap();
        assert!((exact / (PI.powi(4) / 15.0) - 1.0).abs() < 1e-14);
        assert_eq!(bose_integral(1.0, 3, BoseMode::Approx).unwrap(), 6.0);
        let big = bose_integral(1e6, 3, BoseMode::Exact).unwrap();
        assert!((big / 6e-6 - 1.0).abs() < 1e-6);
        assert!(bose_integral(0.5, 3, BoseMode::Exact).is_err());
        assert!(bose_integral(2.0, 0, BoseMode::Exact).is_err());
        assert!(bose_integral(2.0, 7, BoseMode::Approx).is_err());
    }

    #[test]
    fn bose_exact_matches_quadrature() {
        for &(m, n) in &[(1.0, 1u32), (1.0, 3), (1.7, 2), (4.0, 5), (1.01, 6)] {
            let q = integrate_xi(
                |x| x.powi(n as i32) / (m * x.exp() - 1.0),
                1.0,
                &spec().tightened(100.0),
            )
            .unwrap();
            let e = bose_integral(m, n, BoseMode::Exact).unwrap();
            assert!(
                (q.value / e - 1.0).abs() < 1e-9,
                "m={m} n={n}: {} vs {e}",
                q.value
            );
        }
    }

    #[test]
    fn exact_series_stays_within_remainder_bound() {
        for &(m1, m2, m3) in &[
            (1.5, 0.8, 1.0),
            (1.5, 1.1, 2.0),
            (3.0, 3.0, 0.4),
            (0.3, 2.0, 6.0),
        ] {
            let s = spec().tightened(100.0);
            let approx = psi(m1, m2, m3, &s).unwrap();
            let exact = psi_exact_series(m1, m2, m3, &s).unwrap();
            let bound = series_remainder_bound(m1, m2, m3, &s).unwrap();
            assert!((exact.psi - approx.psi).abs() <= bound, "({m1},{m2},{m3})");
        }
    }

    #[test]
    fn retarded_force_scaling_and_rejections() {
        let sys = MaterialSystem::constant(3.0, 1.6, 2.0, 2.0);
        let f1 = force_retarded(&sys, 1e-6, &spec()).unwrap();
        let f2 = force_retarded(&sys, 2e-6, &spec()).unwrap();
        assert!(f1.value < 0.0);
        assert!((f1.value / f2.value - 16.0).abs() < 1e-12);
        let same = MaterialSystem::constant(2.0, 2.0, 2.0, 2.0);
        assert_eq!(force_retarded(&same, 1e-6, &spec()).unwrap().value, 0.0);
        let disp = MaterialSystem {
            eps1: crate::PermittivityModel::oscillator([(1.0, 1e16)]),
            ..sys
        };
        let err = force_retarded(&disp, 1e-6, &spec()).unwrap_err();
        assert!(err
            .to_string()
            .contains("retarded limit requires static permittivities"));
    }

    #[test]
    fn lifshitz_force_reduces_to_exact_series() {
        let sys = MaterialSystem::constant(3.0, 1.6, 2.0, 2.0);
        let a = 1e-6;
        let s = spec().tightened(10.0);
        let f = casimir_force(&sys, a, &s).unwrap();
        let series = psi_exact_series(1.5, 0.8, 1.0, &s).unwrap();
        let reduced = f.value / retarded_prefactor(a, 2.0);
        assert!((reduced / series.psi - 1.0).abs() < 1e-6);
    }
}
