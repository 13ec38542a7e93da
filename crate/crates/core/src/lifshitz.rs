//! Casimir energy and force per unit area at zero temperature.
//!
//! ```text
//! E(a) = ħ/(4π²c²) ∫₁^∞ p dp ∫₀^∞ ε₃ₓ ξ² [ln G₁ + ln G₂] dξ
//! F(a) = ∂E/∂a = ħ/(2π²c³) ∫₁^∞ p dp ∫₀^∞ ε₃ₓ^{3/2} ξ³ [p(1−G₁)/G₁ + P(1−G₂)/G₂] dξ
//! ```
//!
//! `F` is defined as `+∂E/∂a` and **positive means attractive**; repulsive
//! configurations give negative values. This is the opposite of the usual
//! mechanics convention and is kept deliberately.
//!
//! Both integrals are evaluated in the dimensionless frequency
//! `x = ξ/ξ_s`, `ξ_s = c/(2a√ε₃ₓ(0))`, which makes the integrand
//! independent of `a` for static permittivities: `a⁴F` and `a³E` are then
//! exactly constant.

use std::f64::consts::PI;

use thiserror::Error;

use crate::constants::{HBAR, SPEED_OF_LIGHT};
use crate::kernels::{reflections, tm_wavevector};
use crate::materials::{ratios, MaterialError, MaterialSystem, PermittivityModel, RatioSet};
use crate::quadrature::{integrate_p_xi, IntegralResult, QuadratureError, QuadratureSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LifshitzError {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("separation must be positive and finite, got {0}")]
    NonpositiveSeparation(f64),
    #[error("finite-difference step must satisfy 0 < h < a/10 (h = {h}, a = {a})")]
    InvalidStep { h: f64, a: f64 },
}

/// Force per unit area, N/m². Positive = attractive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceResult {
    pub value: f64,
    pub error_estimate: f64,
    /// m
    pub separation: f64,
    pub converged: bool,
}

/// Energy per unit area, J/m².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyResult {
    pub value: f64,
    pub error_estimate: f64,
    pub separation: f64,
    pub converged: bool,
}

fn check_separation(a: f64) -> Result<(), LifshitzError> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(LifshitzError::NonpositiveSeparation(a))
    }
}

/// `c/(2a√ε)`, rad/s.
pub(crate) fn xi_scale(a: f64, eps3x_static: f64) -> f64 {
    SPEED_OF_LIGHT / (2.0 * a * eps3x_static.sqrt())
}

/// Imaginary-frequency view of a validated system in units of `ξ_s`.
struct Reduced<'a> {
    system: &'a MaterialSystem,
    scale: f64,
    eps0: f64,
    frozen: Option<RatioSet>,
}

impl<'a> Reduced<'a> {
    fn new(system: &'a MaterialSystem, a: f64) -> Result<Self, LifshitzError> {
        check_separation(a)?;
        system.ensure_valid()?;
        let r0 = ratios(system, 0.0)?;
        Ok(Reduced {
            system,
            scale: xi_scale(a, r0.eps3x),
            eps0: r0.eps3x,
            frozen: system.is_static().then_some(r0),
        })
    }

    #[inline]
    fn at(&self, x: f64) -> RatioSet {
        match self.frozen {
            Some(r) => r,
            None => ratios(self.system, x * self.scale).expect("validated system, x >= 0"),
        }
    }

    /// Inner transform scale: the slower of the TE and TM decay lengths.
    fn inner_scale(&self, p: f64) -> f64 {
        let m3 = self.frozen.map(|r| r.m3).unwrap_or_else(|| self.at(0.0).m3);
        1.0 / p.min(tm_wavevector(m3, p))
    }
}

fn force_integrand(red: &Reduced<'_>, p: f64, x: f64) -> f64 {
    let r = red.at(x);
    let w = r.eps3x / red.eps0;
    let sw = w.sqrt();
    let (refl, p_tm) = reflections(&r, p);
    let y1 = refl.te_product() * (-p * x * sw).exp();
    let y2 = refl.tm_product() * (-p_tm * x * sw).exp();
    let bracket = p * y1 / (1.0 - y1) + p_tm * y2 / (1.0 - y2);
    if bracket == 0.0 {
        return 0.0;
    }
    p * w * sw * x * x * x * bracket
}

fn energy_integrand(red: &Reduced<'_>, p: f64, x: f64) -> f64 {
    let r = red.at(x);
    let w = r.eps3x / red.eps0;
    let sw = w.sqrt();
    let (refl, p_tm) = reflections(&r, p);
    let y1 = refl.te_product() * (-p * x * sw).exp();
    let y2 = refl.tm_product() * (-p_tm * x * sw).exp();
    let logs = (-y1).ln_1p() + (-y2).ln_1p();
    if logs == 0.0 {
        return 0.0;
    }
    p * w * x * x * logs
}

fn scaled(r: IntegralResult, prefactor: f64) -> (f64, f64, bool) {
    (
        r.value * prefactor,
        r.error_estimate * prefactor.abs(),
        r.converged,
    )
}

/// Energy per unit area at separation `a` (J/m²).
pub fn casimir_energy(
    system: &MaterialSystem,
    a: f64,
    spec: &QuadratureSpec,
) -> Result<EnergyResult, LifshitzError> {
    let red = Reduced::new(system, a)?;
    let r = integrate_p_xi(
        |p, x| energy_integrand(&red, p, x),
        |p| red.inner_scale(p),
        spec,
    )?;
    let prefactor = HBAR * SPEED_OF_LIGHT / (32.0 * PI * PI * a.powi(3) * red.eps0.sqrt());
    let (value, error_estimate, converged) = scaled(r, prefactor);
    Ok(EnergyResult {
        value,
        error_estimate,
        separation: a,
        converged,
    })
}

/// Force per unit area at separation `a` (N/m², positive = attractive).
pub fn casimir_force(
    system: &MaterialSystem,
    a: f64,
    spec: &QuadratureSpec,
) -> Result<ForceResult, LifshitzError> {
    let red = Reduced::new(system, a)?;
    let r = integrate_p_xi(
        |p, x| force_integrand(&red, p, x),
        |p| red.inner_scale(p),
        spec,
    )?;
    let prefactor = HBAR * SPEED_OF_LIGHT / (32.0 * PI * PI * a.powi(4) * red.eps0.sqrt());
    let (value, error_estimate, converged) = scaled(r, prefactor);
    Ok(ForceResult {
        value,
        error_estimate,
        separation: a,
        converged,
    })
}

/// Force for an isotropic gap, written out from the classic three-layer
/// formula
///
/// ```text
/// F = ħ/(2π²c³) ∫₁^∞ p² dp ∫₀^∞ ε₃^{3/2} ξ³ { [ (s₁+p)(s₂+p)/((s₁−p)(s₂−p)) e^X − 1 ]⁻¹
///                                         + [ (s₁+ε₁p/ε₃)(s₂+ε₂p/ε₃)/((s₁−ε₁p/ε₃)(s₂−ε₂p/ε₃)) e^X − 1 ]⁻¹ } dξ
/// ```
///
/// with `X = 2paξ√ε₃/c`. It shares no kernel code with [`casimir_force`]
/// and serves as its cross-check.
pub fn casimir_force_isotropic(
    eps1: &PermittivityModel,
    eps2: &PermittivityModel,
    eps3: &PermittivityModel,
    a: f64,
    spec: &QuadratureSpec,
) -> Result<ForceResult, LifshitzError> {
    check_separation(a)?;
    let system = MaterialSystem::new(eps1.clone(), eps2.clone(), eps3.clone(), eps3.clone());
    system.ensure_valid()?;

    let e30 = eps3.at(0.0)?;
    let base = xi_scale(a, e30);
    let dispersive = !system.is_static();
    let statics = (eps1.at(0.0)?, eps2.at(0.0)?, e30);

    let integrand = |p: f64, x: f64| -> f64 {
        let (e1, e2, e3) = if dispersive {
            let xi = x * base;
            (
                eps1.at(xi).expect("xi >= 0"),
                eps2.at(xi).expect("xi >= 0"),
                eps3.at(xi).expect("xi >= 0"),
            )
        } else {
            statics
        };
        let (n1, n2) = (e1 / e3, e2 / e3);
        let pp = p * p;
        let s1 = (n1 - 1.0 + pp).sqrt();
        let s2 = (n2 - 1.0 + pp).sqrt();
        // s − p = (n − 1)/(s + p);  s − n p = (n − 1)(1 − (n + 1)p²)/(s + n p)
        let te_minus = ((n1 - 1.0) / (s1 + p)) * ((n2 - 1.0) / (s2 + p));
        let te_plus = (s1 + p) * (s2 + p);
        let tm_minus = ((n1 - 1.0) * (1.0 - (n1 + 1.0) * pp) / (s1 + n1 * p))
            * ((n2 - 1.0) * (1.0 - (n2 + 1.0) * pp) / (s2 + n2 * p));
        let tm_plus = (s1 + n1 * p) * (s2 + n2 * p);

        let w = e3 / e30;
        let growth = (p * x * w.sqrt()).exp();
        let inv = |minus: f64, plus: f64| {
            if minus == 0.0 {
                0.0
            } else {
                1.0 / (plus / minus * growth - 1.0)
            }
        };
        let braces = inv(te_minus, te_plus) + inv(tm_minus, tm_plus);
        if braces == 0.0 {
            return 0.0;
        }
        pp * w.powf(1.5) * x.powi(3) * braces
    };

    let r = integrate_p_xi(integrand, |p| 1.0 / p, spec)?;
    let prefactor = HBAR * SPEED_OF_LIGHT / (32.0 * PI * PI * a.powi(4) * e30.sqrt());
    let (value, error_estimate, converged) = scaled(r, prefactor);
    Ok(ForceResult {
        value,
        error_estimate,
        separation: a,
        converged,
    })
}

/// Centered difference `[E(a+h) − E(a−h)]/(2h)`.
pub fn force_from_energy_fd(
    system: &MaterialSystem,
    a: f64,
    h: f64,
    spec: &QuadratureSpec,
) -> Result<f64, LifshitzError> {
    check_separation(a)?;
    if !(h > 0.0 && h < a / 10.0) {
        return Err(LifshitzError::InvalidStep { h, a });
    }
    let plus = casimir_energy(system, a + h, spec)?;
    let minus = casimir_energy(system, a - h, spec)?;
    Ok((plus.value - minus.value) / (2.0 * h))
}
