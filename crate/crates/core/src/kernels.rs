//! Per-mode quantities on the imaginary frequency axis.
//!
//! For a normalized normal wave-vector `p ≥ 1` (`p² = 1 − α²/ε₃ₓ`):
//!
//! * `s_i = √(M_i − 1 + p²)` in plate `i`,
//! * `P = √((M₃ − 1 + p²)/M₃)` for the extraordinary (TM) wave in the gap,
//! * TE reflection `(s_i − p)/(s_i + p)`, TM reflection `(s_i − M_i P)/(s_i + M_i P)`,
//! * `G₁ = 1 − r₁ᵀᴱ r₂ᵀᴱ e^{−2paξ√ε₃ₓ/c}`, `G₂ = 1 − r₁ᵀᴹ r₂ᵀᴹ e^{−2Paξ√ε₃ₓ/c}`.
//!
//! Differences such as `s_i − p` are formed from their conjugate products so
//! the reflection factors keep full relative precision as `p → ∞`.

use thiserror::Error;

use crate::constants::SPEED_OF_LIGHT;
use crate::materials::RatioSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("p must be >= 1, got {0}")]
    PBelowOne(f64),
    #[error("imaginary frequency must be non-negative, got {0}")]
    NegativeFrequency(f64),
    #[error("separation must be positive, got {0}")]
    NonpositiveSeparation(f64),
    #[error("permittivity ratios must be positive and finite: {0:?}")]
    InvalidRatios(RatioSet),
}

/// A point of the `(p, ξ)` integration domain at plate separation `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePoint {
    pub p: f64,
    /// Imaginary frequency, rad/s.
    pub xi: f64,
    /// Separation, m.
    pub a: f64,
}

impl ModePoint {
    pub fn new(p: f64, xi: f64, a: f64) -> Result<Self, KernelError> {
        let m = ModePoint { p, xi, a };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<(), KernelError> {
        if !(self.p >= 1.0) {
            return Err(KernelError::PBelowOne(self.p));
        }
        if !(self.xi >= 0.0) {
            return Err(KernelError::NegativeFrequency(self.xi));
        }
        if !(self.a > 0.0) {
            return Err(KernelError::NonpositiveSeparation(self.a));
        }
        Ok(())
    }

    /// `2aξ√ε₃ₓ/c`, the exponent per unit normal wave-vector.
    pub fn round_trip(&self, eps3x: f64) -> f64 {
        2.0 * self.a * self.xi * eps3x.sqrt() / SPEED_OF_LIGHT
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub s1: f64,
    pub s2: f64,
    /// `P`, the TM counterpart of `p` inside the anisotropic gap.
    pub p_tm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizedReflection {
    pub te1: f64,
    pub te2: f64,
    pub tm1: f64,
    pub tm2: f64,
}

impl PolarizedReflection {
    pub fn te_product(&self) -> f64 {
        self.te1 * self.te2
    }

    pub fn tm_product(&self) -> f64 {
        self.tm1 * self.tm2
    }

    pub fn swapped(&self) -> Self {
        PolarizedReflection {
            te1: self.te2,
            te2: self.te1,
            tm1: self.tm2,
            tm2: self.tm1,
        }
    }
}

fn check(ratios: &RatioSet, p: f64) -> Result<(), KernelError> {
    if !(p >= 1.0) {
        return Err(KernelError::PBelowOne(p));
    }
    if !ratios.is_valid() {
        return Err(KernelError::InvalidRatios(*ratios));
    }
    Ok(())
}

#[inline]
fn plate_s(m: f64, p: f64) -> f64 {
    ((m - 1.0) + p * p).sqrt()
}

#[inline]
pub(crate) fn tm_wavevector(m3: f64, p: f64) -> f64 {
    (((m3 - 1.0) + p * p) / m3).sqrt()
}

/// `(s − p)/(s + p)` as `(M − 1)/(s + p)²`.
#[inline]
fn te_factor(m: f64, s: f64, p: f64) -> f64 {
    let d = s + p;
    (m - 1.0) / (d * d)
}

/// `(s − MP)/(s + MP)` as `(s² − M²P²)/(s + MP)²` with
/// `s² − M²P² = M(1 − M) + (p² − 1)(M₃ − M²)/M₃`.
#[inline]
fn tm_factor(m: f64, m3: f64, s: f64, p: f64, p_tm: f64) -> f64 {
    let x = (p - 1.0) * (p + 1.0);
    let num = m * (1.0 - m) + x * (m3 - m * m) / m3;
    let d = s + m * p_tm;
    num / (d * d)
}

/// Unchecked core shared by the integrands: reflection factors and `P`.
#[inline]
pub(crate) fn reflections(r: &RatioSet, p: f64) -> (PolarizedReflection, f64) {
    let s1 = plate_s(r.m1, p);
    let s2 = plate_s(r.m2, p);
    let p_tm = tm_wavevector(r.m3, p);
    (
        PolarizedReflection {
            te1: te_factor(r.m1, s1, p),
            te2: te_factor(r.m2, s2, p),
            tm1: tm_factor(r.m1, r.m3, s1, p, p_tm),
            tm2: tm_factor(r.m2, r.m3, s2, p, p_tm),
        },
        p_tm,
    )
}

pub fn kernel_params(ratios: &RatioSet, p: f64) -> Result<KernelParams, KernelError> {
    check(ratios, p)?;
    Ok(KernelParams {
        s1: plate_s(ratios.m1, p),
        s2: plate_s(ratios.m2, p),
        p_tm: tm_wavevector(ratios.m3, p),
    })
}

pub fn reflection_pair(ratios: &RatioSet, p: f64) -> Result<PolarizedReflection, KernelError> {
    check(ratios, p)?;
    Ok(reflections(ratios, p).0)
}

/// TE dispersion function `G₁(iξ)`.
pub fn g1(mode: &ModePoint, ratios: &RatioSet) -> Result<f64, KernelError> {
    mode.check()?;
    check(ratios, mode.p)?;
    let (refl, _) = reflections(ratios, mode.p);
    Ok(1.0 - refl.te_product() * (-mode.p * mode.round_trip(ratios.eps3x)).exp())
}

/// TM dispersion function `G₂(iξ)`.
pub fn g2(mode: &ModePoint, ratios: &RatioSet) -> Result<f64, KernelError> {
    mode.check()?;
    check(ratios, mode.p)?;
    let (refl, p_tm) = reflections(ratios, mode.p);
    Ok(1.0 - refl.tm_product() * (-p_tm * mode.round_trip(ratios.eps3x)).exp())
}
