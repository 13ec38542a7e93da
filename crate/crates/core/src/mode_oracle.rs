//! Surface-mode oracle: an independent route to `G₁·G₂` through the
//! transverse-field eigenproblem of each region and boundary matching.
//!
//! Fields vary as `exp(iK₀(αx + γz) − iωt)` with `K₀ = ω/c`. On the
//! imaginary axis `ω = iξ` the in-plane component satisfies
//! `α² = ε₃ₓ(1 − p²) ≤ 0` and every `γ` is real, so the `z`-dependence
//! becomes `exp(−(ξ/c)γz)`. Region I (`z < 0`, `ε₁`) keeps the modes with
//! `γ < 0`, region II (`z > a`, `ε₂`) the ones with `γ > 0`, and the
//! uniaxial gap (region III) keeps all four.
//!
//! The determinant of the matching conditions should carry its entire
//! separation dependence in `e^{(q⊥+q∥)a}·G₁·G₂`. [`factorization_residual`]
//! measures how far that holds.

use nalgebra::{Complex, Matrix4};
use thiserror::Error;

use crate::constants::SPEED_OF_LIGHT;
use crate::kernels::{g1, g2, tm_wavevector, KernelError, ModePoint};
use crate::materials::{ratios, MaterialError, MaterialSystem};

type C64 = Complex<f64>;

const EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModeError {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(
        "region {region:?}: {polarization} mode has gamma^2 = {gamma_sq}, operator is defective"
    )]
    Degenerate {
        region: Region,
        polarization: &'static str,
        gamma_sq: f64,
    },
    #[error("region {region:?}: numeric eigenvalue {numeric} disagrees with closed form {closed}")]
    EigenMismatch {
        region: Region,
        numeric: String,
        closed: String,
    },
    #[error("region III eigenvector matrix is singular")]
    Singular,
    #[error("p must be >= 1, got {0}")]
    PBelowOne(f64),
    #[error("separation must be positive, got {0}")]
    NonpositiveSeparation(f64),
    #[error("at least 3 distinct separations are required, got {0}")]
    TooFewSeparations(usize),
    #[error("dispersion function out of regime: G1 = {g1}, G2 = {g2}")]
    OutOfRegime { g1: f64, g2: f64 },
    #[error("determinant has a non-negligible imaginary part: {0}")]
    NotReal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// `z < 0`, permittivity `ε₁`.
    I,
    /// `z > a`, permittivity `ε₂`.
    II,
    /// The uniaxial gap `0 < z < a`.
    III,
}

/// Permittivities and squared decay parameters at one `(α², ξ)`.
///
/// `t₁² = α² − ε₁`, `t₂² = α² − ε₂`, `t₃ₓ² = α² − ε₃ₓ`,
/// `t₃z² = (α² − ε₃z)·ε₃ₓ/ε₃z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSystem {
    pub alpha_sq: f64,
    /// rad/s
    pub xi: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3x: f64,
    pub eps3z: f64,
}

impl ModeSystem {
    pub fn new(system: &MaterialSystem, alpha_sq: f64, xi: f64) -> Result<Self, ModeError> {
        system.ensure_valid()?;
        Ok(ModeSystem {
            alpha_sq,
            xi,
            eps1: system.eps1.at(xi)?,
            eps2: system.eps2.at(xi)?,
            eps3x: system.eps3x.at(xi)?,
            eps3z: system.eps3z.at(xi)?,
        })
    }

    /// The imaginary-axis point with `α² = ε₃ₓ(ξ)(1 − p²)`.
    pub fn imaginary_axis(system: &MaterialSystem, p: f64, xi: f64) -> Result<Self, ModeError> {
        if !(p >= 1.0) {
            return Err(ModeError::PBelowOne(p));
        }
        let eps3x = system.eps3x.at(xi)?;
        Self::new(system, eps3x * (1.0 - p * p), xi)
    }

    pub fn t1_sq(&self) -> f64 {
        self.alpha_sq - self.eps1
    }

    pub fn t2_sq(&self) -> f64 {
        self.alpha_sq - self.eps2
    }

    pub fn t3x_sq(&self) -> f64 {
        self.alpha_sq - self.eps3x
    }

    pub fn t3z_sq(&self) -> f64 {
        (self.alpha_sq - self.eps3z) * self.eps3x / self.eps3z
    }

    fn region_eps(&self, region: Region) -> (f64, f64) {
        match region {
            Region::I => (self.eps1, self.eps1),
            Region::II => (self.eps2, self.eps2),
            Region::III => (self.eps3x, self.eps3z),
        }
    }

    /// Propagation operator acting on `(eₓ, e_y, cb_y, cbₓ)`.
    pub fn operator(&self, region: Region) -> Matrix4<f64> {
        let (ex, ez) = self.region_eps(region);
        let a2 = self.alpha_sq;
        #[rustfmt::skip]
        let m = Matrix4::new(
            0.0, 0.0,      1.0 - a2 / ez, 0.0,
            0.0, 0.0,      0.0,           -1.0,
            ex,  0.0,      0.0,           0.0,
            0.0, a2 - ex,  0.0,           0.0,
        );
        m
    }
}

/// Eigenvectors (columns of `w`) and eigenvalues of one region.
///
/// Column order is `[TE γ₋, TM γ₋, TE γ₊, TM γ₊]` with `γ₋ = −it`, `γ₊ = it`;
/// on the imaginary axis `γ₋ = −κ < 0`. Eigenvectors are normalised so the
/// magnetic entry is 1: TE `(0, −1/γ, 0, 1)`, TM `(γ/εₓ, 0, 1, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionEigensystem {
    pub region: Region,
    pub w: Matrix4<C64>,
    pub gammas: [C64; 4],
}

fn principal_sqrt(x: f64) -> C64 {
    if x >= 0.0 {
        C64::new(x.sqrt(), 0.0)
    } else {
        C64::new(0.0, (-x).sqrt())
    }
}

/// Diagonalises the region operator numerically and checks the result
/// against the closed-form `±it` rates.
pub fn region_eigensystem(
    region: Region,
    alpha_sq: f64,
    system: &MaterialSystem,
    xi: f64,
) -> Result<RegionEigensystem, ModeError> {
    ModeSystem::new(system, alpha_sq, xi)?.eigensystem(region)
}

impl ModeSystem {
    pub fn eigensystem(&self, region: Region) -> Result<RegionEigensystem, ModeError> {
        let (ex, ez) = self.region_eps(region);
        let op = self.operator(region);
        let scale = ex.abs().max(self.alpha_sq.abs()).max(1.0);
        let gamma_sq = [
            ("TE", ex - self.alpha_sq),
            ("TM", ex * (1.0 - self.alpha_sq / ez)),
        ];
        for &(polarization, g2) in &gamma_sq {
            if !(g2.abs() > 1e-12 * scale) {
                return Err(ModeError::Degenerate {
                    region,
                    polarization,
                    gamma_sq: g2,
                });
            }
        }
        let g_te = principal_sqrt(gamma_sq[0].1);
        let g_tm = principal_sqrt(gamma_sq[1].1);
        let closed = [-g_te, -g_tm, g_te, g_tm];

        let mut numeric: Vec<C64> = op.complex_eigenvalues().iter().copied().collect();
        let mut gammas = [C64::new(0.0, 0.0); 4];
        for (slot, &want) in gammas.iter_mut().zip(&closed) {
            let (idx, _) = numeric
                .iter()
                .enumerate()
                .map(|(i, g)| (i, (g - want).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("four eigenvalues");
            let got = numeric.swap_remove(idx);
            if (got - want).norm() > EIGEN_TOL * want.norm() {
                return Err(ModeError::EigenMismatch {
                    region,
                    numeric: got.to_string(),
                    closed: want.to_string(),
                });
            }
            *slot = got;
        }

        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let mut w = Matrix4::<C64>::zeros();
        for (j, &g) in gammas.iter().enumerate() {
            let col = if j % 2 == 0 {
                [zero, -one / g, zero, one]
            } else {
                [g / ex, zero, one, zero]
            };
            for (i, v) in col.into_iter().enumerate() {
                w[(i, j)] = v;
            }
        }

        let opc = op.map(|v| C64::new(v, 0.0));
        for (j, &g) in gammas.iter().enumerate() {
            let col = w.column(j);
            let resid = (opc * col - col * g).norm();
            if resid > EIGEN_TOL * scale * col.norm() {
                return Err(ModeError::EigenMismatch {
                    region,
                    numeric: format!("eigenvector residual {resid:e}"),
                    closed: g.to_string(),
                });
            }
        }
        Ok(RegionEigensystem { region, w, gammas })
    }
}

/// Normal decay rates `(q⊥, q∥) = (pξ√ε₃ₓ/c, Pξ√ε₃ₓ/c)` in 1/m.
pub fn mode_rates(system: &MaterialSystem, p: f64, xi: f64) -> Result<(f64, f64), ModeError> {
    let r = ratios(system, xi)?;
    let k = xi * r.eps3x.sqrt() / SPEED_OF_LIGHT;
    Ok((p * k, tm_wavevector(r.m3, p) * k))
}

/// Determinant of the 4×4 matching system at `z = 0` and `z = a`.
///
/// The gap amplitudes are eliminated through the region III transfer matrix
/// `T = W Λ(a) W⁻¹`; the unknowns are the two decaying amplitudes of region I
/// and the two of region II, the latter referenced to `z = a`.
pub fn boundary_determinant(
    system: &MaterialSystem,
    p: f64,
    xi: f64,
    a: f64,
) -> Result<f64, ModeError> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(ModeError::NonpositiveSeparation(a));
    }
    let ms = ModeSystem::imaginary_axis(system, p, xi)?;
    let e1 = ms.eigensystem(Region::I)?;
    let e2 = ms.eigensystem(Region::II)?;
    let e3 = ms.eigensystem(Region::III)?;

    let k0 = xi / SPEED_OF_LIGHT;
    let lambda = Matrix4::from_diagonal(&nalgebra::Vector4::from_iterator(
        e3.gammas.iter().map(|g| (-g * k0 * a).exp()),
    ));
    let w3_inv = e3.w.try_inverse().ok_or(ModeError::Singular)?;
    let transfer = e3.w * lambda * w3_inv;

    let mut m = Matrix4::<C64>::zeros();
    m.set_column(0, &(transfer * e1.w.column(0)));
    m.set_column(1, &(transfer * e1.w.column(1)));
    m.set_column(2, &(-e2.w.column(2)));
    m.set_column(3, &(-e2.w.column(3)));
    let d = m.determinant();
    if d.im.abs() > 1e-10 * d.norm() {
        return Err(ModeError::NotReal(d.to_string()));
    }
    Ok(d.re)
}

/// Which exponential is divided out of the determinant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rates {
    /// `e^{(q⊥+q∥)a}`
    #[default]
    Modal,
    /// `e^{2q∥a}`: deliberately wrong when the gap is anisotropic.
    ParallelOnly,
}

/// Relative spread `max|C − C̄|/|C̄|` of `C(a) = D(a)·e^{−(q⊥+q∥)a}/(G₁G₂)`
/// over the given separations.
pub fn factorization_residual(
    system: &MaterialSystem,
    p: f64,
    xi: f64,
    separations: &[f64],
) -> Result<f64, ModeError> {
    factorization_residual_with(system, p, xi, separations, Rates::Modal)
}

pub fn factorization_residual_with(
    system: &MaterialSystem,
    p: f64,
    xi: f64,
    separations: &[f64],
    rates: Rates,
) -> Result<f64, ModeError> {
    let mut distinct = separations.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(ModeError::TooFewSeparations(distinct.len()));
    }
    let (q_perp, q_par) = mode_rates(system, p, xi)?;
    let rate = match rates {
        Rates::Modal => q_perp + q_par,
        Rates::ParallelOnly => 2.0 * q_par,
    };
    let r = ratios(system, xi)?;
    let mut cs = Vec::with_capacity(separations.len());
    for &a in separations {
        let d = boundary_determinant(system, p, xi, a)?;
        let mode = ModePoint::new(p, xi, a)?;
        let (ga, gb) = (g1(&mode, &r)?, g2(&mode, &r)?);
        if !(ga > 0.0 && gb > 0.0) {
            return Err(ModeError::OutOfRegime { g1: ga, g2: gb });
        }
        cs.push(d * (-rate * a).exp() / (ga * gb));
    }
    let mean = cs.iter().sum::<f64>() / cs.len() as f64;
    let spread = cs.iter().map(|c| (c - mean).abs()).fold(0.0, f64::max);
    Ok(spread / mean.abs())
}

/// `d ln|D|/da` estimated between two separations.
pub fn log_slope(
    system: &MaterialSystem,
    p: f64,
    xi: f64,
    a_lo: f64,
    a_hi: f64,
) -> Result<f64, ModeError> {
    let lo = boundary_determinant(system, p, xi, a_lo)?.abs().ln();
    let hi = boundary_determinant(system, p, xi, a_hi)?.abs().ln();
    Ok((hi - lo) / (a_hi - a_lo))
}
