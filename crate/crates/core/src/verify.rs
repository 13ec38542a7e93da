//! Self-checks that cross independent computational paths against each
//! other. Each suite reports its worst observed discrepancy against a fixed
//! threshold.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::constants::SPEED_OF_LIGHT;
use crate::lifshitz::{casimir_force, casimir_force_isotropic, force_from_energy_fd};
use crate::materials::{MaterialSystem, PermittivityModel};
use crate::mode_oracle::{factorization_residual, factorization_residual_with, Rates};
use crate::quadrature::QuadratureSpec;
use crate::retarded::{psi, psi_exact_series, retarded_prefactor, series_remainder_bound};

const SEED: u64 = 0x5eed_ca51;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub samples: usize,
    /// Largest observed discrepancy (for controls: the smallest).
    pub worst: f64,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
}

impl SuiteReport {
    fn at_most(name: &'static str, samples: usize, worst: f64, threshold: f64) -> Self {
        SuiteReport {
            name,
            samples,
            worst,
            threshold,
            passed: worst.is_finite() && worst <= threshold,
            detail: String::new(),
        }
    }

    fn failed(name: &'static str, threshold: f64, err: impl std::fmt::Display) -> Self {
        SuiteReport {
            name,
            samples: 0,
            worst: f64::NAN,
            threshold,
            passed: false,
            detail: err.to_string(),
        }
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = detail;
        self
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs())
    }
}

/// Sample sizes for the suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteSizes {
    pub isotropic: usize,
    pub triangle: usize,
    pub finite_difference: usize,
    pub factorization: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        SuiteSizes {
            isotropic: 36,
            triangle: 12,
            finite_difference: 10,
            factorization: 50,
        }
    }
}

/// Constant-permittivity systems with an isotropic gap compared against the
/// separately coded isotropic force.
pub fn isotropic_reduction(n: usize, spec: &QuadratureSpec) -> SuiteReport {
    const NAME: &str = "isotropic-reduction";
    const TOL: f64 = 1e-10;
    let values = [1.3, 2.0, 3.5, 6.0, 11.0, 1.05];
    let mut systems = Vec::new();
    'outer: for &e3 in &values {
        for &e1 in &values {
            for &e2 in &values {
                if systems.len() >= n {
                    break 'outer;
                }
                systems.push((e1, e2, e3));
            }
        }
    }
    let a = 1e-6;
    let mut worst: f64 = 0.0;
    for &(e1, e2, e3) in &systems {
        let sys = MaterialSystem::constant(e1, e2, e3, e3);
        let general = casimir_force(&sys, a, spec);
        use PermittivityModel::Constant;
        let iso = casimir_force_isotropic(&Constant(e1), &Constant(e2), &Constant(e3), a, spec);
        match (general, iso) {
            (Ok(g), Ok(i)) => worst = worst.max(rel(g.value, i.value)),
            (Err(e), _) | (_, Err(e)) => return SuiteReport::failed(NAME, TOL, e),
        }
    }
    SuiteReport::at_most(NAME, systems.len(), worst, TOL)
}

/// `a⁴F` over `a ∈ {0.5, 1, 2, 4} μm` for constant permittivities.
pub fn scaling(spec: &QuadratureSpec) -> SuiteReport {
    const NAME: &str = "scaling";
    const TOL: f64 = 1e-8;
    let systems = [
        MaterialSystem::constant(3.0, 1.6, 2.0, 2.0),
        MaterialSystem::constant(3.0, 3.0, 2.0, 4.5),
        MaterialSystem::constant(1.2, 6.0, 3.0, 1.4),
        MaterialSystem::constant(4.0, 2.2, 2.0, 2.5),
    ];
    let mut worst: f64 = 0.0;
    for sys in &systems {
        let mut scaled = Vec::new();
        for a in [0.5e-6, 1e-6, 2e-6, 4e-6] {
            match casimir_force(sys, a, spec) {
                Ok(f) => scaled.push(f.value * a.powi(4)),
                Err(e) => return SuiteReport::failed(NAME, TOL, e),
            }
        }
        let mean = scaled.iter().sum::<f64>() / scaled.len() as f64;
        let spread = scaled.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        worst = worst.max(spread / mean.abs());
    }
    SuiteReport::at_most(NAME, systems.len(), worst, TOL)
}

/// A mix of constant and dispersive systems for derivative checks.
pub fn sample_systems(n: usize) -> Vec<MaterialSystem> {
    let mut rng = StdRng::seed_from_u64(SEED ^ 0xfd);
    (0..n)
        .map(|i| {
            let mut draw = || rng.random_range(1.2..6.0);
            let (e1, e2, e3x, e3z) = (draw(), draw(), draw(), draw());
            if i % 2 == 0 {
                MaterialSystem::constant(e1, e2, e3x, e3z)
            } else {
                let osc = |static_eps: f64, w: f64| {
                    PermittivityModel::oscillator([(static_eps - 1.0, w)])
                };
                MaterialSystem::new(
                    osc(e1, 2e16),
                    osc(e2, 5e15),
                    osc(e3x, 1e16),
                    osc(e3z, 1.5e16),
                )
            }
        })
        .collect()
}

/// Centered difference of the energy (`h = a/1000`) against the force.
pub fn finite_difference(n: usize, spec: &QuadratureSpec) -> SuiteReport {
    const NAME: &str = "finite-difference";
    const TOL: f64 = 1e-4;
    let a = 1e-6;
    let fine = spec.tightened(10.0);
    let mut worst: f64 = 0.0;
    let systems = sample_systems(n);
    for sys in &systems {
        let fd = force_from_energy_fd(sys, a, a / 1000.0, &fine);
        let f = casimir_force(sys, a, spec);
        match (fd, f) {
            (Ok(fd), Ok(f)) => worst = worst.max(rel(fd, f.value)),
            (Err(e), _) | (_, Err(e)) => return SuiteReport::failed(NAME, TOL, e),
        }
    }
    SuiteReport::at_most(NAME, systems.len(), worst, TOL)
}

/// A random imaginary-axis configuration for the mode oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub system: MaterialSystem,
    pub p: f64,
    pub xi: f64,
    pub anisotropic: bool,
}

/// Half the configurations have `ε₃ₓ = ε₃z`; the others differ by at least 30%.
pub fn oracle_configs(n: usize) -> Vec<OracleConfig> {
    let mut rng = StdRng::seed_from_u64(SEED ^ 0xa1);
    (0..n)
        .map(|i| {
            let e1 = rng.random_range(1.1..8.0);
            let e2 = rng.random_range(1.1..8.0);
            let e3x = rng.random_range(1.1..6.0);
            let anisotropic = i % 2 == 1;
            let e3z = if anisotropic {
                let f: f64 = rng.random_range(1.3..4.0);
                if rng.random_bool(0.5) {
                    e3x * f
                } else {
                    e3x / f
                }
            } else {
                e3x
            };
            let p = rng.random_range(1.0..3.0);
            let x = rng.random_range(0.3..2.0);
            let xi = x * SPEED_OF_LIGHT / (2.0 * 1e-6 * e3x.sqrt());
            OracleConfig {
                system: MaterialSystem::constant(e1, e2, e3x, e3z),
                p,
                xi,
                anisotropic,
            }
        })
        .collect()
}

pub const ORACLE_SEPARATIONS: [f64; 3] = [0.5e-6, 1e-6, 2e-6];

/// Separation independence of `D·e^{−(q⊥+q∥)a}/(G₁G₂)`, plus the wrong-rate
/// control on the anisotropic configurations.
pub fn factorization(n: usize) -> (SuiteReport, SuiteReport) {
    const NAME: &str = "factorization";
    const CONTROL: &str = "factorization-control";
    const TOL: f64 = 1e-8;
    const CONTROL_MIN: f64 = 1e-3;
    let configs = oracle_configs(n);
    let mut worst: f64 = 0.0;
    let mut control = f64::INFINITY;
    let mut controls = 0;
    for c in &configs {
        match factorization_residual(&c.system, c.p, c.xi, &ORACLE_SEPARATIONS) {
            Ok(r) => worst = worst.max(r),
            Err(e) => {
                return (
                    SuiteReport::failed(NAME, TOL, &e),
                    SuiteReport::failed(CONTROL, CONTROL_MIN, e),
                )
            }
        }
        if c.anisotropic {
            match factorization_residual_with(
                &c.system,
                c.p,
                c.xi,
                &ORACLE_SEPARATIONS,
                Rates::ParallelOnly,
            ) {
                Ok(r) => control = control.min(r),
                Err(e) => {
                    return (
                        SuiteReport::at_most(NAME, configs.len(), worst, TOL),
                        SuiteReport::failed(CONTROL, CONTROL_MIN, e),
                    )
                }
            }
            controls += 1;
        }
    }
    let control_report = SuiteReport {
        name: CONTROL,
        samples: controls,
        worst: control,
        threshold: CONTROL_MIN,
        passed: controls > 0 && control > CONTROL_MIN,
        detail: "smallest residual with the wrong rate; must exceed threshold".into(),
    };
    (
        SuiteReport::at_most(NAME, configs.len(), worst, TOL),
        control_report,
    )
}

/// `(M₁, M₂, M₃)` tuples away from the `Ψ = 0` border.
pub const TRIANGLE_TUPLES: [(f64, f64, f64); 12] = [
    (1.5, 0.8, 1.0),
    (1.5, 0.8, 0.3),
    (1.5, 0.8, 4.0),
    (1.5, 1.1, 1.0),
    (1.5, 1.1, 1.8),
    (1.5, 1.5, 0.5),
    (2.0, 3.0, 1.0),
    (0.5, 0.7, 2.0),
    (3.0, 0.4, 1.5),
    (1.2, 1.2, 6.0),
    (0.6, 2.5, 0.8),
    (4.0, 0.9, 2.5),
];

/// Full Lifshitz force for constant permittivities against the exact
/// static-limit series, and the leading-order `Ψ` against its remainder
/// bound.
pub fn correctness_triangle(n: usize, spec: &QuadratureSpec) -> SuiteReport {
    const NAME: &str = "correctness-triangle";
    const TOL: f64 = 1e-6;
    let eps3x = 2.0;
    let a = 1e-6;
    let mut worst: f64 = 0.0;
    let mut bound_violations = 0;
    let tuples: Vec<_> = TRIANGLE_TUPLES.iter().copied().cycle().take(n).collect();
    for &(m1, m2, m3) in &tuples {
        let sys = MaterialSystem::constant(m1 * eps3x, m2 * eps3x, eps3x, m3 * eps3x);
        let run = || -> Result<(f64, f64, f64, f64), Box<dyn std::error::Error>> {
            let f = casimir_force(&sys, a, spec)?;
            let exact = psi_exact_series(m1, m2, m3, &spec.tightened(10.0))?;
            let lead = psi(m1, m2, m3, &spec.tightened(10.0))?;
            let bound = series_remainder_bound(m1, m2, m3, spec)?;
            Ok((
                f.value / retarded_prefactor(a, eps3x),
                exact.psi,
                lead.psi,
                bound,
            ))
        };
        match run() {
            Ok((reduced, exact, lead, bound)) => {
                worst = worst.max(rel(reduced, exact));
                if (lead - exact).abs() > bound {
                    bound_violations += 1;
                }
            }
            Err(e) => return SuiteReport::failed(NAME, TOL, e),
        }
    }
    let mut report = SuiteReport::at_most(NAME, tuples.len(), worst, TOL);
    if bound_violations > 0 {
        report.passed = false;
    }
    report.with_detail(format!("{bound_violations} remainder-bound violations"))
}

/// Every suite with the given sizes.
pub fn run_all(sizes: &SuiteSizes, spec: &QuadratureSpec) -> Vec<SuiteReport> {
    let (fact, control) = factorization(sizes.factorization);
    vec![
        isotropic_reduction(sizes.isotropic, spec),
        scaling(spec),
        finite_difference(sizes.finite_difference, spec),
        fact,
        control,
        correctness_triangle(sizes.triangle, spec),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        let spec = QuadratureSpec::default();
        let sizes = SuiteSizes {
            isotropic: 4,
            triangle: 3,
            finite_difference: 2,
            factorization: 6,
        };
        for r in run_all(&sizes, &spec) {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn configs_are_reproducible_and_split() {
        let a = oracle_configs(10);
        assert_eq!(a, oracle_configs(10));
        assert_eq!(a.iter().filter(|c| c.anisotropic).count(), 5);
        for c in a.iter().filter(|c| !c.anisotropic) {
            assert_eq!(c.system.eps3x, c.system.eps3z);
        }
    }
}
