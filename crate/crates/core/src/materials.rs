//! Three-region dielectric configuration: plate 1 (`z < 0`), the uniaxial
//! interlayer (`0 < z < a`, optical axis along `z`) and plate 2 (`z > a`).
//!
//! Permittivities are evaluated on the imaginary frequency axis `ω = iξ`.
//! The static (`Constant`) model is the default; the `Oscillator` model
//! `ε(iξ) = 1 + Σ C_j / (1 + ξ²/ω_j²)` is opt-in. When a dispersive model is
//! used, `ε₃ₓ(iξ)` enters every kernel argument and prefactor at each `ξ`
//! node; whether that full dependence is physically intended for the
//! interlayer is left to the user, the static limit being the well-tested
//! path.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaterialError {
    #[error("imaginary frequency must be non-negative, got {0}")]
    NegativeFrequency(f64),
    #[error("invalid material system: {0}")]
    Invalid(ValidationReport),
    #[error("retarded limit requires static permittivities")]
    NotStatic,
}

/// One Lorentz term: strength `C_j` and resonance `ω_j` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct OscillatorTerm {
    pub strength: f64,
    pub resonance: f64,
}

impl From<(f64, f64)> for OscillatorTerm {
    fn from((strength, resonance): (f64, f64)) -> Self {
        OscillatorTerm {
            strength,
            resonance,
        }
    }
}

impl From<OscillatorTerm> for (f64, f64) {
    fn from(t: OscillatorTerm) -> Self {
        (t.strength, t.resonance)
    }
}

/// Relative permittivity as a function of imaginary frequency.
///
/// JSON form: `{"constant": 3.0}` or `{"oscillator": [[C, omega], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum PermittivityModel {
    Constant(f64),
    Oscillator(Vec<OscillatorTerm>),
}

impl PermittivityModel {
    pub fn oscillator<I: IntoIterator<Item = (f64, f64)>>(terms: I) -> Self {
        PermittivityModel::Oscillator(terms.into_iter().map(OscillatorTerm::from).collect())
    }

    pub fn is_static(&self) -> bool {
        matches!(self, PermittivityModel::Constant(_))
    }

    /// `ε(iξ)`.
    pub fn at(&self, xi: f64) -> Result<f64, MaterialError> {
        if !(xi >= 0.0) {
            return Err(MaterialError::NegativeFrequency(xi));
        }
        Ok(match self {
            PermittivityModel::Constant(v) => *v,
            PermittivityModel::Oscillator(terms) => {
                1.0 + terms
                    .iter()
                    .map(|t| {
                        let x = xi / t.resonance;
                        t.strength / (1.0 + x * x)
                    })
                    .sum::<f64>()
            }
        })
    }

    /// Static value `ε(0)`.
    pub fn static_value(&self) -> f64 {
        self.at(0.0).expect("zero frequency is always in range")
    }

    fn check(&self, field: &'static str, issues: &mut Vec<ValidationIssue>) {
        match self {
            PermittivityModel::Constant(v) => {
                if !v.is_finite() {
                    issues.push(ValidationIssue::new(field, IssueKind::NonFinite));
                } else if *v <= 0.0 {
                    issues.push(ValidationIssue::new(
                        field,
                        IssueKind::NonpositivePermittivity,
                    ));
                }
            }
            PermittivityModel::Oscillator(terms) => {
                for t in terms {
                    if !(t.strength.is_finite() && t.resonance.is_finite()) {
                        issues.push(ValidationIssue::new(field, IssueKind::NonFinite));
                        continue;
                    }
                    if t.strength < 0.0 {
                        issues.push(ValidationIssue::new(field, IssueKind::NegativeStrength));
                    }
                    if t.resonance <= 0.0 {
                        issues.push(ValidationIssue::new(field, IssueKind::NonpositiveResonance));
                    }
                }
            }
        }
    }
}

/// `ε(iξ)` for a single model.
pub fn permittivity_at(model: &PermittivityModel, xi: f64) -> Result<f64, MaterialError> {
    model.at(xi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSystem {
    pub eps1: PermittivityModel,
    pub eps2: PermittivityModel,
    /// Interlayer, perpendicular to the optical axis.
    pub eps3x: PermittivityModel,
    /// Interlayer, along the optical axis.
    pub eps3z: PermittivityModel,
}

impl MaterialSystem {
    pub fn new(
        eps1: PermittivityModel,
        eps2: PermittivityModel,
        eps3x: PermittivityModel,
        eps3z: PermittivityModel,
    ) -> Self {
        MaterialSystem {
            eps1,
            eps2,
            eps3x,
            eps3z,
        }
    }

    /// All four permittivities constant.
    pub fn constant(eps1: f64, eps2: f64, eps3x: f64, eps3z: f64) -> Self {
        use PermittivityModel::Constant;
        MaterialSystem::new(
            Constant(eps1),
            Constant(eps2),
            Constant(eps3x),
            Constant(eps3z),
        )
    }

    pub fn is_static(&self) -> bool {
        self.models().iter().all(|(_, m)| m.is_static())
    }

    /// Plates exchanged.
    pub fn swapped(&self) -> Self {
        MaterialSystem {
            eps1: self.eps2.clone(),
            eps2: self.eps1.clone(),
            ..self.clone()
        }
    }

    fn models(&self) -> [(&'static str, &PermittivityModel); 4] {
        [
            ("eps1", &self.eps1),
            ("eps2", &self.eps2),
            ("eps3x", &self.eps3x),
            ("eps3z", &self.eps3z),
        ]
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    /// `Ok(())` iff the validation report is empty.
    pub fn ensure_valid(&self) -> Result<(), MaterialError> {
        let report = self.validate();
        if report.is_empty() {
            Ok(())
        } else {
            Err(MaterialError::Invalid(report))
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Ratios of the permittivities to `ε₃ₓ` at one imaginary frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSet {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub eps3x: f64,
}

impl RatioSet {
    /// Ratios given directly, with `ε₃ₓ = 1`.
    pub fn from_ratios(m1: f64, m2: f64, m3: f64) -> Self {
        RatioSet {
            m1,
            m2,
            m3,
            eps3x: 1.0,
        }
    }

    pub fn from_permittivities(eps1: f64, eps2: f64, eps3x: f64, eps3z: f64) -> Self {
        RatioSet {
            m1: eps1 / eps3x,
            m2: eps2 / eps3x,
            m3: eps3z / eps3x,
            eps3x,
        }
    }

    pub fn swapped(&self) -> Self {
        RatioSet {
            m1: self.m2,
            m2: self.m1,
            ..*self
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.m1, self.m2, self.m3, self.eps3x]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
    }
}

pub fn ratios(system: &MaterialSystem, xi: f64) -> Result<RatioSet, MaterialError> {
    let e1 = system.eps1.at(xi)?;
    let e2 = system.eps2.at(xi)?;
    let e3x = system.eps3x.at(xi)?;
    let m3 = if system.eps3x == system.eps3z {
        1.0
    } else {
        system.eps3z.at(xi)? / e3x
    };
    Ok(RatioSet {
        m3,
        ..RatioSet::from_permittivities(e1, e2, e3x, e3x)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueKind {
    NonpositivePermittivity,
    NonpositiveResonance,
    NegativeStrength,
    NonFinite,
}

impl IssueKind {
    pub fn describe(self) -> &'static str {
        match self {
            IssueKind::NonpositivePermittivity => "nonpositive permittivity",
            IssueKind::NonpositiveResonance => "nonpositive resonance",
            IssueKind::NegativeStrength => "negative oscillator strength",
            IssueKind::NonFinite => "non-finite parameter",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationIssue {
    pub field: &'static str,
    pub kind: IssueKind,
}

impl ValidationIssue {
    fn new(field: &'static str, kind: IssueKind) -> Self {
        ValidationIssue { field, kind }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn mentions(&self, kind: IssueKind) -> bool {
        self.issues.iter().any(|i| i.kind == kind)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .issues
            .iter()
            .map(|i| format!("{}: {}", i.field, i.kind.describe()))
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Lists every violated invariant. Oscillator models are ≥ 1 by
/// construction, so only constants can go nonpositive.
pub fn validate(system: &MaterialSystem) -> ValidationReport {
    let mut issues = Vec::new();
    for (field, model) in system.models() {
        model.check(field, &mut issues);
    }
    ValidationReport { issues }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn permittivity_examples() {
        assert_eq!(PermittivityModel::Constant(2.5).at(1e15).unwrap(), 2.5);
        let osc = PermittivityModel::oscillator([(1.0, 1e16)]);
        assert_eq!(osc.at(0.0).unwrap(), 2.0);
        assert_eq!(osc.at(1e16).unwrap(), 1.5);
        assert!(matches!(
            osc.at(-1.0),
            Err(MaterialError::NegativeFrequency(_))
        ));
    }

    #[test]
    fn ratio_examples() {
        let r = ratios(&MaterialSystem::constant(1.0, 1.0, 1.0, 1.0), 0.0).unwrap();
        assert_eq!((r.m1, r.m2, r.m3), (1.0, 1.0, 1.0));
        let r = ratios(&MaterialSystem::constant(3.0, 1.6, 2.0, 2.0), 0.0).unwrap();
        assert_eq!((r.m1, r.m2, r.m3), (1.5, 0.8, 1.0));
        let r = ratios(&MaterialSystem::constant(3.0, 2.2, 2.0, 4.0), 0.0).unwrap();
        assert!((r.m2 - 1.1).abs() < 1e-15);
        assert_eq!((r.m1, r.m3), (1.5, 2.0));
    }

    #[test]
    fn same_model_gives_unit_anisotropy() {
        let osc = PermittivityModel::oscillator([(0.7, 3e15), (1.3, 2e16)]);
        let sys = MaterialSystem::new(
            PermittivityModel::Constant(2.0),
            PermittivityModel::Constant(3.0),
            osc.clone(),
            osc,
        );
        for xi in [0.0, 1e14, 5e15, 1e17] {
            assert_eq!(ratios(&sys, xi).unwrap().m3, 1.0);
        }
    }

    #[test]
    fn validation_reports() {
        assert!(validate(&MaterialSystem::constant(2.0, 3.0, 1.5, 4.0)).is_empty());
        let r = validate(&MaterialSystem::constant(-1.0, 3.0, 1.5, 4.0));
        assert!(r.mentions(IssueKind::NonpositivePermittivity));
        assert!(r.to_string().contains("nonpositive permittivity"));
        let sys = MaterialSystem {
            eps2: PermittivityModel::oscillator([(1.0, 0.0)]),
            ..MaterialSystem::constant(2.0, 3.0, 1.5, 4.0)
        };
        let r = validate(&sys);
        assert!(r.mentions(IssueKind::NonpositiveResonance));
        assert!(r.to_string().contains("nonpositive resonance"));
        let sys = MaterialSystem {
            eps3z: PermittivityModel::oscillator([(-0.5, 1e15)]),
            ..MaterialSystem::constant(2.0, 3.0, 1.5, 4.0)
        };
        assert!(validate(&sys).mentions(IssueKind::NegativeStrength));
    }

    #[test]
    fn json_schema_uses_exact_keys() {
        let text = r#"{"eps1": {"constant": 3.0},
                       "eps2": {"oscillator": [[1.0, 1e16], [0.5, 2e15]]},
                       "eps3x": {"constant": 2.0},
                       "eps3z": {"constant": 2.5}}"#;
        let sys = MaterialSystem::from_json(text).unwrap();
        assert_eq!(sys.eps1, PermittivityModel::Constant(3.0));
        assert_eq!(
            sys.eps2,
            PermittivityModel::oscillator([(1.0, 1e16), (0.5, 2e15)])
        );
        let back: MaterialSystem =
            serde_json::from_str(&serde_json::to_string(&sys).unwrap()).unwrap();
        assert_eq!(back, sys);
        assert!(MaterialSystem::from_json(r#"{"eps1": {"constant": 1.0}}"#).is_err());
        assert!(MaterialSystem::from_json(
            r#"{"eps1": {"drude": 1.0}, "eps2": {"constant": 1.0},
                "eps3x": {"constant": 1.0}, "eps3z": {"constant": 1.0}}"#
        )
        .is_err());
    }

    fn oscillator_strategy() -> impl Strategy<Value = PermittivityModel> {
        prop::collection::vec((0.0..5.0f64, 1e13..1e17f64), 1..4)
            .prop_map(PermittivityModel::oscillator)
    }

    proptest! {
        #[test]
        fn oscillator_is_monotone_and_at_least_one(
            model in oscillator_strategy(),
            x1 in 0.0..1e17f64,
            dx in 0.0..1e17f64,
        ) {
            let lo = model.at(x1).unwrap();
            let hi = model.at(x1 + dx).unwrap();
            prop_assert!(hi <= lo);
            prop_assert!(hi >= 1.0);
        }

        #[test]
        fn ratios_are_scale_free(
            e in prop::array::uniform4(0.1..10.0f64),
            lambda in 0.01..100.0f64,
        ) {
            let a = ratios(&MaterialSystem::constant(e[0], e[1], e[2], e[3]), 0.0).unwrap();
            let b = ratios(
                &MaterialSystem::constant(lambda * e[0], lambda * e[1], lambda * e[2], lambda * e[3]),
                0.0,
            ).unwrap();
            let rel = |x: f64, y: f64| ((x - y) / x).abs();
            prop_assert!(rel(a.m1, b.m1) < 1e-14);
            prop_assert!(rel(a.m2, b.m2) < 1e-14);
            prop_assert!(rel(a.m3, b.m3) < 1e-14);
            prop_assert!(rel(lambda * a.eps3x, b.eps3x) < 1e-14);
        }
    }
}
