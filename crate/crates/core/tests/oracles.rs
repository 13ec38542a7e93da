//! Force and energy against values from an independent double integral over
//! the dimensional integrands (raw `(s − p)/(s + p)` reflection forms,
//! nested adaptive quadrature in `ξ` and `u = 1/p`).

use casimir_aniso::lifshitz::{casimir_energy, casimir_force};
use casimir_aniso::retarded::{force_retarded, psi, retarded_prefactor};
use casimir_aniso::{MaterialSystem, PermittivityModel, QuadratureSpec};

fn close(got: f64, want: f64, rel: f64) {
    assert!((got / want - 1.0).abs() <= rel, "{got} vs {want}");
}

fn dispersive() -> MaterialSystem {
    let osc = |s: f64, w: f64| PermittivityModel::oscillator([(s, w)]);
    MaterialSystem::new(
        osc(2.0, 2e16),
        osc(0.6, 5e15),
        osc(1.0, 1e16),
        osc(2.5, 1.5e16),
    )
}

#[test]
fn isotropic_gap_constant_permittivities() {
    let sys = MaterialSystem::constant(3.0, 1.6, 2.0, 2.0);
    let s = QuadratureSpec::default();
    close(
        casimir_force(&sys, 1e-6, &s).unwrap().value,
        -7.221_793_791_655e-6,
        1e-9,
    );
    close(
        casimir_energy(&sys, 1e-6, &s).unwrap().value,
        2.407_264_597_218e-12,
        1e-9,
    );
}

#[test]
fn anisotropic_gap_constant_permittivities() {
    let sys = MaterialSystem::constant(3.0, 1.6, 2.0, 4.5);
    let s = QuadratureSpec::default();
    close(
        casimir_force(&sys, 1e-6, &s).unwrap().value,
        -5.720_096_734_696e-6,
        1e-9,
    );
    close(
        casimir_energy(&sys, 1e-6, &s).unwrap().value,
        1.906_698_911_565e-12,
        1e-9,
    );
}

#[test]
fn dispersive_system_at_100_nm() {
    let sys = dispersive();
    let s = QuadratureSpec::default();
    close(
        casimir_force(&sys, 1e-7, &s).unwrap().value,
        -1.376_242_263_469e-1,
        1e-6,
    );
    close(
        casimir_energy(&sys, 1e-7, &s).unwrap().value,
        4.235_033_602_898e-9,
        1e-6,
    );
}

#[test]
fn retarded_force_uses_leading_order_psi() {
    let sys = MaterialSystem::constant(3.0, 1.6, 2.0, 2.0);
    let s = QuadratureSpec::default();
    let f = force_retarded(&sys, 1e-6, &s).unwrap().value;
    close(f, retarded_prefactor(1e-6, 2.0) * -1.702_201_184_8e-2, 1e-9);
    let exact = casimir_force(&sys, 1e-6, &s).unwrap().value;
    assert!(f < 0.0 && exact < 0.0);
    assert!((f / exact - 1.0).abs() < 2e-3);
    assert!(psi(1.5, 0.8, 1.0, &s).unwrap().psi < 0.0);
}
