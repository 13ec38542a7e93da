//! Zero-temperature Casimir energy and force between two isotropic plates
//! separated by a uniaxial dielectric whose optical axis is normal to the
//! plates, together with the large-separation force factor `Ψ` and tools
//! that map where the force turns from attractive to repulsive.
//!
//! Sign convention: `F = ∂E/∂a` and a positive force is attractive.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constants;
pub mod exec;
pub mod kernels;
pub mod lifshitz;
pub mod materials;
pub mod mode_oracle;
pub mod polylog;
pub mod quadrature;
pub mod retarded;
pub mod sign_atlas;
pub mod verify;

pub use exec::Execution;
pub use materials::{MaterialSystem, PermittivityModel, RatioSet};
pub use quadrature::{IntegralResult, QuadratureSpec};
