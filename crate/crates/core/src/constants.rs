//! CODATA values used throughout. Not configurable.

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Grouped view of the constants for callers that prefer a type.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhysicalConstants;

impl PhysicalConstants {
    pub const HBAR: f64 = HBAR;
    pub const C: f64 = SPEED_OF_LIGHT;
}
