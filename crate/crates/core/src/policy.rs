//! Numerical tolerances shared across the crate.

/// Tolerances used when validating inputs and classifying numerical results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericPolicy {
    /// Construction-time checks (normalization, prior weights, hermiticity).
    pub construction: f64,
    /// Derived quantities (traces, eigenvalue floors, commutator zero tests).
    pub derived: f64,
    /// Relative threshold below which an eigenvalue of Gamma_0 counts as null.
    pub null_relative: f64,
    /// Absolute weight of Gamma_1 on a null pair that triggers the ill-posed diagnostic.
    pub ill_posed: f64,
}

impl NumericPolicy {
    pub const DEFAULT: NumericPolicy = NumericPolicy {
        construction: 1e-12,
        derived: 1e-10,
        null_relative: 1e-12,
        ill_posed: 1e-10,
    };
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self::DEFAULT
    }
}
