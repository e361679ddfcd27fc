//! Numerical tolerances shared across the crate.
//!
//! All criteria in this crate are sharp inequalities. Each is evaluated as a
//! signed margin, and verdicts inside `±DEAD_BAND` are reported as boundary
//! cases instead of being forced to one side.

/// Maximum allowed asymmetry `|M_ij - M_ji|` of a correlation matrix.
pub const SYMMETRY: f64 = 1e-12;

/// Absolute tolerance for structural checks (standard-form shape, block determinants).
pub const STRUCTURAL: f64 = 1e-9;

/// Eigenvalues down to `-PSD` count as nonnegative.
pub const PSD: f64 = 1e-10;

/// Default dead band around zero for criterion margins.
pub const DEAD_BAND: f64 = 1e-10;

/// Determinant tolerance for `LocalSymplectic` blocks.
pub const SYMPLECTIC_DET: f64 = 1e-10;

/// Hermiticity tolerance for density matrices.
pub const HERMITIAN: f64 = 1e-12;
