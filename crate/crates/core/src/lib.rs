//! Distillability of two-mode Gaussian continuous-variable states.
//!
//! The crate has two halves. The phase-space half works with 4×4 correlation
//! matrices: local symplectic reduction to standard form, physicality and
//! inseparability criteria, the Gaussian form of the reduction criterion, and
//! the ancilla/beam-splitter symmetrization that turns an asymmetric state
//! into a symmetric one without changing its entanglement verdict.
//!
//! The Fock-space half converts Gaussian states into truncated two-mode
//! density matrices and runs the recurrence distillation protocol on them:
//! filtering, isotropic twirling, bilocal XOR with postselection, and the
//! equivalent total-photon-number measurement.
//!
//! # Conventions
//!
//! Quadratures are ordered `(q_a, p_a, q_b, p_b)` with `ħ = 1` and the
//! characteristic function is `χ(ξ) = exp(-¼⟨ξ, Mξ⟩ - ⟨d, ξ⟩)`. With this
//! normalization **the vacuum correlation matrix is the identity** (not ½·I
//! as in much of the literature); `M` is twice the symmetrized covariance of
//! `X = (a + a†)/√2`, `P = (a - a†)/(i√2)`.
//!
//! The two-mode squeezed state with Fock amplitudes `tanhⁿ(r)/cosh(r)` on
//! `|n, n⟩` has correlation matrix [`CorrelationMatrix::two_mode_squeezed`]
//! evaluated at `2r`. See that constructor for details.

pub mod error;
pub mod fock;
pub mod gaussian;
pub mod io;
pub mod phase_space;
pub mod pipeline;
pub mod symplectic;
pub mod tol;

pub use error::{Error, Result};
pub use fock::{FilterMatrix, FiniteMaxEntangled, FockDensity, FockVector};
pub use gaussian::{
    ComplexStructure, CorrelationMatrix, Criterion, Decision, GaussianState, LocalSymplectic, StandardFormParams,
};
pub use phase_space::{SymmetrizationPlan, TransformRecord, WignerParams};
pub use pipeline::{DistillationReport, ProtocolConfig, Verdict};
