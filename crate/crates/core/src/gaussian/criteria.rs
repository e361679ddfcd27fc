use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};

use super::{standard_form_params, ComplexStructure, CorrelationMatrix, GaussianState, StandardFormParams};
use crate::error::{Error, Result};
use crate::tol;

/// `χ(ξ) = exp(-¼⟨ξ, Mξ⟩ - ⟨d, ξ⟩)`.
pub fn evaluate_characteristic(state: &GaussianState, xi: &Vector4<f64>) -> f64 {
    let quad = xi.dot(&(state.cm().matrix() * xi));
    (-0.25 * quad - state.displacement().dot(xi)).exp()
}

/// Determinants of `M_A`, `M_B`, `M_AB` and of `M`; invariant under local
/// symplectic congruence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub det_a: f64,
    pub det_b: f64,
    pub det_ab: f64,
    pub det: f64,
}

pub fn invariants(m: &CorrelationMatrix) -> Invariants {
    Invariants {
        det_a: m.block_a().determinant(),
        det_b: m.block_b().determinant(),
        det_ab: m.block_ab().determinant(),
        det: m.matrix().determinant(),
    }
}

/// Outcome of the physicality test. `margin` is the smallest eigenvalue of
/// `-JMJ - M⁻¹` (or of `M` itself when that is not positive).
#[derive(Clone, Debug, PartialEq)]
pub struct Physicality {
    pub physical: bool,
    pub margin: f64,
    pub violated: Option<&'static str>,
}

impl Physicality {
    pub fn into_error(self) -> Error {
        Error::NotPhysical { margin: self.margin, violated: self.violated.unwrap_or("none").to_string() }
    }
}

fn min_eigenvalue(m: &Matrix4<f64>) -> f64 {
    SymmetricEigen::new((m + m.transpose()) * 0.5).eigenvalues.min()
}

/// `M > 0` and `-JMJ - M⁻¹ ≥ 0`, the latter to `-tol::PSD` relative to the
/// size of `M`.
pub fn is_physical(m: &CorrelationMatrix) -> Result<Physicality> {
    let mm = m.matrix();
    let scale = mm.amax().max(1.0);
    let eig = SymmetricEigen::new(*mm).eigenvalues;
    if eig.iter().any(|l| l.abs() <= 1e-12 * scale) {
        return Err(Error::Singular);
    }
    let lowest = eig.min();
    if lowest < 0.0 {
        return Ok(Physicality { physical: false, margin: lowest, violated: Some("M > 0") });
    }
    let inv = mm.try_inverse().ok_or(Error::Singular)?;
    let j = ComplexStructure::matrix();
    let margin = min_eigenvalue(&(-j * mm * j - inv));
    let physical = margin >= -tol::PSD * scale;
    Ok(Physicality { physical, margin, violated: (!physical).then_some("-JMJ >= M^-1") })
}

/// Three-way reading of a sharp inequality evaluated in floating point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Holds,
    Fails,
    Boundary,
}

/// Signed margin of an inequality; positive means it holds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub margin: f64,
}

impl Criterion {
    pub fn holds(&self) -> bool {
        self.margin > 0.0
    }

    pub fn decide(&self, dead_band: f64) -> Decision {
        if self.margin > dead_band {
            Decision::Holds
        } else if self.margin < -dead_band {
            Decision::Fails
        } else {
            Decision::Boundary
        }
    }
}

fn require_physical(m: &CorrelationMatrix) -> Result<()> {
    let phys = is_physical(m)?;
    if phys.physical {
        Ok(())
    } else {
        Err(phys.into_error())
    }
}

/// Inseparability test on the standard-form parameters of `m`; the margin is
/// `n_a² + n_b² - 2k_xk_p - (n_an_b - k_x²)(n_an_b - k_p²) - 1`.
pub fn is_inseparable(m: &CorrelationMatrix) -> Result<Criterion> {
    require_physical(m)?;
    let p = standard_form_params(m)?;
    Ok(Criterion { margin: p.inseparability_margin() })
}

/// `(n + k_x)(n - k_p) > 1` for symmetric parameters.
pub fn symmetric_rc_holds(p: &StandardFormParams) -> Result<Criterion> {
    if !p.is_symmetric(tol::STRUCTURAL * p.n_a.abs().max(1.0)) {
        return Err(Error::NotSymmetric { n_a: p.n_a, n_b: p.n_b });
    }
    let n = 0.5 * (p.n_a + p.n_b);
    Ok(Criterion { margin: (n + p.k_x) * (n - p.k_p) - 1.0 })
}

/// `2 |M_{tr_B ρ} + M_{tr_B ψ}|^{-1/2} - 4 |M_ρ + M_ψ|^{-1/2}`, i.e.
/// `tr[ψ_A ρ_A] - tr[ψ ρ]` for two Gaussian states. Negative values certify
/// distillability of `ρ`.
pub fn reduction_functional_gaussian(rho: &CorrelationMatrix, psi: &CorrelationMatrix) -> Result<f64> {
    require_physical(rho)?;
    require_physical(psi)?;
    let det_local = (rho.block_a() + psi.block_a()).determinant();
    let det_full = (rho.matrix() + psi.matrix()).determinant();
    for det in [det_local, det_full] {
        if det <= tol::PSD {
            return Err(Error::Degenerate { det });
        }
    }
    Ok(2.0 / det_local.sqrt() - 4.0 / det_full.sqrt())
}
