//! Wigner-domain correlation matrices and the ancilla/beam-splitter
//! symmetrization of asymmetric states.
//!
//! The Wigner correlation matrix is `M_W = -J M⁻¹ J`. The map is an
//! involution and commutes with local symplectic congruence, so the Wigner
//! standard form is reached by the same local reducer as the ordinary one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{
    bring_to_standard_form, is_physical, reduce_local, standard_form_params, ComplexStructure, CorrelationMatrix,
    LocalSymplectic, StandardFormParams,
};
use crate::tol;

/// Standard-form parameters `(N_a, N_b, K_x, K_p)` of a Wigner correlation matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerParams {
    pub n_a: f64,
    pub n_b: f64,
    pub k_x: f64,
    pub k_p: f64,
}

impl WignerParams {
    pub fn d_x(&self) -> f64 {
        self.n_a * self.n_b - self.k_x * self.k_x
    }

    pub fn d_p(&self) -> f64 {
        self.n_a * self.n_b - self.k_p * self.k_p
    }

    pub fn matrix(&self) -> CorrelationMatrix {
        CorrelationMatrix::standard_form(&StandardFormParams {
            n_a: self.n_a,
            n_b: self.n_b,
            k_x: self.k_x,
            k_p: self.k_p,
        })
    }

    fn swapped(&self) -> Self {
        Self { n_a: self.n_b, n_b: self.n_a, ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// Beam-splitter angle and cached trigonometry for one symmetrization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizationPlan {
    pub theta: f64,
    pub c: f64,
    pub s: f64,
    /// `s² N_b + c²`, with `N_b` the parameter of the side receiving the ancilla.
    pub nu: f64,
    /// Mode that receives the vacuum ancilla.
    pub side: Side,
}

/// How the symmetrized state was produced from the input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum TransformRecord {
    /// Congruence by `s_a ⊕ s_b` (row-major 2×2 blocks).
    LocalSymplectic { s_a: [[f64; 2]; 2], s_b: [[f64; 2]; 2] },
    /// Vacuum ancilla mixed into `side` at angle `theta`, then homodyne on the ancilla.
    AncillaBeamSplitter { side: Side, theta: f64 },
}

impl TransformRecord {
    pub fn local(s: &LocalSymplectic) -> Self {
        let rows = |m: &nalgebra::Matrix2<f64>| [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]];
        Self::LocalSymplectic { s_a: rows(&s.s_a), s_b: rows(&s.s_b) }
    }
}

/// `-J M⁻¹ J`.
pub fn wigner_correlation(m: &CorrelationMatrix) -> Result<CorrelationMatrix> {
    let mm = m.matrix();
    let scale = mm.amax().max(1.0);
    let det = mm.determinant();
    if det.abs() <= 1e-12 * scale.powi(4) {
        return Err(Error::Singular);
    }
    let inv = mm.try_inverse().ok_or(Error::Singular)?;
    let j = ComplexStructure::matrix();
    Ok(CorrelationMatrix::from_computed(-j * inv * j))
}

/// Local symplectic `S` taking `M_W` to standard form, and the resulting parameters.
pub fn wigner_standard_form(m: &CorrelationMatrix) -> Result<(LocalSymplectic, WignerParams)> {
    let phys = is_physical(m)?;
    if !phys.physical {
        return Err(phys.into_error());
    }
    let (s, w) = reduce_local(&wigner_correlation(m)?)?;
    let w = w.matrix();
    let params = WignerParams {
        n_a: 0.5 * (w[(0, 0)] + w[(1, 1)]),
        n_b: 0.5 * (w[(2, 2)] + w[(3, 3)]),
        k_x: w[(0, 2)],
        k_p: w[(1, 3)],
    };
    Ok((s, params))
}

/// Beam-splitter angle that equalizes the local determinants,
/// `tan²θ = (N_a² - N_b²) / (N_b - D_x N_a)` with the ancilla on the side of
/// smaller Wigner parameter. Labels are swapped internally when `N_a < N_b`.
pub fn symmetrization_angle(p: &WignerParams) -> Result<SymmetrizationPlan> {
    let (q, side) = if p.n_a < p.n_b { (p.swapped(), Side::A) } else { (*p, Side::B) };
    let num = q.n_a * q.n_a - q.n_b * q.n_b;
    let tan2 = if num <= tol::SYMMETRY * q.n_a * q.n_a {
        0.0
    } else {
        let value = num / (q.n_b - q.d_x() * q.n_a);
        if value.is_nan() || value < -tol::DEAD_BAND {
            return Err(Error::NegativeAngleArgument { value });
        }
        value.max(0.0)
    };
    let theta = tan2.sqrt().atan();
    let (s, c) = theta.sin_cos();
    Ok(SymmetrizationPlan { theta, c, s, nu: s * s * q.n_b + c * c, side })
}

/// Wigner correlation matrix of the state conditioned on the ancilla's
/// homodyne outcome (outcome-independent; the displacement is discarded).
pub fn symmetrize(p: &WignerParams, plan: &SymmetrizationPlan) -> CorrelationMatrix {
    let q = if plan.side == Side::A { p.swapped() } else { *p };
    let SymmetrizationPlan { c, s, nu, .. } = *plan;
    let (c2, s2) = (c * c, s * s);
    let mut m = nalgebra::Matrix4::zeros();
    m[(0, 0)] = (c2 * q.n_a + s2 * q.d_x()) / nu;
    m[(1, 1)] = (c2 * q.n_a + s2 * q.n_a * q.n_b) / nu;
    m[(2, 2)] = q.n_b / nu;
    m[(3, 3)] = c2 * q.n_b + s2;
    m[(0, 2)] = c * q.k_x / nu;
    m[(2, 0)] = m[(0, 2)];
    m[(1, 3)] = c * q.k_p;
    m[(3, 1)] = m[(1, 3)];
    let m = CorrelationMatrix::from_computed(m);
    if plan.side == Side::A {
        m.swap_modes()
    } else {
        m
    }
}

/// Output of [`symmetrize_pipeline`].
#[derive(Clone, Debug, PartialEq)]
pub struct Symmetrized {
    /// Symmetric standard form in the characteristic-function domain.
    pub matrix: CorrelationMatrix,
    pub params: StandardFormParams,
    pub trace: Vec<TransformRecord>,
}

/// Brings a physical state to symmetric standard form, symmetrizing with an
/// ancilla first when the local determinants differ.
pub fn symmetrize_pipeline(m: &CorrelationMatrix) -> Result<Symmetrized> {
    let (s, std) = bring_to_standard_form(m)?;
    let params = standard_form_params(&std)?;
    if params.is_symmetric(tol::STRUCTURAL * params.n_a) {
        return Ok(Symmetrized { matrix: std, params, trace: vec![TransformRecord::local(&s)] });
    }

    let (s_w, wp) = wigner_standard_form(m)?;
    let plan = symmetrization_angle(&wp)?;
    let conditioned = wigner_correlation(&symmetrize(&wp, &plan))?;
    let (s_final, matrix) = bring_to_standard_form(&conditioned)?;
    let params = standard_form_params(&matrix)?;
    Ok(Symmetrized {
        matrix,
        params,
        trace: vec![
            TransformRecord::local(&s_w),
            TransformRecord::AncillaBeamSplitter { side: plan.side, theta: plan.theta },
            TransformRecord::local(&s_final),
        ],
    })
}
