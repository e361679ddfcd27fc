//! Correlation matrices, local symplectic transformations and the
//! criteria that decide physicality, inseparability and distillability of
//! two-mode Gaussian states.

mod criteria;
mod random;
mod standard_form;

pub use criteria::{
    evaluate_characteristic, invariants, is_inseparable, is_physical, reduction_functional_gaussian,
    symmetric_rc_holds, Criterion, Decision, Invariants, Physicality,
};
pub use random::{random_physical_state, random_physical_states, ParamBox, RandomStateSpec};
pub use standard_form::{bring_to_standard_form, params_from_invariants, standard_form_params};

pub(crate) use standard_form::reduce_local;

use nalgebra::{Matrix2, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

/// 4×4 real symmetric matrix of quadrature second moments, axes
/// `(q_a, p_a, q_b, p_b)`, vacuum = identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationMatrix(Matrix4<f64>);

impl CorrelationMatrix {
    /// Wraps `m` after checking it is finite and symmetric to [`tol::SYMMETRY`]
    /// (relative to the largest entry when that exceeds one).
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        let scale = m.amax().max(1.0);
        let asym = (m - m.transpose()).amax();
        if asym > tol::SYMMETRY * scale {
            return Err(Error::InvalidMatrix(format!("not symmetric (max |M_ij - M_ji| = {asym:e})")));
        }
        Ok(Self(symmetrized(&m)))
    }

    /// For matrices produced by congruences and inversions, where round-off
    /// breaks exact symmetry.
    pub(crate) fn from_computed(m: Matrix4<f64>) -> Self {
        Self(symmetrized(&m))
    }

    pub fn from_rows(rows: [[f64; 4]; 4]) -> Result<Self> {
        Self::new(Matrix4::from_fn(|i, j| rows[i][j]))
    }

    pub fn vacuum() -> Self {
        Self(Matrix4::identity())
    }

    /// Product of single-mode thermal states, `diag(n_a, n_a, n_b, n_b)`.
    pub fn thermal(n_a: f64, n_b: f64) -> Self {
        Self(Matrix4::from_diagonal(&Vector4::new(n_a, n_a, n_b, n_b)))
    }

    /// Standard-form matrix for the given parameters.
    pub fn standard_form(p: &StandardFormParams) -> Self {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = p.n_a;
        m[(1, 1)] = p.n_a;
        m[(2, 2)] = p.n_b;
        m[(3, 3)] = p.n_b;
        m[(0, 2)] = p.k_x;
        m[(2, 0)] = p.k_x;
        m[(1, 3)] = p.k_p;
        m[(3, 1)] = p.k_p;
        Self(m)
    }

    /// Two-mode squeezed vacuum in the parameterization
    /// `n_a = n_b = cosh r`, `k_x = -k_p = sinh r`.
    ///
    /// Under the vacuum = identity convention this is the Gaussian state whose
    /// Fock amplitudes are `tanhⁿ(r/2)/cosh(r/2)`; i.e.
    /// [`FockVector::two_mode_squeezed(s, _)`](crate::FockVector::two_mode_squeezed)
    /// corresponds to `CorrelationMatrix::two_mode_squeezed(2 s)`.
    pub fn two_mode_squeezed(r: f64) -> Self {
        Self::standard_form(&StandardFormParams { n_a: r.cosh(), n_b: r.cosh(), k_x: r.sinh(), k_p: -r.sinh() })
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn block_a(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn block_b(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(2, 2).into_owned()
    }

    /// Off-diagonal block `M_AB` (rows mode a, columns mode b).
    pub fn block_ab(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 2).into_owned()
    }

    pub fn from_blocks(a: &Matrix2<f64>, b: &Matrix2<f64>, ab: &Matrix2<f64>) -> Self {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(a);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(b);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(ab);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&ab.transpose());
        Self::from_computed(m)
    }

    /// Exchanges the labels of the two modes.
    pub fn swap_modes(&self) -> Self {
        let p = swap_permutation();
        Self::from_computed(p * self.0 * p.transpose())
    }

    /// Largest deviation from the standard-form shape: off-diagonal entries
    /// of the local blocks, anisotropy of the local blocks, and off-diagonal
    /// entries of `M_AB`.
    pub fn standard_form_defect(&self) -> f64 {
        let a = self.block_a();
        let b = self.block_b();
        let c = self.block_ab();
        [
            a[(0, 1)].abs(),
            (a[(0, 0)] - a[(1, 1)]).abs(),
            b[(0, 1)].abs(),
            (b[(0, 0)] - b[(1, 1)]).abs(),
            c[(0, 1)].abs(),
            c[(1, 0)].abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn to_rows(&self) -> [[f64; 4]; 4] {
        let mut rows = [[0.0; 4]; 4];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.0[(i, j)];
            }
        }
        rows
    }
}

fn symmetrized(m: &Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) * 0.5
}

fn swap_permutation() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, 0.0,
    )
}

/// Correlation matrix plus first moments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianState {
    cm: CorrelationMatrix,
    displacement: Vector4<f64>,
}

impl GaussianState {
    pub fn new(cm: CorrelationMatrix, displacement: Vector4<f64>) -> Result<Self> {
        let phys = is_physical(&cm)?;
        if !phys.physical {
            return Err(phys.into_error());
        }
        Ok(Self { cm, displacement })
    }

    pub fn centered(cm: CorrelationMatrix) -> Result<Self> {
        Self::new(cm, Vector4::zeros())
    }

    pub fn cm(&self) -> &CorrelationMatrix {
        &self.cm
    }

    pub fn displacement(&self) -> &Vector4<f64> {
        &self.displacement
    }

    /// Local displacement back to the origin; leaves the correlation matrix alone.
    pub fn remove_displacement(&self) -> Self {
        Self { cm: self.cm, displacement: Vector4::zeros() }
    }
}

/// `(n_a, n_b, k_x, k_p)`, with `k_x ≥ |k_p|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardFormParams {
    pub n_a: f64,
    pub n_b: f64,
    pub k_x: f64,
    pub k_p: f64,
}

impl StandardFormParams {
    pub fn symmetric(n: f64, k_x: f64, k_p: f64) -> Self {
        Self { n_a: n, n_b: n, k_x, k_p }
    }

    /// Margins of the two physicality inequalities on the parameters,
    /// `(LHS - RHS)` for the determinant condition and `n_a n_b - k_x² - 1`.
    pub fn physicality_margins(&self) -> (f64, f64) {
        let Self { n_a, n_b, k_x, k_p } = *self;
        let prod = n_a * n_b;
        let lhs = (prod - k_x * k_x) * (prod - k_p * k_p) + 1.0;
        let rhs = n_a * n_a + n_b * n_b + 2.0 * k_x * k_p;
        (lhs - rhs, prod - k_x * k_x - 1.0)
    }

    /// `RHS - LHS` of the inseparability inequality; positive means entangled.
    pub fn inseparability_margin(&self) -> f64 {
        let Self { n_a, n_b, k_x, k_p } = *self;
        let prod = n_a * n_b;
        let lhs = (prod - k_x * k_x) * (prod - k_p * k_p) + 1.0;
        let rhs = n_a * n_a + n_b * n_b - 2.0 * k_x * k_p;
        rhs - lhs
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.n_a - self.n_b).abs() <= tol
    }
}

/// Block-diagonal symplectic `s_a ⊕ s_b` acting on correlation matrices
/// by congruence `M ↦ S M Sᵀ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalSymplectic {
    pub s_a: Matrix2<f64>,
    pub s_b: Matrix2<f64>,
}

impl LocalSymplectic {
    pub fn new(s_a: Matrix2<f64>, s_b: Matrix2<f64>) -> Result<Self> {
        let (det_a, det_b) = (s_a.determinant(), s_b.determinant());
        if (det_a - 1.0).abs() > tol::SYMPLECTIC_DET || (det_b - 1.0).abs() > tol::SYMPLECTIC_DET {
            return Err(Error::NotSymplectic { det_a, det_b });
        }
        Ok(Self { s_a, s_b })
    }

    pub fn identity() -> Self {
        Self { s_a: Matrix2::identity(), s_b: Matrix2::identity() }
    }

    /// Phase rotations `(q, p) ↦ (q cos φ - p sin φ, q sin φ + p cos φ)` on each mode.
    pub fn rotation(phi_a: f64, phi_b: f64) -> Self {
        Self { s_a: rotation(phi_a), s_b: rotation(phi_b) }
    }

    /// Single-mode squeezers `diag(e^{-z}, e^{z})` on each mode.
    pub fn squeeze(z_a: f64, z_b: f64) -> Self {
        Self { s_a: squeezer(z_a), s_b: squeezer(z_b) }
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &LocalSymplectic) -> Self {
        Self { s_a: next.s_a * self.s_a, s_b: next.s_b * self.s_b }
    }

    pub fn inverse(&self) -> Self {
        // det = 1, so the inverse is the adjugate.
        let adj = |s: &Matrix2<f64>| Matrix2::new(s[(1, 1)], -s[(0, 1)], -s[(1, 0)], s[(0, 0)]);
        Self { s_a: adj(&self.s_a), s_b: adj(&self.s_b) }
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.s_a);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.s_b);
        m
    }

    pub fn apply(&self, cm: &CorrelationMatrix) -> CorrelationMatrix {
        let s = self.matrix();
        CorrelationMatrix::from_computed(s * cm.matrix() * s.transpose())
    }
}

pub(crate) fn rotation(phi: f64) -> Matrix2<f64> {
    let (s, c) = phi.sin_cos();
    Matrix2::new(c, -s, s, c)
}

pub(crate) fn squeezer(z: f64) -> Matrix2<f64> {
    Matrix2::new((-z).exp(), 0.0, 0.0, z.exp())
}

/// The complex structure `J`: `(q_a, p_a, q_b, p_b) ↦ (-p_a, q_a, -p_b, q_b)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexStructure;

impl ComplexStructure {
    pub fn matrix() -> Matrix4<f64> {
        Matrix4::new(
            0.0, -1.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, -1.0, //
            0.0, 0.0, 1.0, 0.0,
        )
    }

    pub fn apply(v: &Vector4<f64>) -> Vector4<f64> {
        Vector4::new(-v[1], v[0], -v[3], v[2])
    }
}
