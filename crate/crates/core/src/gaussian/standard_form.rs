use nalgebra::Matrix2;

use super::criteria::{invariants, is_physical, Invariants};
use super::{rotation, CorrelationMatrix, LocalSymplectic, StandardFormParams};
use crate::error::{Error, Result};

/// Symplectic `s` with `s b sᵀ = √det(b) · 1` for a 2×2 positive block `b`.
///
/// `s = det(b)^{1/4} b^{-1/2}`; it rotates onto the principal axes, squeezes
/// them to equal length and rotates back.
fn normalize_block(b: &Matrix2<f64>) -> Option<Matrix2<f64>> {
    let det = b.determinant();
    let tr = b.trace();
    if !(det > 0.0 && tr > 0.0) {
        return None;
    }
    let sd = det.sqrt();
    let sqrt_b = (b + Matrix2::identity() * sd) / (tr + 2.0 * sd).sqrt();
    // det(sqrt_b) = sd, so its inverse is adj / sd.
    let adj = Matrix2::new(sqrt_b[(1, 1)], -sqrt_b[(0, 1)], -sqrt_b[(1, 0)], sqrt_b[(0, 0)]);
    Some(adj * (sd.sqrt() / sd))
}

/// Signed singular value decomposition with proper rotations:
/// `c = R(β) · diag(s1, s2) · R(γ)`, `s1 ≥ |s2|`.
pub(crate) fn signed_svd2(c: &Matrix2<f64>) -> (f64, f64, f64, f64) {
    let e = 0.5 * (c[(0, 0)] + c[(1, 1)]);
    let f = 0.5 * (c[(0, 0)] - c[(1, 1)]);
    let g = 0.5 * (c[(1, 0)] + c[(0, 1)]);
    let h = 0.5 * (c[(1, 0)] - c[(0, 1)]);
    let q = e.hypot(h);
    let r = f.hypot(g);
    let a1 = g.atan2(f);
    let a2 = h.atan2(e);
    (0.5 * (a2 + a1), 0.5 * (a2 - a1), q + r, q - r)
}

/// Reduces any matrix with positive-definite local blocks to standard-form
/// shape. No physicality requirement, so this also serves Wigner-domain matrices.
pub(crate) fn reduce_local(m: &CorrelationMatrix) -> Result<(LocalSymplectic, CorrelationMatrix)> {
    let not_positive = || Error::InvalidMatrix("local block is not positive definite".into());
    let sa = normalize_block(&m.block_a()).ok_or_else(not_positive)?;
    let sb = normalize_block(&m.block_b()).ok_or_else(not_positive)?;
    let c = sa * m.block_ab() * sb.transpose();
    let (beta, gamma, _, _) = signed_svd2(&c);
    let s = LocalSymplectic { s_a: rotation(-beta) * sa, s_b: rotation(gamma) * sb };
    Ok((s, s.apply(m)))
}

/// Local symplectic `S` and `M_std = S M Sᵀ` in standard form.
pub fn bring_to_standard_form(m: &CorrelationMatrix) -> Result<(LocalSymplectic, CorrelationMatrix)> {
    let phys = is_physical(m)?;
    if !phys.physical {
        return Err(phys.into_error());
    }
    reduce_local(m)
}

/// Standard-form parameters of `m`, with `k_x ≥ |k_p|` and `sign(k_p) = sign |M_AB|`.
///
/// Existence of a real solution is decided from the four invariants; the
/// values themselves are taken from the locally normalized off-diagonal block,
/// which avoids the square-root loss of precision of the invariant route when
/// `k_x ≈ |k_p|` (e.g. for pure states).
pub fn standard_form_params(m: &CorrelationMatrix) -> Result<StandardFormParams> {
    let inv = invariants(m);
    params_from_invariants(&inv)?;
    let sa = normalize_block(&m.block_a()).ok_or(Error::NoRealSolution { discriminant: inv.det_a })?;
    let sb = normalize_block(&m.block_b()).ok_or(Error::NoRealSolution { discriminant: inv.det_b })?;
    let (_, _, k_x, k_p) = signed_svd2(&(sa * m.block_ab() * sb.transpose()));
    Ok(StandardFormParams { n_a: inv.det_a.sqrt(), n_b: inv.det_b.sqrt(), k_x, k_p })
}

/// Solves `n_a² = |M_A|`, `n_b² = |M_B|`, `k_x k_p = |M_AB|`,
/// `(n_a n_b - k_x²)(n_a n_b - k_p²) = |M|` for the parameters.
///
/// Eliminating the product gives a quadratic in `k_x²` whose roots are
/// `k_x²` and `k_p²`; the larger root is `k_x²`.
pub fn params_from_invariants(inv: &Invariants) -> Result<StandardFormParams> {
    if !(inv.det_a > 0.0 && inv.det_b > 0.0) {
        return Err(Error::NoRealSolution { discriminant: inv.det_a.min(inv.det_b) });
    }
    let n_a = inv.det_a.sqrt();
    let n_b = inv.det_b.sqrt();
    let prod = n_a * n_b;
    let c = inv.det_ab;
    let sum_sq = (prod * prod + c * c - inv.det) / prod;
    let disc = sum_sq * sum_sq - 4.0 * c * c;
    let scale = sum_sq.abs().max(c.abs()).max(1.0);
    if disc < -1e-9 * scale * scale || sum_sq < -1e-9 * scale {
        return Err(Error::NoRealSolution { discriminant: disc });
    }
    let kx2 = 0.5 * (sum_sq.max(0.0) + disc.max(0.0).sqrt());
    let k_x = kx2.sqrt();
    let k_p = if k_x > 0.0 { c / k_x } else { 0.0 };
    Ok(StandardFormParams { n_a, n_b, k_x, k_p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::LocalSymplectic;
    use approx::assert_abs_diff_eq;

    fn assert_params(p: StandardFormParams, q: (f64, f64, f64, f64), eps: f64) {
        assert_abs_diff_eq!(p.n_a, q.0, epsilon = eps);
        assert_abs_diff_eq!(p.n_b, q.1, epsilon = eps);
        assert_abs_diff_eq!(p.k_x, q.2, epsilon = eps);
        assert_abs_diff_eq!(p.k_p, q.3, epsilon = eps);
    }

    #[test]
    fn signed_svd_reconstructs() {
        for c in [
            Matrix2::new(1.0, 2.0, -0.3, 0.7),
            Matrix2::new(-2.0, 0.0, 0.0, 0.5),
            Matrix2::new(0.0, 1.0, 1.0, 0.0),
            Matrix2::new(0.2, -1.5, 1.1, -0.4),
        ] {
            let (b, g, s1, s2) = signed_svd2(&c);
            let back = rotation(b) * Matrix2::new(s1, 0.0, 0.0, s2) * rotation(g);
            assert_abs_diff_eq!(back, c, epsilon = 1e-13);
            assert!(s1 >= s2.abs());
        }
    }

    #[test]
    fn vacuum_params() {
        let p = standard_form_params(&CorrelationMatrix::vacuum()).unwrap();
        assert_params(p, (1.0, 1.0, 0.0, 0.0), 1e-15);
    }

    #[test]
    fn tmss_params() {
        let r = 1.0_f64;
        let p = standard_form_params(&CorrelationMatrix::two_mode_squeezed(r)).unwrap();
        assert_params(p, (r.cosh(), r.cosh(), r.sinh(), -r.sinh()), 1e-12);
    }

    #[test]
    fn thermal_product_params() {
        let m = CorrelationMatrix::thermal(3.0, 2.0);
        assert_params(standard_form_params(&m).unwrap(), (3.0, 2.0, 0.0, 0.0), 1e-14);
        assert_params(params_from_invariants(&invariants(&m)).unwrap(), (3.0, 2.0, 0.0, 0.0), 1e-12);
    }

    #[test]
    fn invariant_route_agrees_away_from_ties() {
        let p = StandardFormParams { n_a: 2.5, n_b: 1.7, k_x: 1.2, k_p: -0.4 };
        let m = CorrelationMatrix::standard_form(&p);
        let q = params_from_invariants(&invariants(&m)).unwrap();
        assert_params(q, (p.n_a, p.n_b, p.k_x, p.k_p), 1e-12);
    }

    #[test]
    fn no_real_solution_for_indefinite_block() {
        let mut m = *CorrelationMatrix::vacuum().matrix();
        m[(0, 0)] = -1.0;
        let m = CorrelationMatrix::new(m).unwrap();
        assert!(matches!(standard_form_params(&m), Err(Error::NoRealSolution { .. })));
    }

    #[test]
    fn rotated_tmss_round_trip() {
        let r = 0.9_f64;
        let m = CorrelationMatrix::two_mode_squeezed(r);
        let scrambled = LocalSymplectic::rotation(0.7, -2.1)
            .then(&LocalSymplectic::squeeze(0.4, -0.3))
            .then(&LocalSymplectic::rotation(1.3, 0.2))
            .apply(&m);
        let (s, std) = bring_to_standard_form(&scrambled).unwrap();
        assert!(std.standard_form_defect() < 1e-9);
        assert_abs_diff_eq!(s.apply(&scrambled).matrix(), std.matrix(), epsilon = 1e-12);
        let p = standard_form_params(&std).unwrap();
        assert_params(p, (r.cosh(), r.cosh(), r.sinh(), -r.sinh()), 1e-9);
        assert_abs_diff_eq!(std.matrix(), m.matrix(), epsilon = 1e-9);
    }

    #[test]
    fn already_standard_is_fixed() {
        let m = CorrelationMatrix::standard_form(&StandardFormParams { n_a: 3.0, n_b: 2.0, k_x: 1.5, k_p: -0.5 });
        let (s, std) = bring_to_standard_form(&m).unwrap();
        assert_abs_diff_eq!(std.matrix(), m.matrix(), epsilon = 1e-13);
        // Identity up to axis sign flips.
        for blk in [s.s_a, s.s_b] {
            for (i, j) in [(0, 1), (1, 0)] {
                assert_abs_diff_eq!(blk[(i, j)], 0.0, epsilon = 1e-13);
            }
            assert_abs_diff_eq!(blk[(0, 0)].abs(), 1.0, epsilon = 1e-13);
            assert_abs_diff_eq!(blk[(1, 1)].abs(), 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn unphysical_input_rejected() {
        let m = CorrelationMatrix::from_computed(*CorrelationMatrix::vacuum().matrix() * 0.5);
        assert!(matches!(bring_to_standard_form(&m), Err(Error::NotPhysical { .. })));
    }
}
