//! Direct numerical inversion of the characteristic function, used as an
//! independent check of the circuit-based conversion.
//!
//! `ρ = (2π)^{-2} ∫ χ(ξ) D(-ξ) d⁴ξ` with `D(ξ) = D(α)` per mode,
//! `α = (p - iq)/√2`. The Gaussian part of `⟨m|D(β)|n⟩` combines with `χ`
//! into `exp(-ξᵀ (M + 1) ξ / 4)`, which a Cholesky change of variables turns
//! into the Gauss–Hermite weight; the rest is a polynomial, so a tensor rule
//! of order `2 N_c + 2` is exact up to round-off.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

use super::{FockDensity, ZERO};
use crate::error::{Error, Result};
use crate::gaussian::GaussianState;

/// Largest cutoff the oracle accepts.
pub const MAX_ORACLE_CUTOFF: usize = 3;

/// Nodes and weights for `∫ f(x) e^{-x²} dx` (Golub–Welsch).
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi =
        DMatrix::from_fn(order, order, |i, j| if i.abs_diff(j) == 1 { (i.max(j) as f64 / 2.0).sqrt() } else { 0.0 });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Generalized Laguerre `L_n^{(α)}(x)` by the three-term recurrence.
fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 + alpha - x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `e^{|β|²/2} ⟨m|D(β)|n⟩` for `m, n ≤ cutoff`.
fn reduced_displacement(beta: Complex64, cutoff: usize) -> DMatrix<Complex64> {
    let x = beta.norm_sqr();
    DMatrix::from_fn(cutoff + 1, cutoff + 1, |m, n| {
        if m >= n {
            let d = m - n;
            beta.powu(d as u32) * ((factorial(n) / factorial(m)).sqrt() * laguerre(n, d as f64, x))
        } else {
            let d = n - m;
            (-beta.conj()).powu(d as u32) * ((factorial(m) / factorial(n)).sqrt() * laguerre(m, d as f64, x))
        }
    })
}

fn integrate(state: &GaussianState, cutoff: usize, order: usize) -> Result<DMatrix<Complex64>> {
    let b: Matrix4<f64> = (state.cm().matrix() + Matrix4::identity()) * 0.25;
    let chol = b.cholesky().ok_or(Error::Singular)?;
    let l = chol.l();
    let lt_inv = l.transpose().try_inverse().ok_or(Error::Singular)?;
    let jac = 1.0 / l.determinant();
    let (nodes, weights) = gauss_hermite(order);

    let levels = cutoff + 1;
    let d = levels * levels;
    let mut rho = DMatrix::from_element(d, d, ZERO);
    let sqrt2 = std::f64::consts::SQRT_2;
    for (i0, &u0) in nodes.iter().enumerate() {
        for (i1, &u1) in nodes.iter().enumerate() {
            for (i2, &u2) in nodes.iter().enumerate() {
                for (i3, &u3) in nodes.iter().enumerate() {
                    let w = weights[i0] * weights[i1] * weights[i2] * weights[i3];
                    let xi: Vector4<f64> = lt_inv * Vector4::new(u0, u1, u2, u3);
                    // χ and the Gaussian factor of D are both in the weight.
                    let scale = Complex64::new(w, 0.0);
                    // D(-ξ): β = -α = (iq - p)/√2 per mode.
                    let beta_a = Complex64::new(-xi[1], xi[0]) / sqrt2;
                    let beta_b = Complex64::new(-xi[3], xi[2]) / sqrt2;
                    let da = reduced_displacement(beta_a, cutoff);
                    let db = reduced_displacement(beta_b, cutoff);
                    for ma in 0..levels {
                        for na in 0..levels {
                            let fa = da[(ma, na)] * scale;
                            for mb in 0..levels {
                                for nb in 0..levels {
                                    rho[(ma * levels + mb, na * levels + nb)] += fa * db[(mb, nb)];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let norm = jac / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
    Ok(rho.map(|z| z * norm))
}

/// Fock matrix elements of a centered Gaussian state by quadrature of its
/// characteristic function, for `cutoff ≤ 3`.
pub fn fock_oracle_quadrature(state: &GaussianState, cutoff: usize) -> Result<FockDensity> {
    if cutoff > MAX_ORACLE_CUTOFF {
        return Err(Error::InvalidConfig(format!("quadrature oracle supports cutoff ≤ {MAX_ORACLE_CUTOFF}")));
    }
    if state.displacement().iter().any(|&x| x != 0.0) {
        return Err(Error::NonZeroDisplacement);
    }
    let order = 2 * cutoff + 2;
    let lo = integrate(state, cutoff, order)?;
    let hi = integrate(state, cutoff, order + 2)?;
    let difference = lo.iter().zip(hi.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if difference > 1e-7 {
        return Err(Error::QuadratureNotConverged { difference });
    }
    Ok(FockDensity::from_matrix(cutoff, hi))
}
