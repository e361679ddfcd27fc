//! Two-mode symplectic factorizations.
//!
//! `Sp(4)` is taken with respect to [`ComplexStructure`]: `S J Sᵀ = J`.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::ComplexStructure;

/// `M = S · diag(ν₁, ν₁, ν₂, ν₂) · Sᵀ` with `S` symplectic and `ν₁ ≤ ν₂`.
#[derive(Clone, Debug)]
pub struct Williamson {
    pub symplectic: Matrix4<f64>,
    pub nu: [f64; 2],
}

/// `S = O₁ · diag(λ₁, 1/λ₁, λ₂, 1/λ₂) · O₂` with `O₁`, `O₂` orthogonal
/// symplectic and `λ₁ ≥ λ₂ ≥ 1`.
#[derive(Clone, Debug)]
pub struct BlochMessiah {
    pub outer: Matrix4<f64>,
    pub lambda: [f64; 2],
    pub inner: Matrix4<f64>,
}

impl BlochMessiah {
    pub fn squeeze_matrix(&self) -> Matrix4<f64> {
        let [l1, l2] = self.lambda;
        Matrix4::from_diagonal(&Vector4::new(l1, 1.0 / l1, l2, 1.0 / l2))
    }
}

pub fn is_symplectic(s: &Matrix4<f64>, tol: f64) -> bool {
    let j = ComplexStructure::matrix();
    (s * j * s.transpose() - j).amax() <= tol
}

fn sym_sqrt(m: &Matrix4<f64>) -> Result<(Matrix4<f64>, Matrix4<f64>)> {
    let eig = SymmetricEigen::new((m + m.transpose()) * 0.5);
    let scale = eig.eigenvalues.amax().max(1.0);
    if eig.eigenvalues.iter().any(|&l| l <= 1e-13 * scale) {
        return Err(Error::Singular);
    }
    let v = eig.eigenvectors;
    let root = eig.eigenvalues.map(f64::sqrt);
    let sqrt = v * Matrix4::from_diagonal(&root) * v.transpose();
    let inv_sqrt = v * Matrix4::from_diagonal(&root.map(|x| 1.0 / x)) * v.transpose();
    Ok((sqrt, inv_sqrt))
}

/// Orthonormal `[u1, v1, u2, v2]` with `X u_i = μ_i v_i`, `X v_i = -μ_i u_i`
/// for antisymmetric `X`, `μ₁ ≥ μ₂ ≥ 0`.
fn antisymmetric_frame(x: &Matrix4<f64>) -> (Matrix4<f64>, [f64; 2]) {
    let gram = x.transpose() * x;
    let eig = SymmetricEigen::new((gram + gram.transpose()) * 0.5);
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let u1 = eig.eigenvectors.column(order[0]).into_owned();
    let mu1 = (x * u1).norm();
    let v1 = complete(x, &u1, mu1, &[]);

    // A vector of the complement: the eigenvector with the largest residual.
    let residual = |c: &Vector4<f64>| c - u1 * u1.dot(c) - v1 * v1.dot(c);
    let seed = order[1..]
        .iter()
        .map(|&k| residual(&eig.eigenvectors.column(k).into_owned()))
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("three candidates");
    let u2 = seed.normalize();
    let mu2 = (x * u2).norm();
    let v2 = complete(x, &u2, mu2, &[u1, v1]);

    (Matrix4::from_columns(&[u1, v1, u2, v2]), [mu1, mu2])
}

/// `X u / |X u|`, or any unit vector orthogonal to `u` and `taken` when
/// `X u` vanishes.
fn complete(x: &Matrix4<f64>, u: &Vector4<f64>, mu: f64, taken: &[Vector4<f64>]) -> Vector4<f64> {
    if mu > 1e-14 {
        return (x * u) / mu;
    }
    let mut best = Vector4::zeros();
    for k in 0..4 {
        let mut c = Vector4::zeros();
        c[k] = 1.0;
        c -= u * u.dot(&c);
        for t in taken {
            c -= t * t.dot(&c);
        }
        if c.norm() > best.norm() {
            best = c;
        }
    }
    best.normalize()
}

/// Williamson normal form of a positive-definite `M`.
pub fn williamson(m: &Matrix4<f64>) -> Result<Williamson> {
    let (sqrt, inv_sqrt) = sym_sqrt(m)?;
    let k = inv_sqrt * ComplexStructure::matrix() * inv_sqrt;
    let (frame, mu) = antisymmetric_frame(&k);
    let nu = [1.0 / mu[0], 1.0 / mu[1]];
    let d = Vector4::new(nu[0], nu[0], nu[1], nu[1]).map(|x| 1.0 / x.sqrt());
    let symplectic = sqrt * frame * Matrix4::from_diagonal(&d);
    Ok(Williamson { symplectic, nu })
}

/// Symplectic eigenvalues `ν₁ ≤ ν₂` of a positive-definite `M`.
pub fn symplectic_eigenvalues(m: &Matrix4<f64>) -> Result<[f64; 2]> {
    williamson(m).map(|w| w.nu)
}

/// Bloch–Messiah (Euler) decomposition of a symplectic `S`.
pub fn bloch_messiah(s: &Matrix4<f64>) -> Result<BlochMessiah> {
    let (p, p_inv) = sym_sqrt(&(s.transpose() * s))?;
    let orth = s * p_inv;
    let j = ComplexStructure::matrix();

    let eig = SymmetricEigen::new(p);
    let top = eig.eigenvalues.imax();
    let q1 = eig.eigenvectors.column(top).into_owned();
    let jq1 = j * q1;

    let mut b = Vector4::zeros();
    for k in 0..4 {
        let mut c = Vector4::zeros();
        c[k] = 1.0;
        c -= q1 * q1.dot(&c) + jq1 * jq1.dot(&c);
        if c.norm() > b.norm() {
            b = c;
        }
    }
    let b = b.normalize();
    let jb = j * b;
    // P restricted to the complement span{b, Jb}.
    let pb = p * b;
    let pjb = p * jb;
    let restricted = Matrix2::new(b.dot(&pb), b.dot(&pjb), jb.dot(&pb), jb.dot(&pjb));
    let r_eig = SymmetricEigen::new((restricted + restricted.transpose()) * 0.5);
    let c = r_eig.eigenvectors.column(r_eig.eigenvalues.imax());
    let q3 = (b * c[0] + jb * c[1]).normalize();

    let q = Matrix4::from_columns(&[q1, jq1, q3, j * q3]);
    let lambda = [q1.dot(&(p * q1)), q3.dot(&(p * q3))];
    Ok(BlochMessiah { outer: orth * q, lambda, inner: q.transpose() })
}

/// Two-mode unitary `U` of a passive (orthogonal symplectic) `O`, defined by
/// `Û a_k† Û† = Σ_j U_jk a_j†`.
pub fn passive_unitary(o: &Matrix4<f64>) -> Matrix2<Complex64> {
    Matrix2::from_fn(|j, k| Complex64::new(o[(2 * j, 2 * k)], o[(2 * j + 1, 2 * k)]))
}
