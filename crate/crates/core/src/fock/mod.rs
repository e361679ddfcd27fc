//! Truncated two-mode Fock space.
//!
//! Two-mode states live on `{|0⟩…|N_c⟩} ⊗ {|0⟩…|N_c⟩}` with the flat index
//! `n_a · (N_c + 1) + n_b`.

mod convert;
mod criterion;
mod protocol;
mod quadrature;

pub use convert::{gaussian_to_fock, gaussian_to_fock_with, ConversionOptions, FockConversion};
pub use criterion::{project_unnormalized, reduction_functional_fock, truncate_project};
pub use protocol::{
    distill_branch, distill_round, distill_round_with_guard, duan_round, fidelity_phi_plus, filter_operation,
    twirl_isotropic, xor_gate, DuanOutcome, DuanRound, MEMORY_GUARD,
};
pub use quadrature::{fock_oracle_quadrature, gauss_hermite};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    cutoff: usize,
    amplitudes: DVector<Complex64>,
}

impl FockVector {
    pub fn new(cutoff: usize, amplitudes: DVector<Complex64>) -> Result<Self> {
        let levels = cutoff + 1;
        if amplitudes.len() != levels * levels {
            return Err(Error::DimensionMismatch(format!("{} amplitudes for cutoff {cutoff}", amplitudes.len())));
        }
        let norm = amplitudes.norm_squared();
        if norm > 1.0 + 1e-12 {
            return Err(Error::InvalidConfig(format!("state norm² {norm} exceeds 1")));
        }
        Ok(Self { cutoff, amplitudes })
    }

    /// `Σ_n tanhⁿ(r)/cosh(r) |n, n⟩`, truncated at `cutoff`.
    pub fn two_mode_squeezed(r: f64, cutoff: usize) -> Self {
        let levels = cutoff + 1;
        let mut amplitudes = DVector::from_element(levels * levels, ZERO);
        let t = r.tanh();
        let mut a = 1.0 / r.cosh();
        for n in 0..levels {
            amplitudes[n * levels + n] = Complex64::new(a, 0.0);
            a *= t;
        }
        Self { cutoff, amplitudes }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn levels(&self) -> usize {
        self.cutoff + 1
    }

    pub fn amplitude(&self, n_a: usize, n_b: usize) -> Complex64 {
        self.amplitudes[n_a * self.levels() + n_b]
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn density(&self) -> FockDensity {
        let a = &self.amplitudes;
        FockDensity { cutoff: self.cutoff, rho: a * a.adjoint() }
    }
}

/// `|Φ₊^N⟩ = N^{-1/2} Σ_{k<N} |k, k⟩` on the lowest `N` photon numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiniteMaxEntangled {
    pub dim: usize,
}

impl FiniteMaxEntangled {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }

    pub fn vector(&self, cutoff: usize) -> Result<FockVector> {
        let levels = cutoff + 1;
        if self.dim == 0 || self.dim > levels {
            return Err(Error::DimensionMismatch(format!(
                "maximally entangled dimension {} does not fit cutoff {cutoff}",
                self.dim
            )));
        }
        let mut amplitudes = DVector::from_element(levels * levels, ZERO);
        let a = Complex64::new(1.0 / (self.dim as f64).sqrt(), 0.0);
        for k in 0..self.dim {
            amplitudes[k * levels + k] = a;
        }
        Ok(FockVector { cutoff, amplitudes })
    }

    pub fn density(&self) -> FockDensity {
        self.vector(self.dim - 1).expect("fits its own cutoff").density()
    }
}

/// Single-system operator `A` with `A A† ≤ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterMatrix {
    a: DMatrix<Complex64>,
}

impl FilterMatrix {
    pub fn new(a: DMatrix<Complex64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch("filter matrix must be square".into()));
        }
        let top = a.clone().singular_values().max();
        if top > 1.0 + 1e-12 {
            return Err(Error::InvalidConfig(format!("filter has singular value {top} > 1")));
        }
        Ok(Self { a })
    }

    pub fn identity(levels: usize) -> Self {
        Self { a: DMatrix::identity(levels, levels) }
    }

    /// Projector onto `span{|0⟩ … |n⟩}`.
    pub fn projector(levels: usize, n: usize) -> Self {
        Self { a: DMatrix::from_fn(levels, levels, |i, j| if i == j && i <= n { ONE } else { ZERO }) }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.a
    }

    pub fn levels(&self) -> usize {
        self.a.nrows()
    }
}

/// Two-mode density matrix in the truncated Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FockDensity {
    cutoff: usize,
    rho: DMatrix<Complex64>,
}

impl FockDensity {
    /// Checks shape, Hermiticity to [`tol::HERMITIAN`] and trace ≤ 1 + 1e-12.
    pub fn new(cutoff: usize, rho: DMatrix<Complex64>) -> Result<Self> {
        let d = (cutoff + 1) * (cutoff + 1);
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{}×{} matrix for cutoff {cutoff}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let out = Self { cutoff, rho };
        let herm = out.hermiticity_defect();
        if herm > tol::HERMITIAN {
            return Err(Error::InvalidConfig(format!("density is not Hermitian ({herm:e})")));
        }
        let tr = out.trace();
        if tr > 1.0 + 1e-12 {
            return Err(Error::InvalidConfig(format!("density trace {tr} exceeds 1")));
        }
        Ok(out)
    }

    pub(crate) fn from_matrix(cutoff: usize, rho: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(rho.nrows(), (cutoff + 1) * (cutoff + 1));
        Self { cutoff, rho }
    }

    pub fn zeros(cutoff: usize) -> Self {
        let d = (cutoff + 1) * (cutoff + 1);
        Self { cutoff, rho: DMatrix::from_element(d, d, ZERO) }
    }

    /// `F |Φ₊^N⟩⟨Φ₊^N| + (1 - F)(1 - |Φ₊^N⟩⟨Φ₊^N|)/(N² - 1)` at cutoff `N - 1`.
    pub fn isotropic(dim: usize, fidelity: f64) -> Self {
        let d = dim * dim;
        let off = (1.0 - fidelity) / (d as f64 - 1.0);
        let mut rho = DMatrix::from_fn(d, d, |i, j| if i == j { Complex64::new(off, 0.0) } else { ZERO });
        let w = (fidelity - off) / dim as f64;
        for k in 0..dim {
            for l in 0..dim {
                rho[(k * dim + k, l * dim + l)] += w;
            }
        }
        Self { cutoff: dim - 1, rho }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let d = dim * dim;
        Self { cutoff: dim - 1, rho: DMatrix::identity(d, d).map(|x: Complex64| x / d as f64) }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn levels(&self) -> usize {
        self.cutoff + 1
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.rho
    }

    /// `⟨n_a, n_b| ρ |m_a, m_b⟩`.
    pub fn entry(&self, n_a: usize, n_b: usize, m_a: usize, m_b: usize) -> Complex64 {
        let l = self.levels();
        self.rho[(n_a * l + n_b, m_a * l + m_b)]
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn purity(&self) -> f64 {
        // tr ρ² = Σ |ρ_ij|² for Hermitian ρ.
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.rho + self.rho.adjoint()).map(|z| z * 0.5);
        h.symmetric_eigenvalues().min()
    }

    /// `tr_B ρ` as a `levels × levels` matrix.
    pub fn partial_trace_b(&self) -> DMatrix<Complex64> {
        let l = self.levels();
        DMatrix::from_fn(l, l, |a, a2| (0..l).map(|b| self.rho[(a * l + b, a2 * l + b)]).sum())
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t.is_nan() || t <= 1e-300 {
            return Err(Error::ZeroProbability { probability: t });
        }
        Ok(Self { cutoff: self.cutoff, rho: self.rho.map(|z| z / t) })
    }

    /// Unnormalized projection onto photon numbers `≤ n` in both modes.
    pub fn crop(&self, n: usize) -> Self {
        let (l, k) = (self.levels(), n.min(self.cutoff) + 1);
        let idx = |i: usize| (i / k) * l + i % k;
        Self { cutoff: k - 1, rho: DMatrix::from_fn(k * k, k * k, |i, j| self.rho[(idx(i), idx(j))]) }
    }

    /// Embeds into a larger cutoff, padding with zeros.
    pub fn embed(&self, cutoff: usize) -> Self {
        if cutoff <= self.cutoff {
            return self.crop(cutoff);
        }
        let (l, k) = (self.levels(), cutoff + 1);
        let mut rho = DMatrix::from_element(k * k, k * k, ZERO);
        for i in 0..l * l {
            for j in 0..l * l {
                rho[((i / l) * k + i % l, (j / l) * k + j % l)] = self.rho[(i, j)];
            }
        }
        Self { cutoff, rho }
    }

    /// Largest entrywise modulus difference; cutoffs must match.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.cutoff, other.cutoff, "cutoff mismatch");
        self.rho.iter().zip(other.rho.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}
