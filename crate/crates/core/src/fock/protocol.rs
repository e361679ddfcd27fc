//! Steps of the recurrence protocol on `N × N` blocks: filtering, fidelity
//! with `|Φ₊^N⟩`, isotropic twirling, bilocal XOR with postselection, and the
//! total-photon-number variant.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{FilterMatrix, FockDensity, ZERO};
use crate::error::{Error, Result};

/// Largest two-pair Hilbert dimension `N⁴` handled by [`distill_round`].
pub const MEMORY_GUARD: usize = 4096;

fn require_block(rho: &FockDensity, n: usize) -> Result<()> {
    if rho.levels() != n {
        return Err(Error::DimensionMismatch(format!("expected a {n}×{n} block, got cutoff {}", rho.cutoff())));
    }
    Ok(())
}

/// `(A† ⊗ 1) ρ (A ⊗ 1)`, normalized, and its probability `tr(ρ A A† ⊗ 1)`.
pub fn filter_operation(rho: &FockDensity, filter: &FilterMatrix) -> Result<(FockDensity, f64)> {
    let l = rho.levels();
    if filter.levels() != l {
        return Err(Error::DimensionMismatch(format!("filter on {} levels, state on {l}", filter.levels())));
    }
    let a = filter.matrix();
    let d = l * l;
    let op = DMatrix::from_fn(d, d, |i, j| if i % l == j % l { a[(j / l, i / l)].conj() } else { ZERO });
    let out = &op * rho.matrix() * op.adjoint();
    let probability: f64 = out.diagonal().iter().map(|z| z.re).sum();
    if probability <= 1e-12 {
        return Err(Error::ZeroProbability { probability });
    }
    Ok((FockDensity::from_matrix(rho.cutoff(), out.map(|z| z / probability)), probability))
}

/// `⟨Φ₊^N| ρ |Φ₊^N⟩`.
pub fn fidelity_phi_plus(rho: &FockDensity, n: usize) -> Result<f64> {
    if n == 0 || n > rho.levels() {
        return Err(Error::DimensionMismatch(format!("dimension {n} exceeds cutoff {}", rho.cutoff())));
    }
    let l = rho.levels();
    let mut f = 0.0;
    for k in 0..n {
        for j in 0..n {
            f += rho.matrix()[(k * l + k, j * l + j)].re;
        }
    }
    Ok(f / n as f64)
}

/// Exact `U ⊗ U*` twirl: `F P₊ + (tr ρ - F)(1 - P₊)/(N² - 1)`.
pub fn twirl_isotropic(rho: &FockDensity, n: usize) -> Result<FockDensity> {
    require_block(rho, n)?;
    let f = fidelity_phi_plus(rho, n)?;
    let tr = rho.trace();
    let iso = FockDensity::isotropic(n, f / tr);
    Ok(FockDensity::from_matrix(n - 1, iso.into_matrix().map(|z| z * tr)))
}

/// `|k⟩|l⟩ ↦ |k⟩|(l + k) mod N⟩` on the flat index `k N + l`.
pub fn xor_gate(n: usize) -> DMatrix<f64> {
    let d = n * n;
    let mut u = DMatrix::zeros(d, d);
    for k in 0..n {
        for l in 0..n {
            u[(k * n + (l + k) % n, k * n + l)] = 1.0;
        }
    }
    u
}

/// Unnormalized kept-pair state for target outcome `m` on both sides.
///
/// With XOR from pair 1 (control) to pair 2 (target) on both sides, target
/// outcome `m` forces `a₂ = m - a₁` and `b₂ = m - b₁` (mod `N`).
fn branch_matrix(rho: &DMatrix<Complex64>, n: usize, m: usize) -> DMatrix<Complex64> {
    let d = n * n;
    let partner = |i: usize| ((m + n - i / n % n) % n) * n + (m + n - i % n) % n;
    DMatrix::from_fn(d, d, |i, j| rho[(i, j)] * rho[(partner(i), partner(j))])
}

/// Normalized kept-pair state and probability for one equal-outcome branch.
pub fn distill_branch(rho: &FockDensity, n: usize, m: usize) -> Result<(FockDensity, f64)> {
    require_block(rho, n)?;
    let b = FockDensity::from_matrix(n - 1, branch_matrix(rho.matrix(), n, m));
    let p = b.trace();
    Ok((b.normalized()?, p))
}

/// One recurrence round: two copies, bilocal XOR, keep the first pair when
/// both target measurements agree. Branches are mixed with their weights.
pub fn distill_round(rho: &FockDensity, n: usize) -> Result<(FockDensity, f64)> {
    distill_round_with_guard(rho, n, MEMORY_GUARD)
}

pub fn distill_round_with_guard(rho: &FockDensity, n: usize, cap: usize) -> Result<(FockDensity, f64)> {
    require_block(rho, n)?;
    let dimension = n.pow(4);
    if dimension > cap {
        return Err(Error::MemoryGuard { dimension, cap });
    }
    let d = n * n;
    let mut acc = DMatrix::from_element(d, d, ZERO);
    for m in 0..n {
        acc += branch_matrix(rho.matrix(), n, m);
    }
    let probability: f64 = acc.diagonal().iter().map(|z| z.re).sum();
    if probability <= 1e-300 {
        return Err(Error::ZeroProbability { probability });
    }
    Ok((FockDensity::from_matrix(n - 1, acc.map(|z| z / probability)), probability))
}

/// Conditional result of measuring total photon number `N` on both sides.
#[derive(Clone, Debug)]
pub struct DuanOutcome {
    pub total: usize,
    pub probability: f64,
    /// Kept pair on `N + 1` levels after `|n, N - n⟩ ↦ |n⟩` on each side.
    pub state: Option<FockDensity>,
}

#[derive(Clone, Debug)]
pub struct DuanRound {
    pub outcomes: Vec<DuanOutcome>,
    /// Probability that the two sides see different totals.
    pub unequal_probability: f64,
}

/// Two copies of `ρ`; on each side the total photon number of the two local
/// modes is measured and the pair is kept when both sides agree.
///
/// For outcome `N` the local states `|n, N - n⟩` are relabeled to `|n⟩`,
/// which is `XOR_{N+1}` restricted to that span (`N - n` never wraps
/// modulo `N + 1`). The result coincides with projecting both pairs onto
/// `H_{N+1}`, applying the bilocal `XOR_{N+1}` and keeping target outcome `N`.
pub fn duan_round(rho: &FockDensity) -> Result<DuanRound> {
    let l = rho.levels();
    let dimension = l.pow(4);
    if dimension > MEMORY_GUARD {
        return Err(Error::MemoryGuard { dimension, cap: MEMORY_GUARD });
    }
    let c = rho.cutoff();
    let tr = rho.trace();
    let mut outcomes = Vec::new();
    let mut total_p = 0.0;
    for big_n in 0..=2 * c {
        let k = big_n + 1;
        let get = |a: usize, b: usize, a2: usize, b2: usize| {
            if a > c || b > c || a2 > c || b2 > c {
                ZERO
            } else {
                rho.entry(a, b, a2, b2)
            }
        };
        let kept = DMatrix::from_fn(k * k, k * k, |i, j| {
            let (a, b, a2, b2) = (i / k, i % k, j / k, j % k);
            get(a, b, a2, b2) * get(big_n - a, big_n - b, big_n - a2, big_n - b2)
        });
        let probability: f64 = kept.diagonal().iter().map(|z| z.re).sum();
        total_p += probability;
        let state = (probability > 1e-300).then(|| FockDensity::from_matrix(big_n, kept.map(|z| z / probability)));
        outcomes.push(DuanOutcome { total: big_n, probability, state });
    }
    Ok(DuanRound { outcomes, unequal_probability: (tr * tr - total_p).max(0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{truncate_project, FiniteMaxEntangled, FockVector};
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_filter_is_trivial() {
        let rho = FockVector::two_mode_squeezed(0.5, 4).density().normalized().unwrap();
        let (out, p) = filter_operation(&rho, &FilterMatrix::identity(5)).unwrap();
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-14);
        assert!(out.max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn projector_filter_probability() {
        let r = 0.8_f64;
        let rho = FockVector::two_mode_squeezed(r, 20).density();
        let (out, p) = filter_operation(&rho, &FilterMatrix::projector(21, 1)).unwrap();
        assert_abs_diff_eq!(p, (1.0 + r.tanh().powi(2)) / r.cosh().powi(2), epsilon = 1e-14);
        assert_abs_diff_eq!(out.trace(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(out.entry(1, 1, 1, 1).re, r.tanh().powi(2) / (1.0 + r.tanh().powi(2)), epsilon = 1e-14);
    }

    #[test]
    fn zero_probability_filter() {
        let rho = FockVector::two_mode_squeezed(0.0, 2).density();
        let a =
            FilterMatrix::new(DMatrix::from_fn(3, 3, |i, j| if i == 2 && j == 2 { super::super::ONE } else { ZERO }))
                .unwrap();
        assert!(matches!(filter_operation(&rho, &a), Err(Error::ZeroProbability { .. })));
    }

    #[test]
    fn fidelity_examples() {
        assert_abs_diff_eq!(fidelity_phi_plus(&FiniteMaxEntangled::new(3).density(), 3).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            fidelity_phi_plus(&FockDensity::maximally_mixed(3), 3).unwrap(),
            1.0 / 9.0,
            epsilon = 1e-15
        );
        let r = 0.8_f64;
        let rho = FockVector::two_mode_squeezed(r, 20).density();
        let expect = (1.0 + r.tanh()).powi(2) / (2.0 * r.cosh().powi(2));
        assert_abs_diff_eq!(fidelity_phi_plus(&rho, 2).unwrap(), expect, epsilon = 1e-15);
        assert!(matches!(fidelity_phi_plus(&rho, 22), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn twirl_preserves_fidelity() {
        let (rho, _) = truncate_project(&FockVector::two_mode_squeezed(0.8, 20).density(), 2).unwrap();
        let tw = twirl_isotropic(&rho, 3).unwrap();
        assert_abs_diff_eq!(fidelity_phi_plus(&tw, 3).unwrap(), fidelity_phi_plus(&rho, 3).unwrap(), epsilon = 1e-14);
        let iso = FockDensity::isotropic(3, 0.7);
        assert!(twirl_isotropic(&iso, 3).unwrap().max_abs_diff(&iso) < 1e-15);
        assert!(matches!(twirl_isotropic(&rho, 2), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn xor_examples() {
        let u = xor_gate(2);
        assert_eq!(u[(2, 3)], 1.0); // |1,1⟩ → |1,0⟩
        for n in 2..6 {
            let u = xor_gate(n);
            for l in 0..n {
                assert_eq!(u[(l, l)], 1.0);
            }
            for i in 0..n * n {
                assert_eq!(u.row(i).sum(), 1.0);
                assert_eq!(u.column(i).sum(), 1.0);
            }
        }
    }

    #[test]
    fn pure_max_entangled_is_fixed() {
        let phi = FiniteMaxEntangled::new(3).density();
        let (out, p) = distill_round(&phi, 3).unwrap();
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fidelity_phi_plus(&out, 3).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn isotropic_fidelity_improves() {
        let (out, p) = distill_round(&FockDensity::isotropic(2, 0.75), 2).unwrap();
        assert_abs_diff_eq!(fidelity_phi_plus(&out, 2).unwrap(), 0.788_461_538_461_538_4, epsilon = 1e-12);
        assert_abs_diff_eq!(p, 0.722_222_222_222_222_2, epsilon = 1e-12);
    }

    #[test]
    fn memory_guard() {
        let rho = FockDensity::maximally_mixed(9);
        assert!(matches!(distill_round(&rho, 9), Err(Error::MemoryGuard { dimension: 6561, cap: 4096 })));
    }

    #[test]
    fn duan_vacuum() {
        let vac = FockVector::two_mode_squeezed(0.0, 2).density();
        let out = duan_round(&vac).unwrap();
        assert_abs_diff_eq!(out.outcomes[0].probability, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.unequal_probability, 0.0, epsilon = 1e-15);
        assert!(out.outcomes[1..].iter().all(|o| o.probability == 0.0));
    }
}
