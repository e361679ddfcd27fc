use super::{FockDensity, FockVector};
use crate::error::{Error, Result};

/// `⟨ψ|(tr_B ρ ⊗ 1)|ψ⟩ - ⟨ψ|ρ|ψ⟩`; a negative value certifies distillability.
pub fn reduction_functional_fock(rho: &FockDensity, psi: &FockVector) -> Result<f64> {
    if rho.cutoff() != psi.cutoff() {
        return Err(Error::DimensionMismatch(format!(
            "density cutoff {} vs vector cutoff {}",
            rho.cutoff(),
            psi.cutoff()
        )));
    }
    let l = rho.levels();
    let v = psi.amplitudes();
    let local = rho.partial_trace_b();
    let mut reduced = 0.0;
    for b in 0..l {
        for a in 0..l {
            let va = v[a * l + b].conj();
            if va.norm_sqr() == 0.0 {
                continue;
            }
            for a2 in 0..l {
                reduced += (va * local[(a, a2)] * v[a2 * l + b]).re;
            }
        }
    }
    let full = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
    Ok(reduced - full)
}

/// `P ρ P` with `P` the projector onto photon numbers `≤ n` in both modes.
pub fn project_unnormalized(rho: &FockDensity, n: usize) -> Result<FockDensity> {
    if n > rho.cutoff() {
        return Err(Error::DimensionMismatch(format!("projection level {n} above cutoff {}", rho.cutoff())));
    }
    Ok(rho.crop(n))
}

/// Normalized projection and the probability that it succeeds.
pub fn truncate_project(rho: &FockDensity, n: usize) -> Result<(FockDensity, f64)> {
    let p = project_unnormalized(rho, n)?;
    let kept = p.trace();
    Ok((p.normalized()?, kept))
}
