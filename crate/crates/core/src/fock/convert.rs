//! Gaussian state → truncated Fock density.
//!
//! `M = S D Sᵀ` (Williamson) and `S = O₁ Z O₂` (Bloch–Messiah) give
//! `ρ = Û(O₁) Û(Z) Û(O₂) ρ_th Û(O₂)† Û(Z)† Û(O₁)†` with `ρ_th` a product of
//! thermal states. Each thermal number state is pushed through the three
//! layers as a column vector and `ρ = Σ_n p_n u_n u_n†`.
//!
//! Passive layers conserve the total photon number, so they act sector by
//! sector and a cropped output at cutoff `N_c` only needs squeezed components
//! with total number `≤ 2 N_c`. The only approximation is the truncation of
//! the thermal populations, whose discarded weight is reported.

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use num_complex::Complex64;

use super::{FockDensity, ZERO};
use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::symplectic::{bloch_messiah, passive_unitary, williamson};

#[derive(Clone, Debug, PartialEq)]
pub struct ConversionOptions {
    pub cutoff: usize,
    /// Largest thermal occupation kept per mode; default `2 N_c + 8`.
    pub internal_cutoff: Option<usize>,
    /// Thermal tail mass below which further levels are not generated.
    pub tail_tolerance: f64,
    /// Product populations below this are skipped.
    pub weight_floor: f64,
}

impl ConversionOptions {
    pub fn new(cutoff: usize) -> Self {
        Self { cutoff, internal_cutoff: None, tail_tolerance: 1e-17, weight_floor: 1e-18 }
    }

    pub fn internal(&self) -> usize {
        self.internal_cutoff.unwrap_or(2 * self.cutoff + 8)
    }
}

#[derive(Clone, Debug)]
pub struct FockConversion {
    pub density: FockDensity,
    /// Trace of the cropped density; `1 - trace` is the truncation loss.
    pub trace: f64,
    /// Thermal population mass not propagated.
    pub dropped_weight: f64,
    pub thermal_levels: [usize; 2],
}

pub fn gaussian_to_fock(state: &GaussianState, cutoff: usize) -> Result<FockDensity> {
    gaussian_to_fock_with(state, &ConversionOptions::new(cutoff)).map(|c| c.density)
}

pub fn gaussian_to_fock_with(state: &GaussianState, opts: &ConversionOptions) -> Result<FockConversion> {
    if state.displacement().iter().any(|&x| x != 0.0) {
        return Err(Error::NonZeroDisplacement);
    }
    if opts.cutoff < 1 {
        return Err(Error::InvalidConfig("Fock cutoff must be at least 1".into()));
    }
    let nc = opts.cutoff;
    let levels = nc + 1;
    let top = 2 * nc;

    let w = williamson(state.cm().matrix())?;
    let bm = bloch_messiah(&w.symplectic)?;

    let pops = w.nu.map(|nu| thermal_populations(0.5 * (nu - 1.0), opts.internal(), opts.tail_tolerance));
    let thermal_levels = [pops[0].len() - 1, pops[1].len() - 1];
    let t_max = thermal_levels[0] + thermal_levels[1];

    let sq = bm.lambda.map(|l| squeeze_matrix(-l.ln(), top + 1, t_max + 1));
    let inner = passive_generator(&passive_unitary(&bm.inner));
    let outer = passive_generator(&passive_unitary(&bm.outer));
    let outer_sectors: Vec<DMatrix<Complex64>> = (0..=top).map(|t| sector_unitary(&outer, t)).collect();

    let mut columns: Vec<Vec<Complex64>> = Vec::new();
    let mut kept = 0.0;

    for t in 0..=t_max {
        let lo = t.saturating_sub(thermal_levels[1]);
        let hi = t.min(thermal_levels[0]);
        let chosen: Vec<(usize, f64)> =
            (lo..=hi).map(|n1| (n1, pops[0][n1] * pops[1][t - n1])).filter(|&(_, p)| p >= opts.weight_floor).collect();
        if chosen.is_empty() {
            continue;
        }
        kept += chosen.iter().map(|&(_, p)| p).sum::<f64>();

        // Inner passive layer: columns n1 of the sector-t unitary.
        let cols = sector_columns(&inner, t, &chosen.iter().map(|&(n, _)| n).collect::<Vec<_>>());
        let (mut w_re, mut w_im) = (DMatrix::zeros(t + 1, chosen.len()), DMatrix::zeros(t + 1, chosen.len()));
        for (j, &(_, p)) in chosen.iter().enumerate() {
            let s = p.sqrt();
            for k in 0..=t {
                w_re[(k, j)] = cols[(k, j)].re * s;
                w_im[(k, j)] = cols[(k, j)].im * s;
            }
        }

        // Squeezers map sector t into sectors of equal parity only.
        let out_sectors: Vec<usize> = (0..=top).filter(|u| (u + t) % 2 == 0).collect();
        let rows: usize = out_sectors.iter().map(|u| u + 1).sum();
        let mut kmat = DMatrix::<f64>::zeros(rows, t + 1);
        let mut r = 0;
        for &u in &out_sectors {
            for m1 in 0..=u {
                let m2 = u - m1;
                for k in 0..=t {
                    kmat[(r, k)] = sq[0][(m1, k)] * sq[1][(m2, t - k)];
                }
                r += 1;
            }
        }
        let y_re = &kmat * &w_re;
        let y_im = &kmat * &w_im;

        let mut f = vec![vec![ZERO; levels * levels]; chosen.len()];
        let mut r = 0;
        for &u in &out_sectors {
            let slice =
                DMatrix::from_fn(u + 1, chosen.len(), |i, j| Complex64::new(y_re[(r + i, j)], y_im[(r + i, j)]));
            let z = &outer_sectors[u] * slice;
            for j1 in u.saturating_sub(nc)..=u.min(nc) {
                let j2 = u - j1;
                for (c, col) in f.iter_mut().enumerate() {
                    col[j1 * levels + j2] = z[(j1, c)];
                }
            }
            r += u + 1;
        }
        columns.extend(f);
    }

    let density = FockDensity::from_matrix(nc, gram(&columns, levels * levels));
    let trace = density.trace();
    if trace < 0.5 {
        return Err(Error::CutoffTooSmall { trace });
    }
    Ok(FockConversion { density, trace, dropped_weight: (1.0 - kept).max(0.0), thermal_levels })
}

/// `p_n = n̄ⁿ/(n̄+1)^{n+1}` up to the level where the tail mass drops below
/// `tail`, at most `max_level`.
fn thermal_populations(nbar: f64, max_level: usize, tail: f64) -> Vec<f64> {
    if nbar <= 1e-15 {
        return vec![1.0];
    }
    let q = nbar / (nbar + 1.0);
    let mut p = Vec::new();
    let mut pn = 1.0 / (nbar + 1.0);
    let mut rest = q;
    for _ in 0..=max_level {
        p.push(pn);
        if rest <= tail {
            break;
        }
        pn *= q;
        rest *= q;
    }
    p
}

/// `⟨m| S(r) |n⟩` for `S(r) = exp(r/2 (a² - a†²))`, `m < rows`, `n < cols`.
///
/// Uses the recurrence that runs down the rows below the diagonal and along
/// the columns above it; both directions are forward stable there.
pub(crate) fn squeeze_matrix(r: f64, rows: usize, cols: usize) -> DMatrix<f64> {
    let sech = 1.0 / r.cosh();
    let th = r.tanh();
    let mut s = DMatrix::<f64>::zeros(rows, cols);
    if rows == 0 || cols == 0 {
        return s;
    }
    for m in 0..rows {
        for n in 0..cols {
            if m == 0 && n == 0 {
                s[(0, 0)] = sech.sqrt();
                continue;
            }
            if (m + n) % 2 == 1 {
                continue;
            }
            let diag = if m > 0 && n > 0 { s[(m - 1, n - 1)] } else { 0.0 };
            s[(m, n)] = if m >= n {
                let up = if m >= 2 { s[(m - 2, n)] } else { 0.0 };
                let (mf, nf) = (m as f64, n as f64);
                sech * (nf / mf).sqrt() * diag - th * ((mf - 1.0) / mf).sqrt() * up
            } else {
                let left = if n >= 2 { s[(m, n - 2)] } else { 0.0 };
                let (mf, nf) = (m as f64, n as f64);
                sech * (mf / nf).sqrt() * diag + th * ((nf - 1.0) / nf).sqrt() * left
            };
        }
    }
    s
}

/// Hermitian `H` with `U = e^{iH}` for a 2×2 unitary `U`.
pub(crate) fn passive_generator(u: &Matrix2<Complex64>) -> Matrix2<Complex64> {
    let mut phase = 0.5 * u.determinant().arg();
    let mut w = u.map(|z| z * Complex64::from_polar(1.0, -phase));
    // Keep the SU(2) part in the half with cos θ ≥ 0.
    if (w[(0, 0)] + w[(1, 1)]).re < 0.0 {
        w = -w;
        phase += std::f64::consts::PI;
    }
    let cos = (0.5 * (w[(0, 0)] + w[(1, 1)]).re).clamp(-1.0, 1.0);
    let x = (w - w.adjoint()).map(|z| z / Complex64::new(0.0, 2.0));
    let sin = (1.0 - cos * cos).sqrt();
    let theta = sin.atan2(cos);
    let scale = if sin > 1e-12 { theta / sin } else { 1.0 + theta * theta / 6.0 };
    let mut h = x.map(|z| z * scale);
    h[(0, 0)] += phase;
    h[(1, 1)] += phase;
    h
}

/// Photon-number-sector representation of `exp(i Σ_jk H_jk a_j† a_k)` on
/// `{|m, t - m⟩}`, as the tridiagonal generator rephased to be real.
struct SectorGenerator {
    phase: f64,
    eig: SymmetricEigen<f64, nalgebra::Dyn>,
}

fn sector_generator(h: &Matrix2<Complex64>, t: usize) -> SectorGenerator {
    // a†b raises m; its coefficient's phase is removed by diag(e^{iφm}).
    let off = h[(0, 1)];
    let mut g = DMatrix::<f64>::zeros(t + 1, t + 1);
    for m in 0..=t {
        g[(m, m)] = h[(0, 0)].re * m as f64 + h[(1, 1)].re * (t - m) as f64;
        if m < t {
            let c = ((m + 1) as f64).sqrt() * ((t - m) as f64).sqrt() * off.norm();
            g[(m + 1, m)] = c;
            g[(m, m + 1)] = c;
        }
    }
    SectorGenerator { phase: off.arg(), eig: SymmetricEigen::new(g) }
}

impl SectorGenerator {
    /// Columns `which` of the sector unitary.
    fn columns(&self, which: &[usize]) -> DMatrix<Complex64> {
        let q = &self.eig.eigenvectors;
        let d = q.nrows();
        let e: Vec<Complex64> = self.eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, l)).collect();
        DMatrix::from_fn(d, which.len(), |row, j| {
            let col = which[j];
            let mut acc = ZERO;
            for k in 0..d {
                acc += e[k] * (q[(row, k)] * q[(col, k)]);
            }
            acc * Complex64::from_polar(1.0, self.phase * (row as f64 - col as f64))
        })
    }
}

pub(crate) fn sector_unitary(h: &Matrix2<Complex64>, t: usize) -> DMatrix<Complex64> {
    let all: Vec<usize> = (0..=t).collect();
    sector_columns(h, t, &all)
}

fn sector_columns(h: &Matrix2<Complex64>, t: usize, which: &[usize]) -> DMatrix<Complex64> {
    if h[(1, 0)].norm() < 1e-15 {
        // Phase shifts only.
        return DMatrix::from_fn(t + 1, which.len(), |row, j| {
            if row == which[j] {
                Complex64::from_polar(1.0, h[(0, 0)].re * row as f64 + h[(1, 1)].re * (t - row) as f64)
            } else {
                ZERO
            }
        });
    }
    sector_generator(h, t).columns(which)
}

/// `Σ_c f_c f_c†` through one real product of the stacked real and imaginary parts.
fn gram(columns: &[Vec<Complex64>], d: usize) -> DMatrix<Complex64> {
    let n = columns.len();
    let g = DMatrix::<f64>::from_fn(2 * d, n, |i, j| {
        let z = columns[j][i % d];
        if i < d {
            z.re
        } else {
            z.im
        }
    });
    let p = &g * g.transpose();
    DMatrix::from_fn(d, d, |i, j| Complex64::new(p[(i, j)] + p[(d + i, d + j)], p[(d + i, j)] - p[(i, d + j)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockVector;
    use crate::gaussian::CorrelationMatrix;
    use approx::assert_abs_diff_eq;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn squeezed_vacuum_column() {
        let r = 0.7_f64;
        let s = squeeze_matrix(r, 12, 3);
        for n in 0..6 {
            let exact = (-r.tanh()).powi(n as i32) * (factorial(2 * n)).sqrt()
                / (2f64.powi(n as i32) * factorial(n))
                / r.cosh().sqrt();
            assert_abs_diff_eq!(s[(2 * n, 0)], exact, epsilon = 1e-14);
            assert_eq!(s[(2 * n + 1, 0)], 0.0);
        }
    }

    #[test]
    fn squeeze_matrix_is_orthogonal_in_the_interior() {
        let s = squeeze_matrix(-0.5, 150, 10);
        let g = s.transpose() * &s;
        assert_abs_diff_eq!(g, DMatrix::identity(10, 10), epsilon = 1e-12);
        // S(r)ᵀ = S(-r).
        let a = squeeze_matrix(0.6, 8, 8);
        let b = squeeze_matrix(-0.6, 8, 8);
        assert_abs_diff_eq!(a.transpose(), b, epsilon = 1e-15);
    }

    #[test]
    fn generator_exponentiates_back() {
        let c = 0.3_f64.cos();
        let s = 0.3_f64.sin();
        let u = Matrix2::new(
            Complex64::new(c, 0.0) * Complex64::from_polar(1.0, 0.4),
            Complex64::new(-s, 0.0) * Complex64::from_polar(1.0, -1.1),
            Complex64::new(s, 0.0) * Complex64::from_polar(1.0, 2.0),
            Complex64::new(c, 0.0) * Complex64::from_polar(1.0, 0.5),
        );
        for u in [u, -u, Matrix2::identity(), -Matrix2::<Complex64>::identity()] {
            let h = passive_generator(&u);
            assert_abs_diff_eq!((h - h.adjoint()).norm(), 0.0, epsilon = 1e-14);
            // Sector 1 is the single-particle representation itself.
            let one = sector_unitary(&h, 1);
            // Basis |m, 1 - m⟩: index 0 = photon in b, index 1 = photon in a.
            assert_abs_diff_eq!((one[(1, 1)] - u[(0, 0)]).norm(), 0.0, epsilon = 1e-13);
            assert_abs_diff_eq!((one[(0, 1)] - u[(1, 0)]).norm(), 0.0, epsilon = 1e-13);
            assert_abs_diff_eq!((one[(1, 0)] - u[(0, 1)]).norm(), 0.0, epsilon = 1e-13);
            assert_abs_diff_eq!((one[(0, 0)] - u[(1, 1)]).norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn sector_unitaries_are_unitary() {
        let u = crate::symplectic::passive_unitary(&crate::gaussian::LocalSymplectic::rotation(0.3, 1.0).matrix());
        let h = passive_generator(&u);
        for t in [0, 3, 40] {
            let m = sector_unitary(&h, t);
            assert_abs_diff_eq!((&m * m.adjoint() - DMatrix::identity(t + 1, t + 1)).norm(), 0.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn vacuum_maps_to_ground_state() {
        let st = GaussianState::centered(CorrelationMatrix::vacuum()).unwrap();
        let rho = gaussian_to_fock(&st, 3).unwrap();
        let mut expect = FockDensity::zeros(3);
        expect.rho[(0, 0)] = Complex64::new(1.0, 0.0);
        assert!(rho.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn tmss_matches_schmidt_form() {
        let st = GaussianState::centered(CorrelationMatrix::two_mode_squeezed(1.6)).unwrap();
        let rho = gaussian_to_fock(&st, 20).unwrap();
        let expect = FockVector::two_mode_squeezed(0.8, 20).density();
        assert!(rho.max_abs_diff(&expect) < 1e-10, "{}", rho.max_abs_diff(&expect));
    }

    #[test]
    fn thermal_populations_are_geometric() {
        let st = GaussianState::centered(CorrelationMatrix::thermal(3.0, 1.0)).unwrap();
        let conv = gaussian_to_fock_with(&st, &ConversionOptions::new(6)).unwrap();
        let rho = conv.density;
        for n in 0..=6 {
            let p = 0.5_f64.powi(n as i32 + 1);
            assert_abs_diff_eq!(rho.entry(n, 0, n, 0).re, p, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(rho.trace(), 1.0 - 0.5_f64.powi(7), epsilon = 1e-12);
    }

    #[test]
    fn displaced_state_rejected() {
        let st = GaussianState::new(CorrelationMatrix::vacuum(), nalgebra::Vector4::new(0.1, 0.0, 0.0, 0.0)).unwrap();
        assert!(matches!(gaussian_to_fock(&st, 2), Err(Error::NonZeroDisplacement)));
    }

    #[test]
    fn hot_state_at_tiny_cutoff_is_too_small() {
        let st = GaussianState::centered(CorrelationMatrix::thermal(15.0, 15.0)).unwrap();
        assert!(matches!(gaussian_to_fock(&st, 1), Err(Error::CutoffTooSmall { .. })));
    }
}
