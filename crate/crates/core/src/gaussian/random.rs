use std::f64::consts::TAU;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{is_physical, rotation, squeezer, CorrelationMatrix, LocalSymplectic, StandardFormParams};
use crate::error::{Error, Result};
use crate::tol;

/// Closed intervals from which the standard-form parameters are drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub n_a: (f64, f64),
    pub n_b: (f64, f64),
    pub k_x: (f64, f64),
    pub k_p: (f64, f64),
}

impl Default for ParamBox {
    fn default() -> Self {
        Self { n_a: (1.0, 4.0), n_b: (1.0, 4.0), k_x: (0.0, 4.0), k_p: (-4.0, 4.0) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomStateSpec {
    /// Draw `n_b = n_a`.
    pub symmetric: bool,
    /// Require (`Some(true)`) or forbid (`Some(false)`) inseparability,
    /// outside the dead band.
    pub inseparable: Option<bool>,
    pub bounds: ParamBox,
    /// Largest `|z|` of the random local squeezers applied after sampling;
    /// `None` returns the standard form itself. At most 2.
    pub scramble: Option<f64>,
    pub max_attempts: usize,
}

impl Default for RandomStateSpec {
    fn default() -> Self {
        Self { symmetric: false, inseparable: None, bounds: ParamBox::default(), scramble: None, max_attempts: 100_000 }
    }
}

/// Largest squeeze accepted by [`RandomStateSpec::scramble`].
pub const MAX_SCRAMBLE: f64 = 2.0;

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(RangeInclusive::new(lo, hi))
    } else {
        lo
    }
}

fn accept(p: &StandardFormParams, spec: &RandomStateSpec) -> bool {
    if p.k_x < p.k_p.abs() {
        return false;
    }
    let (det_margin, cross_margin) = p.physicality_margins();
    if det_margin < 0.0 || cross_margin < 0.0 || p.n_a < 1.0 || p.n_b < 1.0 {
        return false;
    }
    match spec.inseparable {
        Some(true) => p.inseparability_margin() > tol::DEAD_BAND,
        Some(false) => p.inseparability_margin() < -tol::DEAD_BAND,
        None => true,
    }
}

fn draw(rng: &mut ChaCha8Rng, spec: &RandomStateSpec) -> Result<CorrelationMatrix> {
    for _ in 0..spec.max_attempts {
        let n_a = uniform(rng, spec.bounds.n_a);
        let n_b = if spec.symmetric { n_a } else { uniform(rng, spec.bounds.n_b) };
        let k_x = uniform(rng, spec.bounds.k_x);
        let k_p = uniform(rng, spec.bounds.k_p);
        let p = StandardFormParams { n_a, n_b, k_x, k_p };
        if !accept(&p, spec) {
            continue;
        }
        let m = CorrelationMatrix::standard_form(&p);
        // Guards the parameter inequalities against round-off at the boundary.
        if !matches!(is_physical(&m), Ok(ph) if ph.physical) {
            continue;
        }
        let Some(z_max) = spec.scramble else { return Ok(m) };
        let mut local = || {
            let z = uniform(rng, (-z_max, z_max));
            rotation(rng.random_range(0.0..TAU)) * squeezer(z) * rotation(rng.random_range(0.0..TAU))
        };
        let s = LocalSymplectic { s_a: local(), s_b: local() };
        return Ok(s.apply(&m));
    }
    Err(Error::ExhaustedRetries { attempts: spec.max_attempts })
}

fn check_spec(spec: &RandomStateSpec) -> Result<()> {
    if let Some(z) = spec.scramble {
        if !(0.0..=MAX_SCRAMBLE).contains(&z) {
            return Err(Error::InvalidConfig(format!("scramble squeeze {z} outside [0, {MAX_SCRAMBLE}]")));
        }
    }
    Ok(())
}

/// Rejection-samples a physical correlation matrix; deterministic in `seed`.
pub fn random_physical_state(seed: u64, spec: &RandomStateSpec) -> Result<CorrelationMatrix> {
    check_spec(spec)?;
    draw(&mut ChaCha8Rng::seed_from_u64(seed), spec)
}

/// `count` draws from one seeded stream.
pub fn random_physical_states(seed: u64, spec: &RandomStateSpec, count: usize) -> Result<Vec<CorrelationMatrix>> {
    check_spec(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| draw(&mut rng, spec)).collect()
}
