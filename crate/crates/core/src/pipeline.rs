//! End-to-end distillability verdicts, the iterated protocol, and grid sweeps.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    distill_round, fidelity_phi_plus, gaussian_to_fock_with, truncate_project, twirl_isotropic, ConversionOptions,
    FockDensity,
};
use crate::gaussian::{
    is_physical, reduction_functional_gaussian, standard_form_params, symmetric_rc_holds, CorrelationMatrix, Decision,
    GaussianState, StandardFormParams,
};
use crate::phase_space::{symmetrize_pipeline, TransformRecord};
use crate::tol;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub cutoff: usize,
    /// Schmidt dimension `N` of the target `|Φ₊^N⟩`.
    pub dim: usize,
    /// Squeezing of the Gaussian test vector `ψ` in the reduction criterion,
    /// in the correlation-matrix parameterization.
    pub psi_squeeze: f64,
    pub rounds_max: usize,
    pub target_fidelity: f64,
    pub skip_twirl: bool,
    /// Recorded for reproducibility; every step is deterministic.
    pub seed: u64,
    pub dead_band: f64,
    /// Internal Fock cutoff of the conversion; `None` uses `2·cutoff + 8`.
    #[serde(default)]
    pub internal_cutoff: Option<usize>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            cutoff: 20,
            dim: 2,
            psi_squeeze: 3.0,
            rounds_max: 50,
            target_fidelity: 0.99,
            skip_twirl: false,
            seed: 0,
            dead_band: tol::DEAD_BAND,
            internal_cutoff: None,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidConfig(format!("dimension {} must be at least 2", self.dim)));
        }
        if self.dim > self.cutoff + 1 {
            return Err(Error::InvalidConfig(format!(
                "dimension {} exceeds cutoff + 1 = {}",
                self.dim,
                self.cutoff + 1
            )));
        }
        if !(self.target_fidelity > 1.0 / self.dim as f64 && self.target_fidelity <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "target fidelity {} outside (1/{}, 1]",
                self.target_fidelity, self.dim
            )));
        }
        if self.internal_cutoff.is_some_and(|c| c < self.cutoff) {
            return Err(Error::InvalidConfig("internal cutoff below cutoff".into()));
        }
        if self.dead_band.is_nan() || self.dead_band < 0.0 {
            return Err(Error::InvalidConfig("dead band must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    InseparableDistillable,
    Separable,
    Boundary,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::InseparableDistillable => "inseparable-distillable",
            Verdict::Separable => "separable",
            Verdict::Boundary => "boundary",
        })
    }
}

/// Signed margins of the criteria; positive means the inequality holds,
/// except `reduction_gaussian`, which certifies distillability when negative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    /// Smallest eigenvalue of `-JMJ - M⁻¹`.
    pub physicality: f64,
    pub inseparability: f64,
    /// `(n + k_x)(n - k_p) - 1` on the symmetrized state.
    pub symmetric_rc: f64,
    /// Gaussian reduction functional of the symmetrized state against `ψ`.
    pub reduction_gaussian: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub verdict: Verdict,
    pub params: StandardFormParams,
    pub symmetrized: StandardFormParams,
    pub margins: Margins,
    pub trace: Vec<TransformRecord>,
    #[serde(skip)]
    pub symmetrized_matrix: Option<CorrelationMatrix>,
}

pub fn check_distillable(m: &CorrelationMatrix) -> Result<Assessment> {
    let cfg = ProtocolConfig::default();
    check_distillable_with(m, cfg.psi_squeeze, cfg.dead_band)
}

/// Verdict from the inseparability margin, plus the symmetrized state and
/// the reduction-criterion margins that certify distillability.
pub fn check_distillable_with(m: &CorrelationMatrix, psi_squeeze: f64, dead_band: f64) -> Result<Assessment> {
    let phys = is_physical(m)?;
    if !phys.physical {
        return Err(phys.into_error());
    }
    let params = standard_form_params(m)?;
    let insep = crate::gaussian::Criterion { margin: params.inseparability_margin() };
    let sym = symmetrize_pipeline(m)?;
    let symmetric_rc = symmetric_rc_holds(&sym.params)?.margin;
    let psi = CorrelationMatrix::two_mode_squeezed(psi_squeeze);
    let reduction_gaussian = reduction_functional_gaussian(&sym.matrix, &psi)?;
    let verdict = match insep.decide(dead_band) {
        Decision::Holds => Verdict::InseparableDistillable,
        Decision::Fails => Verdict::Separable,
        Decision::Boundary => Verdict::Boundary,
    };
    Ok(Assessment {
        verdict,
        params,
        symmetrized: sym.params,
        margins: Margins { physicality: phys.margin, inseparability: insep.margin, symmetric_rc, reduction_gaussian },
        trace: sym.trace,
        symmetrized_matrix: Some(sym.matrix),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub fidelity: f64,
    pub success_probability: f64,
    pub cumulative_yield: f64,
    /// Input pairs consumed per output pair, `2^round`.
    pub pairs_consumed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConversionSummary {
    pub cutoff: usize,
    pub trace: f64,
    pub dropped_weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub fidelity: f64,
    pub trace: f64,
    pub purity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistillationReport {
    pub verdict: Verdict,
    pub assessment: Option<Assessment>,
    pub config: ProtocolConfig,
    pub conversion: Option<ConversionSummary>,
    /// Probability of the bilocal projection onto the `N`-level block.
    pub projection_probability: f64,
    /// Smallest `N` for which the projected fidelity exceeds `1/N`.
    pub smallest_working_dim: Option<usize>,
    pub initial_fidelity: f64,
    pub rounds: Vec<RoundRecord>,
    pub final_fidelity: f64,
    pub reached_target: bool,
    pub final_state: StateSummary,
}

impl DistillationReport {
    pub fn fidelities(&self) -> Vec<f64> {
        std::iter::once(self.initial_fidelity).chain(self.rounds.iter().map(|r| r.fidelity)).collect()
    }

    pub fn cumulative_yield(&self) -> f64 {
        self.rounds.last().map_or(1.0, |r| r.cumulative_yield)
    }
}

/// Runs the protocol on a Gaussian state: symmetrize, convert to Fock
/// space, project onto the `N`-level block, twirl, and iterate the
/// recurrence round until the target fidelity or the round limit.
///
/// The filtering step is the identity for symmetric standard-form states.
pub fn run_protocol(m: &CorrelationMatrix, cfg: &ProtocolConfig) -> Result<DistillationReport> {
    cfg.validate()?;
    let assessment = check_distillable_with(m, cfg.psi_squeeze, cfg.dead_band)?;
    if assessment.verdict != Verdict::InseparableDistillable {
        return Err(Error::NotDistillableInput { margin: assessment.margins.inseparability });
    }
    let sym = assessment.symmetrized_matrix.expect("set by check_distillable_with");
    let state = GaussianState::centered(sym)?;
    let opts = ConversionOptions { internal_cutoff: cfg.internal_cutoff, ..ConversionOptions::new(cfg.cutoff) };
    let conv = gaussian_to_fock_with(&state, &opts)?;
    let conversion = ConversionSummary { cutoff: cfg.cutoff, trace: conv.trace, dropped_weight: conv.dropped_weight };
    let mut report = run_protocol_fock(&conv.density, cfg)?;
    report.assessment = Some(assessment);
    report.conversion = Some(conversion);
    Ok(report)
}

/// The Fock-space part of the protocol, starting from a density matrix.
pub fn run_protocol_fock(rho: &FockDensity, cfg: &ProtocolConfig) -> Result<DistillationReport> {
    cfg.validate()?;
    let n = cfg.dim;
    if n > rho.levels() {
        return Err(Error::DimensionMismatch(format!("dimension {n} exceeds state cutoff {}", rho.cutoff())));
    }
    let smallest_working_dim = (2..=rho.levels()).find(|&k| {
        truncate_project(rho, k - 1)
            .and_then(|(p, _)| fidelity_phi_plus(&p, k))
            .is_ok_and(|f| f > 1.0 / k as f64 + cfg.dead_band)
    });

    let (mut current, projection_probability) = truncate_project(rho, n - 1)?;
    let initial_fidelity = fidelity_phi_plus(&current, n)?;
    if initial_fidelity <= 1.0 / n as f64 + cfg.dead_band {
        return Err(Error::BelowThreshold { dim: n, fidelity: initial_fidelity, suggestion: smallest_working_dim });
    }
    if !cfg.skip_twirl {
        current = twirl_isotropic(&current, n)?;
    }

    let mut rounds = Vec::new();
    let mut fidelity = initial_fidelity;
    let mut cumulative_yield = 1.0;
    for round in 1..=cfg.rounds_max {
        if fidelity >= cfg.target_fidelity {
            break;
        }
        let (mut next, p) = distill_round(&current, n)?;
        if !cfg.skip_twirl {
            next = twirl_isotropic(&next, n)?;
        }
        let after = fidelity_phi_plus(&next, n)?;
        if !cfg.skip_twirl && after < fidelity - 1e-12 {
            return Err(Error::StalledFidelity { round, before: fidelity, after });
        }
        cumulative_yield *= p;
        rounds.push(RoundRecord {
            round,
            fidelity: after,
            success_probability: p,
            cumulative_yield,
            pairs_consumed: 1u64.checked_shl(round as u32).unwrap_or(u64::MAX),
        });
        fidelity = after;
        current = next;
    }

    Ok(DistillationReport {
        verdict: Verdict::InseparableDistillable,
        assessment: None,
        config: cfg.clone(),
        conversion: None,
        projection_probability,
        smallest_working_dim,
        initial_fidelity,
        rounds,
        final_fidelity: fidelity,
        reached_target: fidelity >= cfg.target_fidelity,
        final_state: StateSummary { fidelity, trace: current.trace(), purity: current.purity() },
    })
}

/// One axis of a sweep grid.
#[derive(Clone, Debug, PartialEq)]
pub enum Axis {
    /// `count` evenly spaced values from `lo` to `hi` inclusive.
    Range {
        lo: f64,
        hi: f64,
        count: usize,
    },
    Value(f64),
    /// Same value as another parameter, optionally negated.
    Follow {
        name: Param,
        negate: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Param {
    NA,
    NB,
    KX,
    KP,
}

impl Param {
    const ALL: [Param; 4] = [Param::NA, Param::NB, Param::KX, Param::KP];

    fn name(self) -> &'static str {
        match self {
            Param::NA => "n_a",
            Param::NB => "n_b",
            Param::KX => "k_x",
            Param::KP => "k_p",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Box over `(n_a, n_b, k_x, k_p)`, written as e.g.
/// `n_a=1:3:5,n_b=n_a,k_x=0:2:5,k_p=-k_x` (`lo:hi:count`, a constant, or
/// another parameter with optional sign).
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub axes: [Axis; 4],
}

impl GridSpec {
    /// Points in row-major order, `n_a` slowest.
    pub fn points(&self) -> Result<Vec<StandardFormParams>> {
        let values: Vec<Vec<f64>> = self
            .axes
            .iter()
            .map(|a| match *a {
                Axis::Range { lo, hi, count } => (0..count)
                    .map(|i| if count == 1 { lo } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 })
                    .collect(),
                Axis::Value(v) => vec![v],
                Axis::Follow { .. } => vec![f64::NAN],
            })
            .collect();
        for (i, a) in self.axes.iter().enumerate() {
            if let Axis::Follow { name, .. } = a {
                if matches!(self.axes[name.index()], Axis::Follow { .. }) || name.index() == i {
                    return Err(Error::InvalidConfig(format!(
                        "{} follows {}, which is not independent",
                        Param::ALL[i].name(),
                        name.name()
                    )));
                }
            }
        }
        let mut out = Vec::new();
        let mut idx = [0usize; 4];
        loop {
            let mut p = [0.0; 4];
            for i in 0..4 {
                p[i] = values[i][idx[i]];
            }
            for (i, a) in self.axes.iter().enumerate() {
                if let Axis::Follow { name, negate } = *a {
                    let v = p[name.index()];
                    p[i] = if negate { -v } else { v };
                }
            }
            out.push(StandardFormParams { n_a: p[0], n_b: p[1], k_x: p[2], k_p: p[3] });
            let mut k = 4;
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < values[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidConfig(format!("grid spec: {msg}"));
        let mut axes: [Option<Axis>; 4] = [None, None, None, None];
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, val) = part.split_once('=').ok_or_else(|| bad(format!("`{part}` is not key=value")))?;
            let param = Param::parse(key.trim()).ok_or_else(|| bad(format!("unknown parameter `{key}`")))?;
            let val = val.trim();
            let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad(format!("bad number `{t}`")));
            let axis = if let Some(name) = Param::parse(val.trim_start_matches('-')) {
                Axis::Follow { name, negate: val.starts_with('-') }
            } else if val.contains(':') {
                let f: Vec<&str> = val.split(':').collect();
                if f.len() != 3 {
                    return Err(bad(format!("range `{val}` must be lo:hi:count")));
                }
                let count = f[2].trim().parse::<usize>().map_err(|_| bad(format!("bad count `{}`", f[2])))?;
                if count == 0 {
                    return Err(bad("range count must be positive".into()));
                }
                Axis::Range { lo: num(f[0])?, hi: num(f[1])?, count }
            } else {
                Axis::Value(num(val)?)
            };
            if axes[param.index()].replace(axis).is_some() {
                return Err(bad(format!("`{}` given twice", param.name())));
            }
        }
        let mut out = Vec::with_capacity(4);
        for (i, a) in axes.into_iter().enumerate() {
            out.push(a.ok_or_else(|| bad(format!("missing `{}`", Param::ALL[i].name())))?);
        }
        let axes: [Axis; 4] = out.try_into().expect("four axes");
        Ok(Self { axes })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub params: StandardFormParams,
    pub physical: bool,
    pub inseparable_margin: Option<f64>,
    pub rc_margin: Option<f64>,
    pub verdict: Option<Verdict>,
    pub rounds: Option<usize>,
    pub final_fidelity: Option<f64>,
    pub yield_: Option<f64>,
    /// Why the protocol columns are empty, if they are.
    pub note: Option<String>,
}

fn sweep_point(p: &StandardFormParams, cfg: &ProtocolConfig, protocol: bool) -> SweepRow {
    let mut row = SweepRow {
        params: *p,
        physical: false,
        inseparable_margin: None,
        rc_margin: None,
        verdict: None,
        rounds: None,
        final_fidelity: None,
        yield_: None,
        note: None,
    };
    let (det_margin, cross_margin) = p.physicality_margins();
    if det_margin < 0.0 || cross_margin < 0.0 {
        row.note = Some("not physical".into());
        return row;
    }
    let m = CorrelationMatrix::standard_form(p);
    let assessment = match check_distillable_with(&m, cfg.psi_squeeze, cfg.dead_band) {
        Ok(a) => a,
        Err(e) => {
            row.note = Some(e.to_string());
            return row;
        }
    };
    row.physical = true;
    row.inseparable_margin = Some(assessment.margins.inseparability);
    row.rc_margin = Some(assessment.margins.symmetric_rc);
    row.verdict = Some(assessment.verdict);
    if protocol && assessment.verdict == Verdict::InseparableDistillable {
        match run_protocol(&m, cfg) {
            Ok(r) => {
                row.rounds = Some(r.rounds.len());
                row.final_fidelity = Some(r.final_fidelity);
                row.yield_ = Some(r.cumulative_yield());
            }
            Err(e) => row.note = Some(e.to_string()),
        }
    }
    row
}

/// Evaluates every grid point, in parallel on the current rayon pool; rows
/// come back in grid order.
pub fn sweep_grid(grid: &GridSpec, cfg: &ProtocolConfig, protocol: bool) -> Result<Vec<SweepRow>> {
    if protocol {
        cfg.validate()?;
    }
    let points = grid.points()?;
    Ok(points.par_iter().map(|p| sweep_point(p, cfg, protocol)).collect())
}

/// Decimal with 12 significant digits; scientific notation outside
/// `[1e-5, 1e12)`.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..12).contains(&e) {
        let decimals = (11 - e).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

pub const SWEEP_HEADER: [&str; 11] = [
    "n_a",
    "n_b",
    "k_x",
    "k_p",
    "physical",
    "inseparable_margin",
    "rc_margin",
    "verdict",
    "rounds",
    "final_fidelity",
    "yield",
];

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    let opt = |x: Option<f64>| x.map(format_sig12).unwrap_or_default();
    for r in rows {
        w.write_record([
            format_sig12(r.params.n_a),
            format_sig12(r.params.n_b),
            format_sig12(r.params.k_x),
            format_sig12(r.params.k_p),
            r.physical.to_string(),
            opt(r.inseparable_margin),
            opt(r.rc_margin),
            r.verdict.map_or_else(|| "skipped".to_string(), |v| v.to_string()),
            r.rounds.map(|n| n.to_string()).unwrap_or_default(),
            opt(r.final_fidelity),
            opt(r.yield_),
        ])?;
    }
    w.flush()?;
    Ok(())
}
