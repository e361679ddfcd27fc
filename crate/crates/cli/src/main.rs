//! Command-line front end for two-mode Gaussian distillability.
//!
//! Exit codes: 0 success (and separable for `analyze`), 1 error,
//! 2 inseparable (`analyze`), 3 input not distillable (`distill`).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gaussdistill::fock::{gaussian_to_fock_with, reduction_functional_fock, ConversionOptions};
use gaussdistill::gaussian::{is_physical, random_physical_states, ParamBox, RandomStateSpec};
use gaussdistill::io::{read_state, write_atomic, write_json, StateFile};
use gaussdistill::phase_space::symmetrize_pipeline;
use gaussdistill::pipeline::{
    check_distillable_with, run_protocol, sweep_grid, write_sweep_csv, GridSpec, ProtocolConfig, Verdict,
};
use gaussdistill::{tol, CorrelationMatrix, Error, FockVector, GaussianState};

#[derive(Parser)]
#[command(name = "gaussdistill", version, about = "Distillability of two-mode Gaussian states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Standard form, physicality and entanglement criteria of a state file.
    Analyze(AnalyzeArgs),
    /// Bring a state to symmetric standard form and record the transforms.
    Symmetrize(SymmetrizeArgs),
    /// Run the distillation protocol and write a report.
    Distill(DistillArgs),
    /// Evaluate the criteria (and optionally the protocol) on a parameter grid.
    Sweep(SweepArgs),
    /// Draw random physical states.
    Random(RandomArgs),
}

#[derive(Args)]
struct Numerics {
    /// Squeezing of the Gaussian test vector in the reduction criterion.
    #[arg(long, default_value_t = 3.0)]
    psi_squeeze: f64,
    /// Margins within this distance of zero are reported as boundary.
    #[arg(long, default_value_t = tol::DEAD_BAND)]
    dead_band: f64,
}

#[derive(Args)]
struct AnalyzeArgs {
    state: PathBuf,
    /// Also evaluate the reduction criterion on the Fock-space density.
    #[arg(long)]
    fock: bool,
    /// Fock cutoff used with `--fock`.
    #[arg(long, default_value_t = 30)]
    cutoff: usize,
    #[command(flatten)]
    numerics: Numerics,
}

#[derive(Args)]
struct SymmetrizeArgs {
    state: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Transform trace; defaults to the output path with `.trace.json`.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct ProtocolArgs {
    #[arg(long, default_value_t = 20)]
    cutoff: usize,
    /// Schmidt dimension of the target maximally entangled state.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 0.99)]
    target: f64,
    #[arg(long, default_value_t = 50)]
    rounds: usize,
    #[arg(long)]
    skip_twirl: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Internal cutoff of the Fock conversion [default: 2·cutoff + 8].
    #[arg(long)]
    internal_cutoff: Option<usize>,
    #[command(flatten)]
    numerics: Numerics,
}

impl ProtocolArgs {
    fn config(&self) -> ProtocolConfig {
        ProtocolConfig {
            cutoff: self.cutoff,
            dim: self.dim,
            psi_squeeze: self.numerics.psi_squeeze,
            rounds_max: self.rounds,
            target_fidelity: self.target,
            skip_twirl: self.skip_twirl,
            seed: self.seed,
            dead_band: self.numerics.dead_band,
            internal_cutoff: self.internal_cutoff,
        }
    }
}

#[derive(Args)]
struct DistillArgs {
    state: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    protocol: ProtocolArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// e.g. `n_a=1:3:5,n_b=n_a,k_x=0:2:5,k_p=-k_x` (`lo:hi:count`, constant, or another parameter).
    #[arg(long)]
    grid: String,
    #[arg(long)]
    out: PathBuf,
    /// Run the protocol at every distillable point.
    #[arg(long)]
    protocol: bool,
    /// Worker threads; 0 uses all cores.
    #[arg(long, env = "GAUSSDISTILL_JOBS", default_value_t = 0)]
    jobs: usize,
    #[command(flatten)]
    settings: ProtocolArgs,
}

#[derive(Args)]
struct RandomArgs {
    /// Comma-separated: `symmetric`, `inseparable` or `separable`, `scramble=Z`,
    /// and parameter ranges such as `n_a=1:3` or `k_p=-2:2`.
    #[arg(long, default_value = "")]
    spec: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; with `--count` above 1, `-N` is inserted before the extension.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    count: usize,
}

fn parse_random_spec(s: &str) -> Result<RandomStateSpec> {
    let mut spec = RandomStateSpec::default();
    for token in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match token {
            "symmetric" => spec.symmetric = true,
            "asymmetric" => spec.symmetric = false,
            "inseparable" => spec.inseparable = Some(true),
            "separable" => spec.inseparable = Some(false),
            _ => {
                let (key, value) = token.split_once('=').with_context(|| format!("unknown spec token `{token}`"))?;
                if key == "scramble" {
                    spec.scramble = Some(value.parse().with_context(|| format!("bad scramble `{value}`"))?);
                    continue;
                }
                let (lo, hi) = value.split_once(':').with_context(|| format!("range `{value}` must be lo:hi"))?;
                let range = (lo.parse::<f64>()?, hi.parse::<f64>()?);
                let ParamBox { n_a, n_b, k_x, k_p } = &mut spec.bounds;
                match key {
                    "n_a" => *n_a = range,
                    "n_b" => *n_b = range,
                    "k_x" => *k_x = range,
                    "k_p" => *k_p = range,
                    _ => bail!("unknown spec parameter `{key}`"),
                }
            }
        }
    }
    Ok(spec)
}

fn analyze(args: &AnalyzeArgs) -> Result<u8> {
    let state = read_state(&args.state).with_context(|| format!("reading {}", args.state.display()))?;
    let m = state.cm();
    let phys = is_physical(m)?;
    let a = check_distillable_with(m, args.numerics.psi_squeeze, args.numerics.dead_band)?;
    let entangled = a.verdict == Verdict::InseparableDistillable;
    let p = a.params;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}, physical", if entangled { "inseparable" } else { "separable" })?;
    writeln!(out, "standard form: n_a = {} n_b = {} k_x = {} k_p = {}", p.n_a, p.n_b, p.k_x, p.k_p)?;
    writeln!(out, "physicality margin: {:e}", phys.margin)?;
    writeln!(out, "verdict: {}", a.verdict)?;
    writeln!(out, "inseparability margin: {}", a.margins.inseparability)?;
    let s = a.symmetrized;
    writeln!(out, "symmetrized: n = {} k_x = {} k_p = {}", s.n_a, s.k_x, s.k_p)?;
    writeln!(out, "symmetric condition margin: {}", a.margins.symmetric_rc)?;
    writeln!(
        out,
        "reduction functional (Gaussian, r = {}): {:e}",
        args.numerics.psi_squeeze, a.margins.reduction_gaussian
    )?;
    if args.fock {
        let sym = GaussianState::centered(a.symmetrized_matrix.expect("symmetrized"))?;
        let conv = gaussian_to_fock_with(&sym, &ConversionOptions::new(args.cutoff))?;
        // The Fock amplitudes tanhⁿ(r/2)/cosh(r/2) give the Gaussian TMSS of squeezing r.
        let psi = FockVector::two_mode_squeezed(0.5 * args.numerics.psi_squeeze, args.cutoff);
        let f = reduction_functional_fock(&conv.density, &psi)?;
        writeln!(out, "reduction functional (Fock, cutoff {}): {f:e} (trace {})", args.cutoff, conv.trace)?;
    }
    Ok(if entangled { 2 } else { 0 })
}

fn symmetrize(args: &SymmetrizeArgs) -> Result<u8> {
    let state = read_state(&args.state).with_context(|| format!("reading {}", args.state.display()))?;
    let sym = symmetrize_pipeline(state.cm())?;
    write_json(&args.out, &StateFile::from_matrix(&sym.matrix, Some("symmetrized".into())))?;
    let trace = args.trace.clone().unwrap_or_else(|| args.out.with_extension("trace.json"));
    write_json(&trace, &sym.trace)?;
    println!(
        "n = {} k_x = {} k_p = {}; {} transforms",
        sym.params.n_a,
        sym.params.k_x,
        sym.params.k_p,
        sym.trace.len()
    );
    Ok(0)
}

fn distill(args: &DistillArgs) -> Result<u8> {
    let state = read_state(&args.state).with_context(|| format!("reading {}", args.state.display()))?;
    let report = match run_protocol(state.cm(), &args.protocol.config()) {
        Err(e @ Error::NotDistillableInput { .. }) => {
            eprintln!("{e}");
            return Ok(3);
        }
        r => r?,
    };
    write_json(&args.out, &report)?;
    let mut out = std::io::stdout().lock();
    for (i, f) in report.fidelities().iter().enumerate() {
        let y = if i == 0 { 1.0 } else { report.rounds[i - 1].cumulative_yield };
        writeln!(out, "round {i}: fidelity {f:.12} yield {y:.6e}")?;
    }
    let status = if report.reached_target { "reached" } else { "did not reach" };
    writeln!(out, "{status} target {} after {} rounds", report.config.target_fidelity, report.rounds.len())?;
    Ok(0)
}

fn sweep(args: &SweepArgs) -> Result<u8> {
    let grid: GridSpec = args.grid.parse()?;
    let cfg = args.settings.config();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build()?;
    let rows = pool.install(|| sweep_grid(&grid, &cfg, args.protocol))?;
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf)?;
    write_atomic(&args.out, &buf)?;
    let physical = rows.iter().filter(|r| r.physical).count();
    let entangled = rows.iter().filter(|r| r.verdict == Some(Verdict::InseparableDistillable)).count();
    println!("{} points, {physical} physical, {entangled} inseparable", rows.len());
    Ok(0)
}

fn numbered(path: &Path, i: usize) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{i}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{i}"),
    };
    path.with_file_name(name)
}

fn random(args: &RandomArgs) -> Result<u8> {
    let spec = parse_random_spec(&args.spec)?;
    let states: Vec<CorrelationMatrix> = random_physical_states(args.seed, &spec, args.count)?;
    for (i, m) in states.iter().enumerate() {
        let path = if args.count == 1 { args.out.clone() } else { numbered(&args.out, i) };
        let label = format!("random seed {} #{i}", args.seed);
        write_json(&path, &StateFile::from_matrix(m, Some(label)))?;
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Symmetrize(a) => symmetrize(a),
        Command::Distill(a) => distill(a),
        Command::Sweep(a) => sweep(a),
        Command::Random(a) => random(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_spec_tokens() {
        let s = parse_random_spec("symmetric,inseparable,scramble=0.5,k_p=-1:1").unwrap();
        assert!(s.symmetric);
        assert_eq!(s.inseparable, Some(true));
        assert_eq!(s.scramble, Some(0.5));
        assert_eq!(s.bounds.k_p, (-1.0, 1.0));
        assert!(parse_random_spec("wobbly").is_err());
        assert!(parse_random_spec("q=1:2").is_err());
    }

    #[test]
    fn numbered_paths() {
        assert_eq!(numbered(Path::new("out/s.json"), 3), PathBuf::from("out/s-3.json"));
        assert_eq!(numbered(Path::new("s"), 0), PathBuf::from("s-0"));
    }
}
