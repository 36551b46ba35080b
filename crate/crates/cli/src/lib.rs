//! `mixu`: generate, check and decompose doubly stochastic channels.
//!
//! Every subcommand is deterministic for a fixed `--seed`. JSON goes to
//! standard output unless `--out` names a file, in which case a one-line
//! summary is printed instead.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use mixed_unitary::channels::{depolarizing_choi, identity_channel_choi, validate, ChoiMatrix};
use mixed_unitary::corpus::{self, GeneratorMethod};
use mixed_unitary::decomposer::{self, DecompositionReport};
use mixed_unitary::designs::{self, UnitaryDesign};
use mixed_unitary::format::{self, ChannelData};
use mixed_unitary::moments::{self, MomentOrder};
use mixed_unitary::tolerance::{self, Tolerances};
use mixed_unitary::{Error, RandomSource};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_BOUND: i32 = 4;

/// Largest sample count accepted on the command line.
pub const MAX_SAMPLES: u64 = 1_000_000_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Lib(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
            CliError::Lib(e) => match e {
                Error::MixingOutOfRange { .. } => EXIT_BOUND,
                Error::NoConvergence { .. } | Error::ClosureOverflow { .. } | Error::Pruning(_) => EXIT_NO_CONVERGENCE,
                Error::NotDoublyStochastic { .. } | Error::OutsideBall { .. } | Error::DesignVerification { .. } => {
                    EXIT_NEGATIVE
                }
                _ => EXIT_USAGE,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Mixing parameter: a number or the keyword `max` for `1/(d²-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MixingParam {
    Max,
    Value(f64),
}

impl MixingParam {
    pub fn resolve(self, d: usize) -> f64 {
        match self {
            MixingParam::Max => decomposer::max_mixing(d),
            MixingParam::Value(p) => p,
        }
    }
}

pub fn parse_p(s: &str) -> std::result::Result<MixingParam, String> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("max") {
        return Ok(MixingParam::Max);
    }
    let p: f64 = s.parse().map_err(|_| format!("'{s}' is neither a number nor 'max'"))?;
    if !p.is_finite() || p < 0.0 {
        return Err(format!("p must be a finite number >= 0, got {s}"));
    }
    Ok(MixingParam::Value(p))
}

/// Positive sample count, written either as an integer or as `1e5`.
pub fn parse_count(s: &str) -> std::result::Result<usize, String> {
    let s = s.trim();
    let n = match s.parse::<u64>() {
        Ok(n) => n,
        Err(_) => {
            let x: f64 = s.parse().map_err(|_| format!("'{s}' is not a sample count"))?;
            if !x.is_finite() || x.fract() != 0.0 || x < 0.0 || x > MAX_SAMPLES as f64 {
                return Err(format!("'{s}' is not a whole number in 1..={MAX_SAMPLES}"));
            }
            x as u64
        }
    };
    if n == 0 || n > MAX_SAMPLES {
        return Err(format!("sample count must be in 1..={MAX_SAMPLES}, got {s}"));
    }
    Ok(n as usize)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleList(pub Vec<usize>);

/// Comma-separated sample counts, e.g. `1e2,1e3,1e4`.
pub fn parse_sample_list(s: &str) -> std::result::Result<Vec<usize>, String> {
    if s.trim().is_empty() {
        return Err("empty sample list".into());
    }
    s.split(',').map(parse_count).collect()
}

fn parse_tol(s: &str) -> std::result::Result<f64, String> {
    let t: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !t.is_finite() || t <= 0.0 {
        return Err(format!("tolerance must be positive and finite, got {s}"));
    }
    Ok(t)
}

#[derive(Debug, Parser)]
#[command(name = "mixu", version, about = "Mixed-unitary decompositions of doubly stochastic channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Residual tolerance for validity verdicts.
    #[arg(long, global = true, default_value_t = tolerance::VALIDITY, value_parser = parse_tol)]
    pub tol_validity: f64,
    /// Doubly-stochastic gate applied before decomposing.
    #[arg(long, global = true, default_value_t = tolerance::DS_GATE, value_parser = parse_tol)]
    pub tol_gate: f64,
    /// Moment error allowed when verifying a design.
    #[arg(long, global = true, default_value_t = tolerance::DESIGN, value_parser = parse_tol)]
    pub tol_design: f64,
    /// Negative eigenvalue allowed for PSD verdicts.
    #[arg(long, global = true, default_value_t = tolerance::PSD, value_parser = parse_tol)]
    pub tol_psd: f64,
    /// Choi drift allowed while pruning.
    #[arg(long, global = true, default_value_t = tolerance::PRUNE_DRIFT, value_parser = parse_tol)]
    pub tol_prune: f64,
}

impl Cli {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            validity: self.tol_validity,
            gate: self.tol_gate,
            design: self.tol_design,
            psd: self.tol_psd,
            prune: self.tol_prune,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a channel file.
    Gen(GenArgs),
    /// Report CP/TP/unital residuals of a channel file.
    Check(CheckArgs),
    /// Mixed-unitary ensemble for p·Φ + (1-p)·Ω.
    Decompose(DecomposeArgs),
    /// Test membership in the certified ball around Ω.
    Ball(BallArgs),
    /// Moment, design and convergence checks.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    MixedUnitary,
    Projected,
    Weyl,
    WernerHolevo,
    Depolarizing,
    Identity,
    BallProbe,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of Haar unitaries for `mixed-unitary`.
    #[arg(long, default_value_t = 4)]
    pub terms: usize,
    /// Radius fraction for `ball-probe`.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub input: PathBuf,
}

/// Channel read from `--input` or generated from `--method`/`--d`.
#[derive(Debug, Args)]
pub struct ChannelSource {
    #[arg(long, conflicts_with = "method")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, requires = "d")]
    pub method: Option<Method>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub terms: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Mc,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub source: ChannelSource,
    #[arg(long, default_value = "max", value_parser = parse_p)]
    pub p: MixingParam,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// `clifford` or an ensemble file with uniform weights.
    #[arg(long, default_value = "clifford")]
    pub design: String,
    #[arg(long, default_value = "1e5", value_parser = parse_count)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub prune: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BallArgs {
    #[command(flatten)]
    pub source: ChannelSource,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also decompose Φ itself.
    #[arg(long)]
    pub decompose: bool,
    #[arg(long, requires = "decompose")]
    pub prune: bool,
    #[arg(long, default_value = "clifford")]
    pub design: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Monte-Carlo Haar moments against the exact operators.
    Moments(MomentsArgs),
    /// Uniform-average moments of a finite unitary set.
    Design(DesignArgs),
    /// CSV of Monte-Carlo decomposition residual against sample count.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value = "1e5", value_parser = parse_count)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Highest moment order (1 or 2).
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub order: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DesignName {
    Weyl,
    Clifford,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long, value_enum, required_unless_present = "input", conflicts_with = "input")]
    pub name: Option<DesignName>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, required_unless_present = "input")]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub strength: u8,
    #[arg(long, value_parser = parse_tol)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub source: ChannelSource,
    #[arg(long, default_value = "1e2,1e3,1e4,1e5", value_parser = |s: &str| parse_sample_list(s).map(SampleList))]
    pub ns: SampleList,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of consecutive seeds.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Command output plus the process exit code.
struct Outcome {
    body: String,
    summary: Option<String>,
    code: i32,
}

impl Outcome {
    fn json<T: Serialize + ?Sized>(value: &T, code: i32) -> Self {
        Self { body: format::to_json(value), summary: None, code }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. Nothing is written to the real process streams.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli) {
        Ok(o) => {
            let dest = match &cli.command {
                Command::Gen(a) => a.out.as_deref(),
                Command::Decompose(a) => a.out.as_deref(),
                Command::Ball(a) => a.out.as_deref(),
                Command::Verify(VerifyCommand::Convergence(a)) => a.out.as_deref(),
                _ => None,
            };
            match dest {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &o.body) {
                        let _ = writeln!(err, "error: {}: {e}", path.display());
                        return EXIT_USAGE;
                    }
                    if let Some(s) = &o.summary {
                        let _ = writeln!(out, "{s}");
                    }
                }
                None => {
                    let _ = out.write_all(o.body.as_bytes());
                    if let Some(s) = &o.summary {
                        let _ = writeln!(err, "{s}");
                    }
                }
            }
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> CliResult<Outcome> {
    let tols = cli.tolerances();
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, &tols),
        Command::Check(a) => cmd_check(a, &tols),
        Command::Decompose(a) => cmd_decompose(a, &tols),
        Command::Ball(a) => cmd_ball(a, &tols),
        Command::Verify(VerifyCommand::Moments(a)) => cmd_moments(a),
        Command::Verify(VerifyCommand::Design(a)) => cmd_design(a, &tols),
        Command::Verify(VerifyCommand::Convergence(a)) => cmd_convergence(a),
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn read_channel(path: &Path) -> CliResult<ChannelData> {
    format::parse_channel(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Builds the channel for `method`; Weyl mixtures stay in ensemble form.
pub fn generate(method: Method, d: usize, seed: u64, terms: usize, scale: f64) -> mixed_unitary::Result<ChannelData> {
    let mut rng = RandomSource::new(seed);
    Ok(match method {
        Method::MixedUnitary => {
            ChannelData::Choi(corpus::random_ds_channel(d, &mut rng, GeneratorMethod::MixedUnitary { terms })?)
        }
        Method::Projected => ChannelData::Choi(corpus::random_ds_channel(d, &mut rng, GeneratorMethod::Projected)?),
        Method::Weyl => ChannelData::Ensemble(decomposer::depolarizing_ensemble(d)?),
        Method::WernerHolevo => ChannelData::Choi(corpus::werner_holevo_antisym(d)?),
        Method::Depolarizing => ChannelData::Choi(depolarizing_choi(d)),
        Method::Identity => ChannelData::Choi(identity_channel_choi(d)),
        Method::BallProbe => {
            if !(0.0..=1.0).contains(&scale) {
                return Err(Error::Precondition(format!("ball-probe scale must lie in [0, 1], got {scale}")));
            }
            ChannelData::Choi(corpus::ball_probe(d, scale, &mut rng)?)
        }
    })
}

fn check_dim(d: usize) -> CliResult<()> {
    if d == 0 || d > format::MAX_DIM {
        return Err(CliError::Usage(format!("--d must be in 1..={}, got {d}", format::MAX_DIM)));
    }
    Ok(())
}

fn load_source(src: &ChannelSource, seed: u64) -> CliResult<ChoiMatrix> {
    match (&src.input, src.method) {
        (Some(path), _) => Ok(read_channel(path)?.to_choi()),
        (None, Some(method)) => {
            let d = src.d.ok_or_else(|| CliError::Usage("--method needs --d".into()))?;
            check_dim(d)?;
            Ok(generate(method, d, seed, src.terms, 1.0)?.to_choi())
        }
        (None, None) => Err(CliError::Usage("give either --input FILE or --method NAME --d N".into())),
    }
}

fn cmd_gen(a: &GenArgs, tols: &Tolerances) -> CliResult<Outcome> {
    check_dim(a.d)?;
    let data = generate(a.method, a.d, a.seed, a.terms, a.scale)?;
    let report = validate(&data.to_choi(), tols.validity);
    Ok(Outcome {
        body: format::channel_to_json(&data),
        summary: Some(format::to_json(&report).trim_end().to_string()),
        code: EXIT_OK,
    })
}

fn cmd_check(a: &CheckArgs, tols: &Tolerances) -> CliResult<Outcome> {
    let j = read_channel(&a.input)?.to_choi();
    let report = validate(&j, tols.validity);
    let code = if report.doubly_stochastic { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(Outcome::json(&report, code))
}

fn load_design(choice: &str, d: usize) -> CliResult<UnitaryDesign> {
    if choice == "clifford" {
        if !matches!(d, 2 | 3) {
            return Err(CliError::Usage(format!(
                "built-in Clifford designs exist for d = 2, 3 only; pass --design FILE or --mode mc for d = {d}"
            )));
        }
        return Ok(designs::clifford_group(d)?);
    }
    let path = Path::new(choice);
    match read_channel(path)? {
        ChannelData::Ensemble(e) => Ok(UnitaryDesign::from_ensemble(&e, 2, path.display().to_string())?),
        other => Err(CliError::Usage(format!("{}: design file must be an ensemble, found {:?}", choice, other.kind()))),
    }
}

fn decomposition_summary(r: &DecompositionReport) -> String {
    format!(
        "mode={} p={:.16e} p_max={:.16e} residual_frobenius={:.3e} ensemble_size={} caratheodory_bound={} pruned={}",
        match r.mode {
            decomposer::DecompositionMode::ExactDesign => "exact_design",
            decomposer::DecompositionMode::MonteCarlo => "monte_carlo",
        },
        r.p,
        decomposer::max_mixing(r.d()),
        r.residual_frobenius,
        r.ensemble_size,
        r.caratheodory_bound,
        r.pruned
    )
}

fn cmd_decompose(a: &DecomposeArgs, tols: &Tolerances) -> CliResult<Outcome> {
    let j = load_source(&a.source, a.seed)?;
    let d = j.d();
    let p = a.p.resolve(d);
    let mut report = match a.mode {
        Mode::Exact => {
            let design = load_design(&a.design, d)?;
            decomposer::decompose_target_with(&j, p, &design, tols)?
        }
        Mode::Mc => decomposer::monte_carlo_decompose_target(&j, p, a.n_samples, a.seed, tols)?,
    };
    if a.prune {
        report = report.prune(tols.prune)?;
    }
    Ok(Outcome { body: format::report_to_json(&report), summary: Some(decomposition_summary(&report)), code: EXIT_OK })
}

fn cmd_ball(a: &BallArgs, tols: &Tolerances) -> CliResult<Outcome> {
    let j = load_source(&a.source, a.seed)?;
    let cert = corpus::ball_certificate(&j)?;
    let psi_psd = cert.psi_validity.min_eigenvalue >= -tols.psd;
    let inside = cert.inside && psi_psd;
    let mut body = json!({ "certificate": cert, "psi_psd": psi_psd });
    let mut summary =
        format!("infinity_distance={:.16e} radius={:.16e} inside={inside}", cert.infinity_distance, cert.radius);
    if a.decompose && inside {
        let design = load_design(&a.design, j.d())?;
        let mut report = corpus::ball_decompose(&j, &design)?;
        if a.prune {
            report = report.prune(tols.prune)?;
        }
        summary.push(' ');
        summary.push_str(&decomposition_summary(&report));
        body["decomposition"] = format::report_value(&report);
    }
    let code = if inside { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(Outcome { body: format::to_json(&body), summary: Some(summary), code })
}

fn cmd_moments(a: &MomentsArgs) -> CliResult<Outcome> {
    check_dim(a.d)?;
    let mut reports = vec![moments::monte_carlo_moment(MomentOrder::First, a.d, a.n_samples, a.seed)?];
    if a.order >= 2 {
        if a.d > 4 {
            return Err(CliError::Usage("second moments are limited to d <= 4".into()));
        }
        reports.push(moments::monte_carlo_moment(MomentOrder::Second, a.d, a.n_samples, a.seed)?);
    }
    let body = json!({ "d": a.d, "n_samples": a.n_samples, "seed": a.seed, "moments": reports });
    Ok(Outcome::json(&body, EXIT_OK))
}

fn cmd_design(a: &DesignArgs, tols: &Tolerances) -> CliResult<Outcome> {
    let design = match (&a.input, a.name) {
        (Some(path), _) => match read_channel(path)? {
            ChannelData::Ensemble(e) => UnitaryDesign::from_ensemble(&e, a.strength, path.display().to_string())?,
            other => {
                return Err(CliError::Usage(format!(
                    "{}: expected an ensemble, found {:?}",
                    path.display(),
                    other.kind()
                )))
            }
        },
        (None, Some(name)) => {
            let d = a.d.ok_or_else(|| CliError::Usage("--name needs --d".into()))?;
            check_dim(d)?;
            match name {
                DesignName::Weyl => designs::weyl_operators(d)?,
                DesignName::Clifford => {
                    if !matches!(d, 2 | 3) {
                        return Err(CliError::Usage(format!("Clifford designs exist for d = 2, 3 only, got {d}")));
                    }
                    designs::clifford_group(d)?
                }
            }
        }
        (None, None) => return Err(CliError::Usage("give --name or --input".into())),
    };
    if a.strength >= 2 && design.d() > 4 {
        return Err(CliError::Usage("strength-2 checks are limited to d <= 4".into()));
    }
    let report = designs::verify_design(&design, a.strength, a.tol.unwrap_or(tols.design))?;
    let code = if report.passed { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(Outcome::json(&report, code))
}

fn cmd_convergence(a: &ConvergenceArgs) -> CliResult<Outcome> {
    let j = if a.source.input.is_none() && a.source.method.is_none() {
        let d = a.source.d.ok_or_else(|| CliError::Usage("give --d, --method NAME --d N, or --input FILE".into()))?;
        check_dim(d)?;
        identity_channel_choi(d)
    } else {
        load_source(&a.source, a.seed)?
    };
    decomposer::require_doubly_stochastic(&j, tolerance::DS_GATE)?;
    if a.seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let mut csv = String::from("n,residual_frobenius,seed\n");
    for seed in a.seed..a.seed.saturating_add(a.seeds) {
        for &n in &a.ns.0 {
            let r = decomposer::monte_carlo_residual(&j, n, seed)?;
            csv.push_str(&format!("{n},{r:.16e},{seed}\n"));
        }
    }
    Ok(Outcome { body: csv, summary: None, code: EXIT_OK })
}
