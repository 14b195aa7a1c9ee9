mod commands;
mod config;
mod output;
mod spec;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{FileConfig, Overrides, RunConfig};

/// Failure classes, mapped to exit codes 2 and 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
}

impl From<qha_core::QhaError> for CliError {
    fn from(e: qha_core::QhaError) -> Self {
        use qha_core::QhaError::*;
        match e {
            InvalidParams(_) | InvalidArgument(_) | ParamsMismatch { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

/// Outcome of a command that ran to completion.
pub enum Status {
    Passed,
    /// A tolerance check failed; the message names it.
    ToleranceFailure(String),
}

const MAIN_HELP: &str = "\
Configuration is read from a TOML file (--config) with sections [model] (n, t, d, q),
[convolution] (window, resolution), [tolerances] (see below) and [run] (output, seed,
threads). Flags override file values; --print-config prints the resolved form.

Tolerance keys: orthonormality, toeplitz_constant, toeplitz_norm_squared, weyl_commutation,
weyl_inverse, berezin_kernel, trace_identity, adjoint_duality, commutativity,
toeplitz_pipelines, window_stability, approx_slack, decrease_slack, quantization_slack,
invariance.

Every output file embeds the resolved configuration (without the output directory and
thread count): JSON files under \"config\" next to \"schema_version\": \"1\", CSV files as
lines starting with '#' above the header row.

Exit codes: 0 success, 1 tolerance failure, 2 usage or configuration error.";

#[derive(Debug, Parser)]
#[command(name = "qha", version, about = "Quantum harmonic analysis on truncated Fock spaces", after_help = MAIN_HELP)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Complex dimension.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Gaussian weight t > 0.
    #[arg(long, global = true)]
    t: Option<f64>,
    /// Degree cutoff D.
    #[arg(long, global = true)]
    d: Option<usize>,
    /// Gauss-Hermite order per real axis; at least D + 2. Defaults to D + 10.
    #[arg(long, global = true)]
    q: Option<usize>,
    /// Half-width of the convolution window. Defaults to sqrt(t (D + 4)) + 3 sqrt(t).
    #[arg(long, global = true)]
    window: Option<f64>,
    /// Gauss-Legendre points per real axis of the convolution grid.
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for every randomized choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", value_name = "KEY=VALUE", global = true, value_parser = parse_tolerance)]
    tolerances: Vec<(String, f64)>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

fn parse_tolerance(text: &str) -> Result<(String, f64), String> {
    let (k, v) = text.split_once('=').ok_or("expected KEY=VALUE")?;
    let v: f64 = v.trim().parse().map_err(|_| format!("not a number: {v}"))?;
    Ok((k.trim().to_string(), v))
}

const VERIFY_HELP: &str = "\
Writes verify/<identity>.json for each identity and verify/summary.csv with columns
identity,residual,tolerance,passed,flags (flags separated by '|'). Convolution-based
identities carry the flag window_instability when doubling the window changes f_t * A by
more than the window_stability tolerance, and window_below_trusted_radius when the window
does not contain the trusted disc.";

const APPROX_HELP: &str = "\
Targets: identity, projection, toeplitz:<symbol>, weyl:<point>, rank-one:<point>,
random:<rank>. Symbols: gaussian-bump(center=<point>, width=<w>), plane-wave(freq=<point>),
constant(value=<c>), norm-squared, horizontal(width=<w>), radial(width=<w>). Points are
';'-separated complex numbers such as 0.5, 0.3-0.2i or 1i.

Writes approx.csv with columns N,l1_residual,op_error,baseline_error and approx.json with
the full stage reports. Fails with exit 1 when the errors are not non-increasing within
approx_slack or the domination bound fails at some stage.";

const SWEEP_HELP: &str = "\
Writes sweep-<kind>.csv with columns <parameter>,<measured columns>,model_n,model_t,
model_d,model_q,flagged and sweep-<kind>.json.
  quantization     parameter t; columns product_defect = ||T_f T_g - T_fg||, heat_defect =
                   sup |fg - heat_t(fg)|. The degree is rescaled per t. --values defaults to
                   t, t/2, t/4, t/8. Exit 1 unless both columns decrease within
                   quantization_slack.
  approx-identity  parameter s; column op_error = ||f_s * A - A||. Default target
                   toeplitz:gaussian-bump. Exit 1 unless decreasing within decrease_slack.
  compactness      parameter r; column berezin_max = max |A~| on the circle of radius r.
                   Default target identity. Also writes sweep-compactness-singular-values.csv
                   with columns index,singular_value.
  invariance       parameter lambda; columns direction, residual = ||alpha_w(T_f) - T_f|| for
                   w = lambda * direction. Default symbol horizontal(width=2), direction i.
                   The sidecar reports invariant = false and the flag negative_control when
                   the residual exceeds the invariance tolerance; this does not fail the run.
Operator norms are spectral norms on the trusted sub-block (degrees <= D/2).";

const EXPORT_OPERATOR_HELP: &str = "\
Writes the operator as a JSON container with fields format, version, params, basis (multi-
indices in graded order), entries (row-major [re, im] pairs) and metadata (the embedded
configuration).";

const EXPORT_BEREZIN_HELP: &str = "\
Writes berezin.csv with columns re_z1,im_z1,...,re_value,im_value,flagged on a uniform
grid over [-extent, extent]^(2n); flagged = 1 outside the trusted window. Also writes
berezin.json with the grid description.";

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the identity suite on the configured model.
    #[command(after_help = VERIFY_HELP)]
    Verify(VerifyArgs),
    /// Approximate an operator by Toeplitz operators with translated Berezin symbols.
    #[command(after_help = APPROX_HELP)]
    Approx(ApproxArgs),
    /// Run an experiment sweep.
    #[command(after_help = SWEEP_HELP)]
    Sweep(SweepArgs),
    /// Write an operator matrix to a JSON container.
    #[command(after_help = EXPORT_OPERATOR_HELP)]
    ExportOperator(ExportOperatorArgs),
    /// Sample the Berezin transform of an operator on a grid.
    #[command(after_help = EXPORT_BEREZIN_HELP)]
    ExportBerezin(ExportBerezinArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Random operator pairs for the trace identity.
    #[arg(long, default_value_t = 5)]
    pub pairs: usize,
    /// Points per real axis of the ball grids.
    #[arg(long, default_value_t = 9)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    /// Operator to approximate.
    pub target: String,
    /// Comma-separated stages N.
    #[arg(long, default_value = "1,2,4,8")]
    pub stages: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SweepKind {
    Quantization,
    ApproxIdentity,
    Compactness,
    Invariance,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub kind: SweepKind,
    /// Comma-separated parameter values (t, s, r or lambda).
    #[arg(long)]
    pub values: Option<String>,
    /// Operator target for approx-identity and compactness.
    #[arg(long)]
    pub target: Option<String>,
    /// Symbol for invariance, and f for quantization.
    #[arg(long)]
    pub symbol: Option<String>,
    /// Second symbol g for quantization; defaults to the first.
    #[arg(long)]
    pub symbol_g: Option<String>,
    /// Translation direction for invariance.
    #[arg(long)]
    pub direction: Option<String>,
    /// Angles per circle for compactness.
    #[arg(long, default_value_t = 16)]
    pub angles: usize,
}

#[derive(Debug, Args)]
pub struct ExportOperatorArgs {
    pub target: String,
    /// File name inside the output directory.
    #[arg(long, default_value = "operator.json")]
    pub file: String,
}

#[derive(Debug, Args)]
pub struct ExportBerezinArgs {
    pub target: String,
    /// Half-width of the sampling grid; defaults to the trusted radius.
    #[arg(long)]
    pub extent: Option<f64>,
    /// Points per real axis.
    #[arg(long, default_value_t = 41)]
    pub points: usize,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            n: self.n,
            t: self.t,
            d: self.d,
            q: self.q,
            window: self.window,
            resolution: self.resolution,
            output: self.output.clone(),
            seed: self.seed,
            threads: self.threads,
            tolerances: self.tolerances.clone(),
        }
    }
}

fn run(cli: Cli) -> Result<Status, CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let cfg = RunConfig::resolve(file, &cli.overrides())?;
    if cli.print_config {
        print!("{}", cfg.to_toml());
        return Ok(Status::Passed);
    }
    let command = cli
        .command
        .ok_or_else(|| CliError::Usage("a subcommand is required (see --help)".into()))?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = cfg.run.threads {
        pool = pool.num_threads(threads);
    }
    let pool = pool.build().map_err(|e| CliError::Failed(e.to_string()))?;
    pool.install(|| match command {
        Command::Verify(args) => commands::verify(&cfg, &args),
        Command::Approx(args) => commands::approx(&cfg, &args),
        Command::Sweep(args) => commands::sweep(&cfg, &args),
        Command::ExportOperator(args) => commands::export_operator(&cfg, &args),
        Command::ExportBerezin(args) => commands::export_berezin(&cfg, &args),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Status::Passed) => ExitCode::SUCCESS,
        Ok(Status::ToleranceFailure(msg)) => {
            eprintln!("tolerance failure: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
