//! `hindex`: exact and sublinear h-index computation, benchmark suites and
//! the lower-bound constructions from the command line.
//!
//! Results go to stdout, diagnostics to stderr. Exit status is 0 on success,
//! 1 on invalid input and 2 when an internal invariant is violated.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use hindex_core::estimator::SamplingMode;
use hindex_core::gen::{generate_array, GenSpec};
use hindex_core::hardness::ptp::{sample_ptp, PtpInstance, PtpParams};
use hindex_core::hardness::reduction::{ptp_via_hindex, Answer, BudgetPolicy, EstimatorSolver};
use hindex_core::hardness::verify::verify_gx;
use hindex_core::harness::{run_on_array, run_suite, Config, Grid, GridPoint, Suite};
use hindex_core::oracle::load_array;
use hindex_core::rng::DEFAULT_SEED;
use hindex_core::{exact_h_index, Error, RngHandle};

#[derive(Parser)]
#[command(name = "hindex", version, about = "Exact and sublinear-time h-index estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exact h-index of an array.
    Exact {
        #[command(flatten)]
        input: ArrayInput,
        /// Seed for --gen.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Run the sublinear estimator and compare against the exact value.
    Estimate(EstimateArgs),
    /// Run a benchmark suite described by a TOML config and write its CSV.
    Bench(BenchArgs),
    /// Popcount-thresholding instances.
    #[command(subcommand)]
    Ptp(PtpCommand),
    /// The triangle-counting graph oracle G_x.
    #[command(subcommand)]
    Gx(GxCommand),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ArrayInput {
    /// Array file: one non-negative integer per line.
    #[arg(long)]
    array: Option<PathBuf>,
    /// Generated array with a planted h-index: n=..,h=..[,high=..][,low=uniform|zeros].
    #[arg(long)]
    gen: Option<String>,
}

impl ArrayInput {
    fn load(&self, seed: u64) -> anyhow::Result<Vec<u64>> {
        if let Some(path) = &self.array {
            return Ok(load_array(path)?);
        }
        let spec: GenSpec = self.gen.as_deref().unwrap_or_default().parse()?;
        Ok(generate_array(&spec, &RngHandle::from_seed(seed).split(u64::MAX))?)
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: ArrayInput,
    /// Relative accuracy: the estimate should land within (1 ± eps)·h.
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Failure probability of one estimate.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Master seed; trial i uses a stream split off it.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Independent estimates to run.
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// per-read samples every index separately; batched draws k samples at once.
    #[arg(long, value_parser = parse_sampling, default_value = "batched")]
    sampling: SamplingMode,
    /// Also write one CSV row per trial here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// estimate, weak, strong, ptp_hindex or gx_verify; overrides the config.
    #[arg(long)]
    suite: Option<String>,
    /// TOML file with trials, grid axes and options.
    #[arg(long)]
    config: PathBuf,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
    /// Master seed.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    jobs: Option<usize>,
    /// Write time_us as 0 so the CSV is reproducible byte for byte.
    #[arg(long)]
    no_wall_time: bool,
}

#[derive(Subcommand)]
enum PtpCommand {
    /// Sample an instance: x has i.i.d. Bernoulli((1 ± 2gamma)k/m) bits.
    Gen {
        #[command(flatten)]
        params: PtpArgs,
        /// Hidden label: 0 draws from the sparse side, 1 from the dense side; random if absent.
        #[arg(long)]
        label: Option<u8>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Instance file to write; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide an instance through the h-index reduction with the estimator as solver.
    Solve {
        /// Instance file written by `ptp gen`.
        #[arg(long)]
        instance: PathBuf,
        /// Error probability of the decision; fixes the query budget.
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Let the solver run past the query budget.
        #[arg(long)]
        no_budget: bool,
    },
}

#[derive(Args)]
struct PtpArgs {
    /// Number of bits.
    #[arg(long)]
    m: usize,
    /// Popcount scale: Yes instances have about (1+2gamma)k ones, No instances (1-2gamma)k.
    #[arg(long)]
    k: u64,
    /// Gap parameter in (0, 1/4); also the accuracy handed to the solver.
    #[arg(long)]
    gamma: f64,
    /// Error probability in (0, 1).
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
}

#[derive(Subcommand)]
enum GxCommand {
    /// Check the lazy oracle against a materialised copy on random x.
    Verify {
        /// Edge count: 4s² for an integer s, at most 4096.
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Random bit strings to check.
        #[arg(long, default_value_t = 10)]
        instances: usize,
        /// Edge samples for the uniformity test.
        #[arg(long, default_value_t = 100_000)]
        edge_samples: u64,
    },
}

fn parse_sampling(s: &str) -> Result<SamplingMode, String> {
    match s {
        "batched" => Ok(SamplingMode::Batched),
        "per-read" | "per_read" => Ok(SamplingMode::PerRead),
        other => Err(format!("expected batched or per-read, got {other:?}")),
    }
}

/// Raised when a run completes but an invariant check fails.
#[derive(Debug)]
struct InvariantFailure(String);

impl std::fmt::Display for InvariantFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvariantFailure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<InvariantFailure>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::PromiseViolated(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let mut out = std::io::stdout().lock();
    match run(cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command, out: &mut impl Write) -> anyhow::Result<()> {
    match command {
        Command::Exact { input, seed } => {
            let values = input.load(seed)?;
            writeln!(out, "{}", exact_h_index(&values))?;
        }
        Command::Estimate(args) => estimate(args, out)?,
        Command::Bench(args) => bench(args, out)?,
        Command::Ptp(PtpCommand::Gen {
            params,
            label,
            seed,
            out: path,
        }) => {
            let p = PtpParams::new(params.m, params.k, params.gamma, params.delta);
            p.validate()?;
            if let Some(l) = label {
                if l > 1 {
                    bail!(Error::InvalidParameter(format!("label must be 0 or 1, got {l}")));
                }
            }
            let inst = sample_ptp(&p, label, &RngHandle::from_seed(seed))?;
            let text = inst.to_file_string(&p);
            match path {
                Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => out.write_all(text.as_bytes())?,
            }
        }
        Command::Ptp(PtpCommand::Solve {
            instance,
            delta,
            seed,
            no_budget,
        }) => {
            let text = fs::read_to_string(&instance).with_context(|| format!("reading {}", instance.display()))?;
            let (inst, mut p) = PtpInstance::parse_file(&text)?;
            p.delta = delta;
            p.validate()?;
            let policy = if no_budget {
                BudgetPolicy::Disabled
            } else {
                BudgetPolicy::Enforced
            };
            let mut solver = EstimatorSolver::default();
            let r = ptp_via_hindex(&inst, &p, &mut solver, policy, &RngHandle::from_seed(seed))?;
            let answer = if r.answer == Answer::Yes { "yes" } else { "no" };
            let estimate = r.estimate.map_or_else(|| "none".to_string(), |e| e.to_string());
            writeln!(
                out,
                "answer={answer} label={} correct={} estimate={estimate} queries={} budget={} exhausted={}",
                inst.label,
                r.answer == Answer::expected(inst.label),
                r.queries_used,
                r.budget,
                r.exhausted
            )?;
        }
        Command::Gx(GxCommand::Verify {
            m,
            seed,
            instances,
            edge_samples,
        }) => {
            let report = verify_gx(m, instances, edge_samples, &RngHandle::from_seed(seed))?;
            write!(out, "{report}")?;
            if !report.passed() {
                bail!(InvariantFailure(format!("G_x verification failed at m = {m}")));
            }
            writeln!(
                out,
                "all {} checks passed for m = {m} over {instances} instances",
                report.checks.len()
            )?;
        }
    }
    Ok(())
}

fn estimate(args: EstimateArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let values = args.input.load(args.seed)?;
    let mut config = Config::new(Suite::Estimate, args.trials, Grid::default());
    config.sampling = args.sampling;
    config.record_wall_time = false;
    let point = GridPoint {
        eps: args.eps,
        delta: args.delta,
        ..GridPoint::default()
    };
    let result = run_on_array(&config, values, point, &RngHandle::from_seed(args.seed), Some(1))?;
    for r in &result.reports {
        if let hindex_core::harness::TrialOutput::Estimate { h_tilde, fallback } = r.output {
            writeln!(
                out,
                "trial={} h_tilde={h_tilde} h={} ok={} queries={} fallback={}",
                r.trial_id, r.h_true, r.success, r.queries_used, fallback
            )?;
        }
    }
    write!(out, "{}", result.summary())?;
    if let Some(path) = args.csv {
        fs::write(&path, result.csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn bench(args: BenchArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let mut config = Config::load(&args.config)?;
    if let Some(s) = &args.suite {
        config.suite = Some(s.parse()?);
    }
    if args.no_wall_time {
        config.record_wall_time = false;
    }
    if args.jobs == Some(0) {
        bail!(Error::InvalidConfig("--jobs must be at least 1".into()));
    }
    let result = run_suite(&config, &RngHandle::from_seed(args.seed), args.jobs)?;
    fs::write(&args.out, result.csv()).with_context(|| format!("writing {}", args.out.display()))?;
    write!(out, "{}", result.summary())?;
    eprintln!("wrote {} rows to {}", result.reports.len(), args.out.display());
    Ok(())
}
