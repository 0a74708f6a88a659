use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use invlin_core::analysis::{certify_gap, offline_evaluate, GapCertificate, OfflineEstimate};
use invlin_core::{EnumerationCap, NormPair};
use invlin_harness::config::{ExperimentConfig, GapTarget, Overrides};
use invlin_harness::generate::{generate_instance_stream, holdout_sampler, holdout_seed};
use invlin_harness::run::{evaluate_stream, run_experiment, summary_text};
use invlin_harness::stream::{parse_vector_line, read_stream, write_stream, StoredStream};
use invlin_harness::sweep::{run_sweep, SweepGrid, SWEEP_FILE};
use invlin_harness::trace::format_real;

#[derive(Parser)]
#[command(name = "invlin", about = "Online inverse linear optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment; exits 1 if any applicable check fails.
    Run(RunArgs),
    /// Grid over rounds, gap target and dimension.
    Sweep(SweepArgs),
    /// Write a generated stream without running the learner.
    Generate(RunArgs),
    /// Certify the gap of a stored stream; exits 1 if no positive gap.
    Certify(CertifyArgs),
    /// Offline suboptimality loss of a stored prediction.
    Eval(EvalArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat TOML config; without it every key takes its default and `--seed` is required.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dimension: Option<usize>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    regularizer: Option<String>,
    /// none | integral | margin:<delta>
    #[arg(long)]
    gap: Option<GapTarget>,
    #[arg(long)]
    agent_noise: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the generated stream to `stream.txt`.
    #[arg(long)]
    save_stream: bool,
}

impl ConfigArgs {
    fn load(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => match self.seed {
                Some(seed) => ExperimentConfig::with_seed(seed),
                None => bail!("either --config or --seed is required"),
            },
        };
        let overrides = Overrides {
            rounds: self.rounds,
            seed: self.seed,
            dimension: self.dimension,
            family: self.family.clone(),
            schedule: self.schedule.clone(),
            regularizer: self.regularizer.clone(),
            gap: self.gap,
            agent_noise: self.agent_noise,
            out: self.out.clone(),
        };
        overrides.apply(&mut cfg)?;
        cfg.save_stream |= self.save_stream;
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    base: ConfigArgs,
    /// Comma-separated horizons.
    #[arg(long = "grid-rounds", value_delimiter = ',', required = true)]
    grid_rounds: Vec<usize>,
    /// Comma-separated gap targets.
    #[arg(long = "grid-gap", value_delimiter = ',', default_value = "none")]
    grid_gap: Vec<GapTarget>,
    /// Comma-separated dimensions.
    #[arg(long = "grid-dimension", value_delimiter = ',', required = true)]
    grid_dimension: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    stream: PathBuf,
    /// linf-l1 (simplex) or l2-l2 (ball).
    #[arg(long, default_value = "linf-l1")]
    norms: String,
    /// Objective to certify; defaults to the stream's stored c*.
    #[arg(long)]
    cstar: Option<String>,
    #[arg(long, default_value_t = 1 << 20)]
    cap: usize,
}

#[derive(Args)]
struct EvalArgs {
    /// File holding one vector (whitespace- or comma-separated).
    #[arg(long)]
    prediction: PathBuf,
    /// Evaluate on a stored stream.
    #[arg(long, conflicts_with = "config")]
    stream: Option<PathBuf>,
    /// Evaluate on fresh samples from a config's instance distribution.
    #[arg(long, required_unless_present = "stream")]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Sampling seed; defaults to the config's holdout seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn print_estimate(e: &OfflineEstimate) {
    println!("samples = {}", e.samples);
    println!("prediction_loss = {}", format_real(e.prediction_loss));
    println!("truth_loss = {}", format_real(e.truth_loss));
    println!("std_err = {}", format_real(e.std_err));
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.config.load()?;
            let report = run_experiment(&cfg)?;
            print!("{}", summary_text(&cfg, &report.output));
            Ok(report.exit_code() as u8)
        }
        Command::Generate(args) => {
            let cfg = args.config.load()?;
            let stream = generate_instance_stream(&cfg)?;
            std::fs::create_dir_all(&cfg.out).with_context(|| cfg.out.display().to_string())?;
            let path = cfg.out.join("stream.txt");
            write_stream(&path, &StoredStream::from(&stream))?;
            println!("stream = {}", path.display());
            Ok(0)
        }
        Command::Sweep(args) => {
            let base = args.base.load()?;
            let grid = SweepGrid {
                rounds: args.grid_rounds,
                gaps: args.grid_gap,
                dimensions: args.grid_dimension,
                trials: args.trials,
            };
            let results = run_sweep(&base, &grid, &base.out, true)?;
            let failed = results.iter().filter(|r| !r.output.passed()).count();
            println!("trials = {}", results.len());
            println!("failed_trials = {failed}");
            println!("sweep = {}", base.out.join(SWEEP_FILE).display());
            Ok(u8::from(failed > 0))
        }
        Command::Certify(args) => {
            let stream = read_stream(&args.stream)?;
            let norms = NormPair::from_name(&args.norms).with_context(|| format!("unknown norms `{}`", args.norms))?;
            let c_star = match (&args.cstar, &stream.c_star) {
                (Some(text), _) => parse_vector_line(text)?,
                (None, Some(c)) => c.clone(),
                (None, None) => bail!("stream has no c*; pass --cstar"),
            };
            match certify_gap(&stream.observations, &c_star, norms, EnumerationCap(args.cap))? {
                GapCertificate::Satisfied { delta, .. } => {
                    println!("status = certified");
                    println!("delta = {}", format_real(delta));
                    Ok(0)
                }
                GapCertificate::NotSatisfied { round, witness, value } => {
                    println!("status = not-satisfied");
                    println!("round = {round}");
                    println!("witness = {witness}");
                    println!("value = {}", format_real(value));
                    Ok(1)
                }
            }
        }
        Command::Eval(args) => {
            let text = std::fs::read_to_string(&args.prediction).with_context(|| args.prediction.display().to_string())?;
            let prediction = parse_vector_line(&text)?;
            let estimate = match (&args.stream, &args.config) {
                (Some(path), _) => evaluate_stream(&prediction, &read_stream(path)?)?,
                (None, Some(path)) => {
                    let cfg = ExperimentConfig::load(path)?;
                    let stream = generate_instance_stream(&cfg)?;
                    let sampler = holdout_sampler(&cfg, &stream)?;
                    let seed = args.seed.unwrap_or_else(|| holdout_seed(cfg.seed));
                    offline_evaluate(&prediction, &stream.c_star, &sampler, args.samples, seed)?
                }
                (None, None) => bail!("--stream or --config is required"),
            };
            print_estimate(&estimate);
            Ok(0)
        }
    }
}
