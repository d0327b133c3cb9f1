use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use forcelearn::controllers::ActionSpaceModel;
use forcelearn::harness::{self, sweep::SweepSpec, RunConfig};
use forcelearn::par::Parallelism;
use forcelearn::Error;

#[derive(Parser)]
#[command(
    name = "forcelearn",
    version,
    about = "Learning force-control gains for peg insertion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one policy.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        model: Option<ActionSpaceModel>,
        /// Run directory; defaults to <out>/<model>-seed<seed>-<pen|nopen>.
        #[arg(long)]
        run_dir: Option<PathBuf>,
    },
    /// Train every model, seed and reward variant and compare collisions.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated model names.
        #[arg(long, value_delimiter = ',')]
        models: Vec<ActionSpaceModel>,
        /// Number of seeds, starting at --first-seed.
        #[arg(long, default_value_t = 3)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        /// Reward variants to run.
        #[arg(long, value_enum, default_value_t = Variants::Both)]
        variants: Variants,
        /// Run one job at a time.
        #[arg(long)]
        sequential: bool,
    },
    /// Render learning curves of run directories as SVG.
    Plot {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long, default_value = "curves.svg")]
        output: PathBuf,
        #[arg(long, default_value = "episode reward")]
        title: String,
    },
    /// Evaluate the deterministic policy of a run.
    Eval {
        run_dir: PathBuf,
        #[arg(long, default_value_t = 20)]
        episodes: usize,
        #[arg(long, default_value_t = 12345)]
        seed: u64,
        /// Checkpoint to load instead of the run's final one.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; profile defaults otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    steps: Option<usize>,
    /// Penalize collisions in the reward (true/false).
    #[arg(long)]
    penalize: Option<bool>,
    /// Output root.
    #[arg(long, env = "FORCELEARN_OUT", default_value = "runs")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variants {
    Both,
    Penalized,
    Unpenalized,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::UnknownModel(_)
            | Error::TomlDe(_)
            | Error::ConfigHashMismatch { .. } => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?,
        None => RunConfig::default(),
    };
    if let Some(steps) = common.steps {
        cfg.total_steps = steps;
    }
    if let Some(p) = common.penalize {
        cfg.env.reward.penalize_collision = p;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Train {
            common,
            seed,
            model,
            run_dir,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(model) = model {
                cfg.env.control.model = model;
            }
            cfg.validate()?;
            let dir = run_dir.unwrap_or_else(|| {
                common.out.join(harness::sweep::run_dir_name(
                    cfg.env.control.model,
                    cfg.seed,
                    cfg.env.reward.penalize_collision,
                ))
            });
            let out = harness::train(&cfg, &dir)?;
            let s = &out.summary;
            println!(
                "{}: {} steps, {} episodes, {} successes, {} collisions, final success rate {:.2}",
                dir.display(),
                s.steps,
                s.episodes,
                s.successes,
                s.collisions,
                s.final_success_rate
            );
        }
        Command::Sweep {
            common,
            models,
            seeds,
            first_seed,
            variants,
            sequential,
        } => {
            let cfg = load_config(&common)?;
            let penalize = match (variants, common.penalize) {
                (_, Some(p)) => vec![p],
                (Variants::Both, None) => vec![true, false],
                (Variants::Penalized, None) => vec![true],
                (Variants::Unpenalized, None) => vec![false],
            };
            let spec = SweepSpec {
                models,
                seeds: (first_seed..first_seed + seeds).collect(),
                penalize,
            };
            let mode = if sequential {
                Parallelism::Sequential
            } else {
                Parallelism::Auto
            };
            let report = harness::sweep(&cfg, &spec, &common.out, mode)?;
            for row in &report.table {
                let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.1}"));
                println!(
                    "{:8} penalized {:>8} non-penalized {:>8} difference {:>7}%",
                    row.model,
                    fmt(row.penalized),
                    fmt(row.non_penalized),
                    fmt(row.percent_difference)
                );
            }
            let failed = report.runs.iter().filter(|r| r.result.is_err()).count();
            if failed > 0 {
                return Err(Failure::Runtime(format!(
                    "{failed} of {} runs failed",
                    report.runs.len()
                )));
            }
        }
        Command::Plot {
            runs,
            output,
            title,
        } => {
            let (_, svg) = harness::plot_runs(&runs, &title)?;
            std::fs::write(&output, svg).map_err(|e| Failure::Runtime(e.to_string()))?;
            println!("wrote {}", output.display());
        }
        Command::Eval {
            run_dir,
            episodes,
            seed,
            checkpoint,
        } => {
            let report = match checkpoint {
                None => harness::evaluate_run_dir(&run_dir, episodes, seed)?,
                Some(path) => eval_with(&run_dir, &path, episodes, seed)?,
            };
            println!(
                "episodes {} successes {} collisions {} success rate {:.3} mean steps to success {}",
                report.episodes,
                report.successes,
                report.collisions,
                report.success_rate,
                report.mean_steps_to_success.map_or_else(|| "-".into(), |v| format!("{v:.1}"))
            );
        }
    }
    Ok(())
}

fn eval_with(
    run_dir: &Path,
    ckpt: &Path,
    episodes: usize,
    seed: u64,
) -> Result<harness::EvalReport, Failure> {
    let cfg = RunConfig::load(&run_dir.join(harness::train::CONFIG_FILE))?;
    let ckpt = forcelearn::rl::Checkpoint::load(ckpt)?;
    Ok(harness::evaluate(&cfg, ckpt, episodes, seed)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // bad flags count as configuration errors, not clap's default code 2
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
