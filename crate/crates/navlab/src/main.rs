//! Command-line interface: train, eval, compare, plot, world check.

use clap::{Args, Parser, Subcommand};
use navlab::config::{Algo, RunConfig};
use navlab::trainer::{self, HarnessError};
use navlab::world;
use std::path::PathBuf;

/// Deterministic mapless-navigation training laboratory.
#[derive(Parser)]
#[command(name = "navlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonTrainArgs {
    /// World file to load.
    #[arg(long)]
    world: Option<PathBuf>,
    /// Reward function: basic | advanced.
    #[arg(long)]
    reward: Option<String>,
    /// Master seed; every output is a pure function of (config, seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of episodes.
    #[arg(long)]
    episodes: Option<u32>,
    /// Config file with `key = value` lines; CLI flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $NAVLAB_OUT or ./runs, plus a run name).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record real wall-clock per episode (breaks byte-reproducibility).
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy and write metrics plus checkpoints.
    Train {
        /// Algorithm: ppo_res | ppo_mlp | ddpg.
        #[arg(long)]
        algo: Option<String>,
        #[command(flatten)]
        common: CommonTrainArgs,
    },
    /// Evaluate a checkpoint with the deterministic policy.
    Eval {
        /// Checkpoint file written by `train`.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Require this algorithm tag in the checkpoint.
        #[arg(long)]
        algo: Option<String>,
        #[command(flatten)]
        common: CommonTrainArgs,
    },
    /// Summarize finished runs as a markdown table.
    Compare {
        /// Run directories containing metrics.csv.
        dirs: Vec<PathBuf>,
    },
    /// Render a learning curve SVG from a metrics CSV.
    Plot {
        #[arg(long)]
        metrics: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Moving-average window (1 disables the overlay).
        #[arg(long, default_value_t = 10)]
        window: usize,
    },
    /// World-file utilities.
    World {
        #[command(subcommand)]
        command: WorldCommand,
    },
}

#[derive(Subcommand)]
enum WorldCommand {
    /// Parse and validate a world file.
    Check {
        #[arg(long)]
        world: PathBuf,
        #[arg(long, default_value_t = 0.105)]
        robot_radius: f64,
    },
}

fn build_config(
    algo: Option<&str>,
    common: &CommonTrainArgs,
) -> Result<RunConfig, HarnessError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        cfg.apply_file(path)?;
    }
    if let Some(a) = algo {
        cfg.apply_kv("algo", a)?;
    }
    if let Some(w) = &common.world {
        cfg.world_path = w.clone();
    }
    if let Some(r) = &common.reward {
        cfg.apply_kv("reward", r)?;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(e) = common.episodes {
        cfg.episodes = e;
    }
    if common.timing {
        cfg.timing = true;
    }
    cfg.out_dir = common.out.clone();
    Ok(cfg)
}

fn output_dir(cfg: &RunConfig) -> PathBuf {
    match &cfg.out_dir {
        Some(dir) => dir.clone(),
        None => {
            let root = std::env::var("NAVLAB_OUT").unwrap_or_else(|_| "runs".into());
            PathBuf::from(root).join(cfg.run_name())
        }
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Train { algo, common } => {
            let cfg = build_config(algo.as_deref(), &common)?;
            let out = output_dir(&cfg);
            let outcome = trainer::run_training(&cfg, &out)?;
            println!(
                "trained {} for {} episodes into {}",
                cfg.algo,
                outcome.records.len(),
                out.display()
            );
            print!("{}", trainer::report_markdown(&cfg.run_name(), &outcome.report));
            Ok(())
        }
        Command::Eval {
            checkpoint,
            algo,
            common,
        } => {
            let expected = match algo.as_deref() {
                Some(a) => Some(Algo::parse(a).ok_or_else(|| {
                    HarnessError::Invalid(format!("unknown algorithm {a:?}"))
                })?),
                None => None,
            };
            let mut cfg = build_config(None, &common)?;
            if common.episodes.is_none() {
                cfg.episodes = 100;
            }
            let outcome = trainer::run_eval(&checkpoint, &cfg, expected)?;
            if let Some(out) = &cfg.out_dir {
                std::fs::create_dir_all(out)?;
                let mut writer = navlab::metrics::MetricsWriter::create(&out.join("eval.csv"))?;
                for r in &outcome.records {
                    writer.append(r)?;
                }
                std::fs::write(
                    out.join("report.md"),
                    trainer::report_markdown("eval", &outcome.report),
                )?;
            }
            print!("{}", trainer::report_markdown("eval", &outcome.report));
            Ok(())
        }
        Command::Compare { dirs } => {
            let table = trainer::compare_runs(&dirs)?;
            print!("{table}");
            Ok(())
        }
        Command::Plot {
            metrics,
            out,
            window,
        } => {
            navlab::plot::emit_learning_curve(&metrics, &out, window)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::World { command } => match command {
            WorldCommand::Check {
                world: path,
                robot_radius,
            } => {
                let w = world::parse_world(&path)?;
                let problems = world::check_world(&w, robot_radius);
                if problems.is_empty() {
                    println!(
                        "{} ok: {} obstacles, bounds {:.1} x {:.1} m",
                        path.display(),
                        w.obstacles.len(),
                        w.bounds.width(),
                        w.bounds.height()
                    );
                    Ok(())
                } else {
                    for p in &problems {
                        eprintln!("{}: {p}", path.display());
                    }
                    Err(HarnessError::Invalid(format!(
                        "world failed {} check(s)",
                        problems.len()
                    )))
                }
            }
        },
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
