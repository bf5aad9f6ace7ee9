use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use brplan_cli::commands::{self, EllsbergConfig, MapConfig, SampleConfig, SweepConfig, UtilityShape};
use brplan_cli::format::{parse_problem_file, parse_tree_file, tree_to_json};
use brplan_core::EllsbergColor;
use clap::{Parser, Subcommand, ValueEnum};

/// Bounded-rational decision making: exact free-energy solutions and
/// rejection-sampling planners. Every command writes CSV.
///
/// The environment variable BRPLAN_THREADS caps the number of worker threads.
/// Results do not depend on it.
#[derive(Parser)]
#[command(name = "brplan", version)]
struct Cli {
    /// Write the CSV here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single-step problem file: Gibbs posterior, certainty-equivalent
    /// and acceptance probability.
    #[command(after_help = commands::PROBLEM_COLUMNS)]
    Problem {
        file: PathBuf,
        /// Target utility U* (overrides the file).
        #[arg(long, allow_hyphen_values = true)]
        target: Option<f64>,
        /// Also print utilities of the equivalent problem at this temperature.
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
    },
    /// Solve a tree file exactly by backward induction.
    #[command(after_help = commands::SOLVE_COLUMNS)]
    Solve { file: PathBuf },
    /// Draw paths from a tree file with the recursive rejection planner.
    #[command(after_help = commands::SAMPLE_COLUMNS)]
    Sample {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        /// Target utility U*; defaults to the best (or worst, for a negative
        /// root temperature) total path value.
        #[arg(long, allow_hyphen_values = true)]
        target: Option<f64>,
        /// Root attempts per sample before giving up (unbounded by default).
        #[arg(long)]
        max_attempts: Option<u64>,
        /// Experimental: run on trees whose temperatures change sign. The
        /// output then has no exactness guarantee.
        #[arg(long)]
        allow_mixed_signs: bool,
    },
    /// Satisficing search over a large policy set with utilities x^2 on a
    /// uniform grid, for a range of temperatures.
    #[command(after_help = commands::SWEEP_COLUMNS)]
    Sweep {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Runs per temperature.
        #[arg(long, default_value_t = 300)]
        samples: usize,
        /// Number of policies; 100000 by default, 1000000 with --full.
        #[arg(long)]
        policies: Option<usize>,
        /// Use one million policies.
        #[arg(long)]
        full: bool,
        /// Read utilities from a file, one per line, instead of x^2.
        #[arg(long, conflicts_with_all = ["policies", "full"])]
        utilities: Option<PathBuf>,
        /// Comma-separated inverse temperatures.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
              default_value = "0,0.5,1,2,5,10,20")]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        target: f64,
        #[arg(long)]
        max_attempts: Option<u64>,
    },
    /// Root certainty-equivalents of a two-step agent/environment problem over
    /// a grid of agent (alpha) and environment (beta) temperatures.
    #[command(after_help = commands::MAP_COLUMNS)]
    Map {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
              default_value = "-50,-5,-0.5,0,0.5,5,50")]
        alphas: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
              default_value = "-50,-5,-0.5,0,0.5,5,50")]
        betas: Vec<f64>,
        /// Leaf values, actions separated by ';' and outcomes by ','.
        #[arg(long, default_value = "0,1;0.3,0.5")]
        leaves: String,
    },
    /// The two-urn ambiguity experiment: an adversarial urn composition and
    /// a bet between a known and an unknown urn.
    #[command(after_help = commands::ELLSBERG_COLUMNS)]
    Ellsberg {
        #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
        theta_alpha: f64,
        #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
        bet_alpha: f64,
        #[arg(long, default_value_t = brplan_core::CHANCE_ALPHA, allow_hyphen_values = true)]
        draw_alpha: f64,
        #[arg(long, value_enum, default_value_t = Color::Black)]
        winning_color: Color,
        /// Also write the tree as a JSON tree file.
        #[arg(long)]
        tree_out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Color {
    Black,
    White,
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("BRPLAN_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("BRPLAN_THREADS must be a positive integer, got `{v}`"))?;
        anyhow::ensure!(n > 0, "BRPLAN_THREADS must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Problem { file, target, beta } => commands::problem(&parse_problem_file(&file)?, target, beta),
        Command::Solve { file } => commands::solve(&parse_tree_file(&file)?),
        Command::Sample {
            file,
            seed,
            samples,
            target,
            max_attempts,
            allow_mixed_signs,
        } => commands::sample(&parse_tree_file(&file)?, &SampleConfig {
            seed,
            samples,
            target,
            max_attempts: max_attempts.unwrap_or(u64::MAX),
            allow_mixed_signs,
        }),
        Command::Sweep {
            seed,
            samples,
            policies,
            full,
            utilities,
            alphas,
            target,
            max_attempts,
        } => {
            let utility_shape = match utilities {
                Some(path) => {
                    let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
                    UtilityShape::Custom(commands::parse_utilities(&text).with_context(|| format!("in {}", path.display()))?)
                }
                None => UtilityShape::Square,
            };
            commands::sweep(&SweepConfig {
                policy_count: policies.unwrap_or(if full { 1_000_000 } else { 100_000 }),
                utility_shape,
                alpha_grid: alphas,
                runs_per_alpha: samples,
                target,
                seed,
                max_attempts: max_attempts.unwrap_or(u64::MAX),
            })
        }
        Command::Map { alphas, betas, leaves } => commands::map(&MapConfig {
            alphas,
            betas,
            leaves: commands::parse_leaves(&leaves)?,
        }),
        Command::Ellsberg {
            theta_alpha,
            bet_alpha,
            draw_alpha,
            winning_color,
            tree_out,
        } => {
            let cfg = EllsbergConfig {
                theta_alpha,
                bet_alpha,
                draw_alpha,
                winning: match winning_color {
                    Color::Black => EllsbergColor::Black,
                    Color::White => EllsbergColor::White,
                },
            };
            if let Some(path) = tree_out {
                fs::write(&path, tree_to_json(&cfg.tree()?) + "\n")
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            commands::ellsberg(&cfg)
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    configure_threads()?;
    let out = cli.out.clone();
    let csv = run(cli)?;
    match out {
        Some(path) => fs::write(&path, csv).with_context(|| format!("cannot write {}", path.display()))?,
        None => std::io::stdout().lock().write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
