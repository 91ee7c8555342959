use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sbpp_lab::commands::SolveStart;
use sbpp_lab::config::parse_pairs;
use sbpp_lab::{commands, CliError, ExperimentConfig};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "sbpp", version, about = "Concentrating solutions of the Schrödinger–Bopp–Podolsky system on a torus")]
struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed for randomly placed seed points (overrides `rng_seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the radial ground state and its limit energy.
    GroundState,
    /// Multistart solves over the ε list.
    Sweep,
    /// One solve from a seed peak or a field dump.
    Solve {
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed_index: usize,
        /// Start from this SBPF dump instead of a peak.
        #[arg(long)]
        init: Option<PathBuf>,
    },
    /// Check the constant solution at every ε.
    ConstantBranch,
    /// Diagnostics of a dumped field.
    ProfileCheck { file: PathBuf },
}

fn load(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut pairs = match &cli.config {
        Some(path) => parse_pairs(
            &std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?,
        )?,
        None => Default::default(),
    };
    pairs.extend(parse_pairs(&cli.set.join("\n"))?);
    if let Some(seed) = cli.seed {
        pairs.insert("rng_seed".into(), seed.to_string());
    }
    let mut cfg = ExperimentConfig::default();
    cfg.apply(&pairs)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn print<T: Serialize>(value: &T) -> Result<(), CliError> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    match &cli.command {
        Command::GroundState => print(&commands::ground_state(&cfg)?),
        Command::Sweep => {
            let s = commands::sweep(&cfg, cli.threads)?;
            print(&s.levels)?;
            match s.first_unconverged() {
                Some(eps) => Err(CliError::Numerical(format!("no seed converged at ε = {eps}"))),
                None => Ok(()),
            }
        }
        Command::Solve {
            epsilon,
            seed_index,
            init,
        } => {
            let start = match init {
                Some(path) => SolveStart::Dump(path.clone()),
                None => SolveStart::Seed(*seed_index),
            };
            print(&commands::solve(&cfg, *epsilon, &start, cli.threads)?)
        }
        Command::ConstantBranch => print(&commands::constant_branch(&cfg, cli.threads)?),
        Command::ProfileCheck { file } => print(&commands::profile_check(&cfg, file)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
