use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hypercyclic_lab::commands::{self, parse_complex_list};
use hypercyclic_lab::pipeline::run_pipeline;
use hypercyclic_lab::{LabError, PipelineConfig};

#[derive(Parser)]
#[command(name = "hypercyclic", version, about = "Finite-truncation laboratory for rank-one perturbations of unitary operators")]
struct Cli {
    /// Seed for every randomized check.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Problem {
    /// JSON config; explicit flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    grid_size: Option<usize>,
    #[arg(long)]
    generation: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a Cantor-type set and report its entropy.
    GenSet(Problem),
    /// Run every stage and write one report per stage plus summary.json.
    Pipeline(Problem),
    /// Clark measures of a finite Blaschke product.
    Clark {
        /// Comma-separated zeros, e.g. `0,0.5-0.2i`.
        #[arg(long, allow_hyphen_values = true)]
        zeros: String,
        /// Comma-separated unimodular alphas.
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        alpha: String,
    },
    /// Kernel continuity table with the unchecked Gram matrix.
    Continuity(Problem),
    /// Spectrum against the set with the unchecked Gram matrix.
    Spectrum(Problem),
}

fn load(problem: &Problem, seed: Option<u64>) -> Result<PipelineConfig, LabError> {
    let mut config = match &problem.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| LabError::Io { path: path.clone(), source })?;
            PipelineConfig::from_json(&text).map_err(LabError::Usage)?
        }
        None => PipelineConfig::default(),
    };
    if let Some(r) = problem.ratio {
        config.set.ratio = r;
    }
    if let Some(d) = problem.depth {
        config.set.depth = d;
        if problem.generation.is_none() && config.nodes.angles.is_none() {
            config.nodes.generation = config.nodes.generation.min(d.max(1));
        }
    }
    if let Some(p) = problem.p {
        config.weight.p = p;
    }
    if let Some(n) = problem.grid_size {
        config.weight.grid_size = n;
    }
    if let Some(g) = problem.generation {
        config.nodes.generation = g;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<Vec<String>, LabError> {
    let out_flag = cli.out.clone();
    let out_of = |config: &PipelineConfig| out_flag.clone().or(config.out.clone()).unwrap_or_else(|| "out".into());
    match &cli.command {
        Command::GenSet(problem) => {
            let config = load(problem, cli.seed)?;
            // Only the set parameters matter here.
            let s = &config.set;
            if !(s.ratio > 0.0 && s.ratio < 1.0) {
                return Err(LabError::Usage(format!("ratio = {} must lie in (0, 1)", s.ratio)));
            }
            commands::gen_set(&config, &out_of(&config))
        }
        Command::Pipeline(problem) => {
            let config = load(problem, cli.seed)?;
            let out = out_of(&config);
            let summary = run_pipeline(&config, &out)?;
            Ok(vec![format!("{} checks passed; reports in {}", summary.checks.len(), out.display())])
        }
        Command::Clark { zeros, alpha } => {
            let zeros = parse_complex_list(zeros).map_err(LabError::Usage)?;
            let alphas = parse_complex_list(alpha).map_err(LabError::Usage)?;
            commands::clark(&zeros, &alphas, cli.seed.unwrap_or(0), &out_flag.clone().unwrap_or_else(|| "out".into()))
        }
        Command::Continuity(problem) => {
            let config = load(problem, cli.seed)?;
            commands::continuity(&config, &out_of(&config))
        }
        Command::Spectrum(problem) => {
            let config = load(problem, cli.seed)?;
            commands::spectrum(&config, &out_of(&config))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
