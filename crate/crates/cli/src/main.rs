use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use czreach_cli::{parse_config, run_experiment, CliError, Experiment, ExperimentConfig};

/// Exact reachability with constrained polynomial zonotopes.
#[derive(Parser, Debug)]
#[command(name = "czreach", version)]
struct Args {
    /// Experiment config (JSON, schema_version 1).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run the bundled config of this experiment, or override the config's experiment.
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    #[arg(long)]
    seed: Option<u64>,
    /// Reduction order: at most K·n generators per set.
    #[arg(long, value_name = "K")]
    reduce: Option<usize>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker cap for the verification suite.
    #[arg(long, env = "CZREACH_THREADS", default_value_t = 4)]
    threads: usize,
}

fn load(args: &Args) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&args.config, args.experiment) {
        (Some(path), _) => parse_config(path)?,
        (None, Some(e)) => ExperimentConfig::from_json(e.bundled())?,
        (None, None) => {
            return Err(CliError::validation(
                "experiment",
                "pass --config or --experiment",
            ))
        }
    };
    if let (Some(_), Some(e)) = (&args.config, args.experiment) {
        cfg.experiment = e;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(k) = args.reduce {
        cfg.reduction_order = Some(k);
    }
    if let Some(dir) = &args.out {
        cfg.output_dir = Some(dir.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &Args) -> Result<(), CliError> {
    let cfg = load(args)?;
    let outcome = run_experiment(&cfg, args.threads)?;
    let dir = cfg
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.experiment.name()));
    outcome.artifacts.write_to(&dir)?;
    print!("{}", outcome.summary);
    println!("artifacts written to {}", dir.display());
    if outcome.passed {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "see {}",
            dir.join("report.txt").display()
        )))
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
