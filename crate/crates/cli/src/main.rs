use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use csm_core::checks;
use csm_core::harness::{
    apply_override, emit_plotdata, load_config, read_results, read_snapshots, run_experiment, summarize,
    write_results, write_snapshots,
};
use csm_core::{CsmError, ScenarioConfig};

/// Connectivity-preserving multi-robot target tracking experiments.
#[derive(Parser)]
#[command(name = "csm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write results.csv and network.csv.
    Run(RunArgs),
    /// Print per-series statistics of a results CSV.
    Summarize {
        /// Results CSV written by `run`.
        input: PathBuf,
    },
    /// Write bars.csv and network.csv for plotting.
    Plotdata {
        /// Results CSV written by `run`.
        input: PathBuf,
        /// Network snapshots written by `run` (default: next to the input).
        #[arg(long)]
        snapshots: Option<PathBuf>,
        #[arg(long, default_value = "plots")]
        out: PathBuf,
    },
    /// Run the randomized oracle checks on small instances.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// small, medium or large; sets team size and target count.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    robots: Option<usize>,
    #[arg(long)]
    targets: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Comma-separated list of proposed, greedy, sgg.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    weight_scheme: Option<String>,
    /// Overrides the file and the CSM_SEED environment variable.
    #[arg(long)]
    seed: Option<u64>,
    /// Extra `key=value` settings, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

/// File, then environment, then flags.
fn resolve_config(args: &RunArgs) -> Result<ScenarioConfig, CsmError> {
    let mut cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(name) = &args.preset {
        let p = ScenarioConfig::preset(name)?;
        cfg.robots = p.robots;
        cfg.targets = p.targets;
    }
    if let Ok(seed) = std::env::var("CSM_SEED") {
        apply_override(&mut cfg, "seed", &seed)?;
    }
    let flags = [
        ("robots", args.robots.map(|v| v.to_string())),
        ("targets", args.targets.map(|v| v.to_string())),
        ("rounds", args.rounds.map(|v| v.to_string())),
        ("epochs", args.epochs.map(|v| v.to_string())),
        ("algorithms", args.algo.clone()),
        ("weight_scheme", args.weight_scheme.clone()),
        ("seed", args.seed.map(|v| v.to_string())),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            apply_override(&mut cfg, key, &v)?;
        }
    }
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CsmError::Config {
                field: kv.clone(),
                message: "expected KEY=VALUE".into(),
            })?;
        apply_override(&mut cfg, k.trim(), v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("cannot open {}", path.display()))?,
    ))
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let cfg = resolve_config(&args)?;
    let result = run_experiment(&cfg)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    let results = args.out.join("results.csv");
    write_results(&result.rows, create(&results)?)?;
    write_snapshots(&result.snapshots, create(&args.out.join("network.csv"))?)?;
    print!("{}", summarize(&result.rows)?);
    eprintln!("wrote {}", results.display());
    Ok(())
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Run(args) => run(args)?,
        Command::Summarize { input } => {
            let rows = read_results(open(&input)?)?;
            print!("{}", summarize(&rows)?);
        }
        Command::Plotdata { input, snapshots, out } => {
            let rows = read_results(open(&input)?)?;
            let summary = summarize(&rows)?;
            let snap_path = snapshots.unwrap_or_else(|| input.with_file_name("network.csv"));
            let snaps = if snap_path.exists() {
                read_snapshots(open(&snap_path)?)?
            } else {
                vec![]
            };
            let files = emit_plotdata(&summary, &snaps, &out)?;
            eprintln!("wrote {} and {}", files.bars.display(), files.network.display());
        }
        Command::Check { seed } => {
            let reports = checks::run_all(seed);
            for r in &reports {
                println!("{r}");
            }
            return Ok(reports.iter().all(|r| r.passed()));
        }
    }
    Ok(true)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<CsmError>() {
        Some(CsmError::Config { .. } | CsmError::Parse { .. }) => 2,
        Some(CsmError::InfeasibleEpoch { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
