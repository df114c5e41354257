//! Command-line front end: generate fingerprint databases, evaluate them
//! with the KNN baseline, and run the trend sweeps.
//!
//! Validation failures exit nonzero with a machine-readable JSON object on
//! stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use riswfl::config::RunConfig;
use riswfl::pipeline::{self, Case};

#[derive(Parser)]
#[command(
    name = "riswfl",
    version,
    about = "RIS-assisted indoor RSS fingerprint database simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a fingerprint database (CSV + metadata sidecar).
    Generate(GenerateArgs),
    /// Evaluate a database file with the KNN baseline.
    Eval(EvalArgs),
    /// Sweep cases, measurement counts, and RIS sizes over several seeds.
    Trends(TrendsArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// TOML configuration file; omitted means all defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config's seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Generation case: A (full), B (no RIS), C (no spatial consistency).
    #[arg(long, default_value = "A")]
    case: String,
    /// Also export the consistency maps as CSV grids with JSON descriptors.
    #[arg(long)]
    emit_maps: bool,
    /// Also export per-measurement RSS radio maps over the survey grid.
    #[arg(long)]
    emit_radiomaps: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Database CSV produced by `generate`.
    #[arg(long)]
    db: PathBuf,
    /// Number of neighbors.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Seed of the train/test shuffle.
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    /// Output directory; defaults to the database's directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrendsArgs {
    /// TOML configuration file; omitted means all defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated seeds, e.g. 1,2,3,4,5.
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u64>,
    /// Number of neighbors for the KNN evaluation.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Survey spacing override for the sweep (meters).
    #[arg(long)]
    spacing_m: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn load_config(path: &Option<PathBuf>, seed: Option<u64>) -> riswfl::Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> riswfl::Result<()> {
    match cli.command {
        Command::Generate(args) => {
            let config = load_config(&args.config, args.seed)?;
            let case: Case = args.case.parse()?;
            let files = pipeline::run_generate(
                &config,
                case,
                &args.out,
                args.emit_maps,
                args.emit_radiomaps,
            )?;
            println!("database: {}", files.database_csv.display());
            println!("metadata: {}", files.metadata_json.display());
            if !files.map_files.is_empty() {
                println!("maps: {} files", files.map_files.len());
            }
            if !files.radiomap_files.is_empty() {
                println!("radio maps: {} files", files.radiomap_files.len());
            }
            Ok(())
        }
        Command::Eval(args) => {
            let out = args.out.clone().unwrap_or_else(|| {
                args.db
                    .parent()
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from("."))
            });
            let report = pipeline::run_eval(&args.db, args.k, args.split_seed, &out)?;
            println!("rmse_m: {:.4}", report.rmse_m);
            println!("test queries: {}", report.test_size);
            println!("report: {}", out.join("eval_report.json").display());
            Ok(())
        }
        Command::Trends(args) => {
            let mut config = load_config(&args.config, None)?;
            if let Some(spacing) = args.spacing_m {
                config.grid.spacing_m = Some(spacing);
            }
            let summary = pipeline::run_trends(&config, &args.seeds, args.k, &args.out)?;
            println!("runs: {}", summary.rows.len());
            println!("tables: {}", args.out.join("trends.md").display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let payload = serde_json::json!({
                "error": err.to_string(),
                "kind": match &err {
                    riswfl::Error::Config(_) => "config",
                    riswfl::Error::Schema(_) => "schema",
                    riswfl::Error::Io(_) => "io",
                    _ => "runtime",
                },
            });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}
