use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vqoe::cli::{self, RunConfig};
use vqoe::pipeline::Exec;

#[derive(Parser)]
#[command(name = "vqoe", version, about = "No-reference video QoE pipeline")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// JSON run config; every key has a default.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set train.epochs=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Worker threads for per-sample work; 1 keeps runs bit-reproducible.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Generate a synthetic labelled dataset
    Synth,
    /// Read and check every manifest item
    Ingest,
    /// Rate, delay and stall frames per item
    Netsim,
    /// Train the 3D patch classifier
    Train,
    /// Patch and majority-vote reports
    Eval,
    /// Weight-snapshot features and 1D aggregator
    Pretrain,
    /// Gnuplot data files from training curves
    Report,
}

fn run(args: Args) -> vqoe::Result<cli::Outcome> {
    let mut overrides = args.overrides;
    if let Some(s) = args.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(d) = &args.out_dir {
        overrides.push(format!("output_dir={}", serde_json::Value::from(d.display().to_string())));
    }
    if let Some(m) = &args.manifest {
        overrides.push(format!("manifest={}", serde_json::Value::from(m.display().to_string())));
    }
    let cfg = match &args.config {
        Some(path) => RunConfig::load(path, &overrides)?,
        None => RunConfig::from_json_with("", &overrides)?,
    };
    let exec = Exec::new(args.threads)?;
    match args.command {
        Command::Synth => cli::cmd_synth(&cfg),
        Command::Ingest => cli::cmd_ingest(&cfg, &exec),
        Command::Netsim => cli::cmd_netsim(&cfg),
        Command::Train => cli::cmd_train(&cfg, &exec),
        Command::Eval => cli::cmd_eval(&cfg, &exec),
        Command::Pretrain => cli::cmd_pretrain(&cfg, &exec),
        Command::Report => cli::cmd_report(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(outcome) => {
            for m in &outcome.messages {
                println!("{m}");
            }
            println!("outputs in {}", outcome.dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
