use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use standardness::harness::{self, ExperimentKind, HarnessError, RunOutput};
use standardness::report::{emit_report, Format};

#[derive(Parser)]
#[command(name = "standardness", version, about = "Reproducible experiments on binary processes with long memory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Memory-decay profile, regime verdict and lower-envelope check.
    Gamma(RunArgs),
    /// Innovation uniformity and independence audit.
    Audit(RunArgs),
    /// Window reconstruction disagreement against the reset-chain bound.
    Reconstruct(RunArgs),
    /// Alpha sequence of the Vershik metric ladder.
    Vershik(RunArgs),
    /// Single-step joint law and generator error of one anchored block.
    Extend(RunArgs),
    /// Multi-block stitched innovation with the pooled audit.
    Stitch(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Pretty,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the config `output` field, else `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; falls back to STANDARDNESS_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    /// Format of the tables echoed to stdout.
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

fn run(kind: ExperimentKind, args: &RunArgs) -> Result<(RunOutput, PathBuf), HarnessError> {
    let mut config = harness::load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let threads = harness::thread_count(args.threads)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| HarnessError::Config(e.to_string()))?;
    let output = pool.install(|| harness::run_experiment(&config, kind))?;
    let dir = args
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    harness::write_outputs(&dir, &output)?;
    Ok((output, dir))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Gamma(a) => (ExperimentKind::Gamma, a),
        Command::Audit(a) => (ExperimentKind::Audit, a),
        Command::Reconstruct(a) => (ExperimentKind::Reconstruct, a),
        Command::Vershik(a) => (ExperimentKind::Vershik, a),
        Command::Extend(a) => (ExperimentKind::Extend, a),
        Command::Stitch(a) => (ExperimentKind::Stitch, a),
    };
    match run(kind, args) {
        Err(e) => {
            eprintln!("standardness: {e}");
            ExitCode::from(2)
        }
        Ok((output, dir)) => {
            let format = match args.format {
                OutputFormat::Csv => Format::Csv,
                OutputFormat::Pretty => Format::Pretty,
            };
            for (name, table) in &output.tables {
                println!("# {name}");
                print!("{}", emit_report(table, format));
            }
            println!("# wrote {} files to {}", output.files.len(), dir.display());
            if output.pass() {
                ExitCode::SUCCESS
            } else {
                for check in output.checks.iter().filter(|c| !c.pass) {
                    eprintln!("standardness: check '{}' failed: {}", check.name, check.failing_rows.join(", "));
                }
                ExitCode::from(1)
            }
        }
    }
}
