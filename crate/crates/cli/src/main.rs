use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tableguard_cli::bench::{self, BenchArgs};
use tableguard_cli::commands::{self, CliError, MetricsArgs, ObfuscateArgs};
use tableguard_cli::{load_gazetteer, service, EXIT_IO};
use tableguard_core::tabular::load_table;
use tableguard_core::{DataDictionary, LoadOptions, Policy};

/// Deterministic, policy-driven PII obfuscation for documents and tables.
///
/// Set TABLEGUARD_GAZETTEER to a name-list TSV to replace the bundled
/// gazetteer.
#[derive(Parser)]
#[command(name = "tableguard", version)]
struct Cli {
    /// Machine-readable JSON on standard output.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for table processing (default: bench 1, others all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Obfuscate a document (.txt) or a table (.csv, .jsonl).
    Obfuscate(ObfuscateCmd),
    /// Time table load with and without obfuscation on synthetic data.
    Bench(BenchCmd),
    /// Privacy and utility metrics for an original/obfuscated table pair.
    Metrics(MetricsCmd),
    /// Serve the obfuscated table over read-only HTTP.
    Serve(ServeCmd),
}

#[derive(Args)]
struct ObfuscateCmd {
    #[arg(long)]
    input: PathBuf,
    /// Policy JSON file.
    #[arg(long)]
    policy: PathBuf,
    /// Data dictionary JSON for tables.
    #[arg(long)]
    dictionary: Option<PathBuf>,
    /// Output path; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write the surrogate ledger as JSON lines.
    #[arg(long)]
    export_ledger: Option<PathBuf>,
    /// Override the policy seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BenchCmd {
    /// Comma-separated row counts.
    #[arg(long, value_delimiter = ',', default_values_t = [100usize, 1000, 10000, 100000])]
    rows: Vec<usize>,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    trials: u32,
    /// Generator seed.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Also write the timing table as CSV to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsCmd {
    #[arg(long)]
    original: PathBuf,
    #[arg(long)]
    obfuscated: PathBuf,
    #[arg(long)]
    dictionary: PathBuf,
}

#[derive(Args)]
struct ServeCmd {
    #[arg(long)]
    table: PathBuf,
    #[arg(long)]
    policy: PathBuf,
    #[arg(long)]
    dictionary: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    bind: String,
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(tableguard_core::Error::from)?;
    println!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let threads = cli.threads.map(usize::from);
    match cli.command {
        Command::Obfuscate(c) => {
            let g = load_gazetteer()?;
            let args = ObfuscateArgs {
                input: c.input,
                policy: c.policy,
                dictionary: c.dictionary,
                output: c.output,
                export_ledger: c.export_ledger,
                seed: c.seed,
                threads,
                json: cli.json,
            };
            let outcome = commands::obfuscate(&args, &g)?;
            std::io::stdout()
                .write_all(&outcome.stdout)
                .map_err(|e| tableguard_core::Error::io("<stdout>", e))?;
            eprintln!("{}", outcome.summary);
            if outcome.summary["residuals"].as_u64().unwrap_or(0) > 0 {
                log::warn!("covered PII is still detectable in the output");
            }
            Ok(())
        }
        Command::Bench(c) => {
            if c.rows.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::usage("--rows must be strictly ascending"));
            }
            let args = BenchArgs {
                rows: c.rows,
                trials: c.trials as usize,
                seed: c.seed,
                threads: threads.unwrap_or(1),
            };
            let rows = bench::run(&args)?;
            if let Some(path) = &c.csv {
                std::fs::write(path, bench::render_csv(&rows)).map_err(|e| tableguard_core::Error::io(path, e))?;
            }
            if cli.json {
                print_json(&rows)
            } else {
                print!("{}", bench::render_text(&rows));
                Ok(())
            }
        }
        Command::Metrics(c) => {
            let report = commands::metrics(&MetricsArgs {
                original: c.original,
                obfuscated: c.obfuscated,
                dictionary: c.dictionary,
            })?;
            if cli.json {
                print_json(&report)
            } else {
                print!("{}", commands::render_metrics(&report));
                Ok(())
            }
        }
        Command::Serve(c) => {
            let g = load_gazetteer()?;
            let policy = Policy::load(&c.policy)?;
            let dictionary = c.dictionary.as_deref().map(DataDictionary::load).transpose()?;
            let table = load_table(&c.table, dictionary.as_ref(), &LoadOptions::default())?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError {
                code: EXIT_IO,
                message: format!("starting runtime: {e}"),
            })?;
            runtime.block_on(service::serve(&c.bind, table, policy, g, threads))?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
