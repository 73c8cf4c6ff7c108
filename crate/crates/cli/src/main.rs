use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mvdw_cli::bench::{bench, format_table, scaling_ratio, BenchSettings};
use mvdw_cli::config::resolve;
use mvdw_cli::{emit_report, regenerate, run_point, run_sweep, CliError, CliResult, Overrides, ReportFiles, RunConfig};

#[derive(Parser)]
#[command(name = "mvdw", version, about = "Non-retarded multipolar sphere-substrate dispersion energies and forces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every configured truncation over the gap sweep and write the report files.
    Sweep(ConfigArgs),
    /// Evaluate a single gap and print the rows as CSV.
    Point {
        #[arg(long)]
        z_over_r_point: f64,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Time the eigensolver on blocks of increasing size.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = BenchSettings::default().sizes)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = BenchSettings::default().repeats)]
        repeats: usize,
        /// Include eigenvector accumulation.
        #[arg(long)]
        vectors: bool,
    },
    /// Rebuild the report files from a stored results CSV.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat key-value TOML file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

impl ConfigArgs {
    fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = resolve(self.config.as_deref(), &self.overrides)?;
        cfg.workers = cfg.effective_workers()?;
        Ok(cfg)
    }
}

fn print_files(files: &ReportFiles) {
    for p in [&files.csv, &files.plot, &files.manifest] {
        eprintln!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Sweep(args) => {
            let cfg = args.resolve()?;
            std::fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;
            let partial = ReportFiles::partial_csv(&cfg);
            let outcome = run_sweep(&cfg, Some(&partial))?;
            let files = emit_report(&outcome, &cfg)?;
            std::fs::remove_file(&partial).map_err(|e| CliError::io(&partial, e))?;
            print_files(&files);
            let failed = outcome.table.rows.iter().filter(|r| r.status != mvdw_cli::Status::Ok).count();
            eprintln!("{} rows, {failed} not ok, {:.2} s on {} workers", outcome.table.rows.len(), outcome.total_seconds, outcome.workers);
            Ok(failed == 0)
        }
        Command::Point { z_over_r_point, cfg } => {
            let cfg = cfg.resolve()?;
            let outcome = run_point(&cfg, z_over_r_point)?;
            let mut out = std::io::stdout().lock();
            out.write_all(outcome.table.to_csv_string().as_bytes()).map_err(|e| CliError::io("<stdout>", e))?;
            Ok(outcome.all_ok())
        }
        Command::Bench { sizes, repeats, vectors } => {
            let settings = BenchSettings { sizes, repeats, with_vectors: vectors, ..Default::default() };
            let rows = bench(&settings)?;
            print!("{}", format_table(&rows));
            if let Some(r) = scaling_ratio(&rows, 128, 256) {
                println!("time ratio 256/128: {r:.2} (cubic scaling gives 8)");
            }
            Ok(true)
        }
        Command::Report { input, cfg } => {
            let cfg = cfg.resolve()?;
            let regen = regenerate(&input, &cfg)?;
            print_files(&regen.files);
            eprintln!("largest slope change on recomputation: {:.3e}", regen.max_slope_deviation);
            Ok(regen.table.rows.iter().all(|r| r.status == mvdw_cli::Status::Ok))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
