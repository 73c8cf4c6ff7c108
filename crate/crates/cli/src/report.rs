//! Results files: CSV table, gnuplot script and run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{RunConfig, Truncation};
use crate::error::{CliError, CliResult};
use crate::sweep::{extra_columns, finalize, SweepOutcome, COL_PT_IDEAL, COL_PT_NONRETARDED, COL_PT_ROUGH};
use crate::table::{Status, SweepTable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub csv: PathBuf,
    pub plot: PathBuf,
    pub manifest: PathBuf,
}

impl ReportFiles {
    pub fn for_config(cfg: &RunConfig) -> Self {
        let base = |ext: &str| cfg.output_dir.join(format!("{}.{ext}", cfg.output_stem));
        Self { csv: base("csv"), plot: base("gp"), manifest: base("manifest.toml") }
    }

    /// Where rows are streamed while a sweep is still running.
    pub fn partial_csv(cfg: &RunConfig) -> PathBuf {
        cfg.output_dir.join(format!("{}.csv.partial", cfg.output_stem))
    }
}

#[derive(Serialize)]
struct SampleTiming {
    z_over_r: f64,
    truncation: String,
    seconds: f64,
}

#[derive(Serialize)]
struct RunInfo {
    tool: &'static str,
    tool_version: &'static str,
    core_version: &'static str,
    source: String,
    rows: usize,
    failed_rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_seconds: Option<f64>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    run: RunInfo,
    config: &'a RunConfig,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    timing: Vec<SampleTiming>,
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Writes the CSV, plot script and manifest for a finished sweep.
pub fn emit_report(outcome: &SweepOutcome, cfg: &RunConfig) -> CliResult<ReportFiles> {
    let timing = outcome
        .table
        .rows
        .iter()
        .zip(&outcome.sample_seconds)
        .map(|(r, &seconds)| SampleTiming { z_over_r: r.z_over_r, truncation: r.truncation.label().into(), seconds })
        .collect();
    let info = run_info(&outcome.table, "sweep".into(), Some(outcome.workers), Some(outcome.total_seconds));
    write_files(&outcome.table, cfg, Manifest { run: info, config: cfg, timing })
}

fn run_info(table: &SweepTable, source: String, workers: Option<usize>, total_seconds: Option<f64>) -> RunInfo {
    RunInfo {
        tool: "mvdw",
        tool_version: env!("CARGO_PKG_VERSION"),
        core_version: mvdw_core::VERSION,
        source,
        rows: table.rows.len(),
        failed_rows: table.rows.iter().filter(|r| r.status != Status::Ok).count(),
        workers,
        total_seconds,
    }
}

fn write_files(table: &SweepTable, cfg: &RunConfig, manifest: Manifest<'_>) -> CliResult<ReportFiles> {
    let files = ReportFiles::for_config(cfg);
    fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;
    write(&files.csv, &table.to_csv_string())?;
    let csv_name = files.csv.file_name().and_then(|n| n.to_str()).unwrap_or("sweep.csv");
    write(&files.plot, &plot_script(table, csv_name, &cfg.output_stem))?;
    let text = toml::to_string(&manifest).map_err(|e| CliError::Config(e.to_string()))?;
    write(&files.manifest, &text)?;
    Ok(files)
}

/// Outcome of rebuilding a report from a stored table.
#[derive(Debug, Clone)]
pub struct Regenerated {
    pub files: ReportFiles,
    pub table: SweepTable,
    /// Largest |stored − recomputed| over all slope entries.
    pub max_slope_deviation: f64,
}

/// Reloads a results CSV, recomputes the derived columns, and rewrites the report.
pub fn regenerate(input: &Path, cfg: &RunConfig) -> CliResult<Regenerated> {
    let file = fs::File::open(input).map_err(|e| CliError::io(input, e))?;
    let stored = SweepTable::read_csv(file, input)?;
    if stored.extra_columns != extra_columns(cfg) {
        return Err(CliError::Table {
            path: input.to_path_buf(),
            msg: format!(
                "optional columns [{}] do not match the configuration [{}]",
                stored.extra_columns.join(","),
                extra_columns(cfg).join(",")
            ),
        });
    }
    let mut table = stored.clone();
    finalize(&mut table, cfg);
    let mut max_slope_deviation: f64 = 0.0;
    for (a, b) in stored.rows.iter().zip(&table.rows) {
        max_slope_deviation = match (a.slope_local, b.slope_local) {
            (Some(x), Some(y)) => max_slope_deviation.max((x - y).abs()),
            (None, None) => max_slope_deviation,
            _ => f64::INFINITY,
        };
    }
    let info = run_info(&table, input.display().to_string(), None, None);
    let files = write_files(&table, cfg, Manifest { run: info, config: cfg, timing: Vec::new() })?;
    Ok(Regenerated { files, table, max_slope_deviation })
}

/// Gnuplot script drawing |E| and |F| against z/R on log axes, one curve per truncation.
pub fn plot_script(table: &SweepTable, csv_name: &str, stem: &str) -> String {
    let mut truncations: Vec<Truncation> = Vec::new();
    for r in &table.rows {
        if !truncations.contains(&r.truncation) {
            truncations.push(r.truncation);
        }
    }
    let title = |t: Truncation| match t {
        Truncation::Full => "all multipoles".to_string(),
        other => format!("L = {}", other.label()),
    };
    let curve = |t: Truncation, col: usize| {
        format!(
            "  \"{csv_name}\" every ::1 using 1:(strcol(3) eq \"{}\" ? abs(${col}) : 1/0) with linespoints title \"{}\"",
            t.label(),
            title(t)
        )
    };

    let mut s = String::new();
    let _ = writeln!(s, "# Plots {csv_name}; run with: gnuplot {stem}.gp");
    s.push_str("set datafile separator \",\"\nset logscale xy\nset format y \"%.0e\"\nset xlabel \"z/R\"\nset key top right\n");
    s.push_str("set terminal pngcairo size 900,640\n\n");

    let _ = writeln!(s, "set output \"{stem}_energy.png\"\nset ylabel \"|E| (eV)\"");
    let energy: Vec<String> = truncations.iter().map(|&t| curve(t, 6)).collect();
    let _ = writeln!(s, "plot \\\n{}\n", energy.join(", \\\n"));

    let _ = writeln!(s, "set output \"{stem}_force.png\"\nset ylabel \"|F| (eV/nm)\"");
    let mut force: Vec<String> = truncations.iter().map(|&t| curve(t, 7)).collect();
    let first = truncations.first().copied();
    for (name, label) in [
        (COL_PT_IDEAL, "PT, ideal conductors"),
        (COL_PT_NONRETARDED, "PT, non-retarded plates"),
        (COL_PT_ROUGH, "PT with roughness"),
    ] {
        if let (Some(i), Some(t)) = (table.extra_index(name), first) {
            let col = crate::table::CORE_COLUMNS.len() + i + 1;
            force.push(format!(
                "  \"{csv_name}\" every ::1 using 1:(strcol(3) eq \"{}\" ? abs(${col}) : 1/0) with lines dashtype 2 title \"{label}\"",
                t.label()
            ));
        }
    }
    let _ = writeln!(s, "plot \\\n{}\n", force.join(", \\\n"));

    s.push_str("set output \"");
    s.push_str(stem);
    s.push_str("_slope.png\"\nunset logscale y\nset format y \"%g\"\nset ylabel \"d ln|E| / d ln(z/R)\"\n");
    let slope: Vec<String> = truncations.iter().map(|&t| curve(t, 9).replace("abs($9)", "$9")).collect();
    let _ = writeln!(s, "plot \\\n{}", slope.join(", \\\n"));
    s
}
