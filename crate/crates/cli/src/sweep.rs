//! Sweep orchestration: one row per (truncation, gap), evaluated on a worker
//! pool and assembled in a fixed order.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::sync::mpsc;
use std::time::Instant;

use mvdw_core::baselines::{
    plate_plate_nonretarded_energy, power_law_reference, pt_force_perfect_conductor, pt_force_sphere_plate,
    roughness_multiplier,
};
use mvdw_core::spectrum::energy_at;
use mvdw_core::units::hbar_wp_to_ev;
use mvdw_core::{
    converge_l, damped_interaction_energy, force_finite_difference, force_hellmann_feynman, interaction_energy,
    local_slope, solve_spectrum_with, DielectricModel, Error as CoreError, SpherePlateGeometry,
};
use rayon::prelude::*;

use crate::config::{ForceMethod, LPolicy, RunConfig, Truncation};
use crate::error::{CliError, CliResult};
use crate::table::{csv_writer, record, SampleRow, Status, SweepTable};

pub const COL_FORCE_FD: &str = "force_fd_eV_per_nm";
pub const COL_DAMPED: &str = "energy_damped_hbar_wp";
pub const COL_PT_IDEAL: &str = "pt_ideal_force_eV_per_nm";
pub const COL_PT_NONRETARDED: &str = "pt_nonretarded_force_eV_per_nm";
pub const COL_PT_ROUGH: &str = "pt_rough_force_eV_per_nm";
pub const COL_POWER_LAW: &str = "power_law_ref_hbar_wp";

/// Optional columns enabled by `cfg`, in their fixed order.
pub fn extra_columns(cfg: &RunConfig) -> Vec<String> {
    let mut cols = Vec::new();
    if cfg.force_method == ForceMethod::Both {
        cols.push(COL_FORCE_FD);
    }
    if cfg.baseline_damped {
        cols.push(COL_DAMPED);
    }
    if cfg.baseline_pt_ideal {
        cols.push(COL_PT_IDEAL);
    }
    if cfg.baseline_pt_nonretarded {
        cols.push(COL_PT_NONRETARDED);
    }
    if cfg.roughness_amplitude_nm.is_some() {
        cols.push(COL_PT_ROUGH);
    }
    if cfg.power_law_exponent.is_some() {
        cols.push(COL_POWER_LAW);
    }
    cols.into_iter().map(String::from).collect()
}

/// Completed sweep with per-sample wall times (same order as the rows).
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub table: SweepTable,
    pub sample_seconds: Vec<f64>,
    pub total_seconds: f64,
    pub workers: usize,
}

impl SweepOutcome {
    pub fn all_ok(&self) -> bool {
        self.table.rows.iter().all(|r| r.status == Status::Ok)
    }
}

struct Inputs<'a> {
    cfg: &'a RunConfig,
    f_c: f64,
    drude: DielectricModel,
    columns: Vec<String>,
}

/// Runs every (truncation, gap) sample. Completed rows are appended to
/// `partial` as they finish, so an interrupted run keeps its finished work.
pub fn run_sweep(cfg: &RunConfig, partial: Option<&Path>) -> CliResult<SweepOutcome> {
    cfg.validate()?;
    let inputs = Inputs { cfg, f_c: cfg.contrast()?, drude: cfg.drude()?, columns: extra_columns(cfg) };
    let gaps = cfg.gap_ratios();
    let tasks: Vec<(Truncation, f64)> =
        cfg.truncations.iter().flat_map(|&t| gaps.iter().map(move |&z| (t, z))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let workers = pool.current_num_threads();

    let started = Instant::now();
    let (results, flushed) = std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<SampleRow>();
        let writer = match partial {
            Some(path) => {
                let header = SweepTable::header(&inputs.columns);
                Some(scope.spawn(move || write_partial(path, &header, rx)))
            }
            None => {
                drop(rx);
                None
            }
        };
        let results: Vec<(SampleRow, f64)> = pool.install(|| {
            tasks
                .par_iter()
                .map_with(tx, |tx, &(t, z)| {
                    let t0 = Instant::now();
                    let row = evaluate(&inputs, t, z);
                    // The writer may have stopped on an I/O error; that is reported below.
                    let _ = tx.send(row.clone());
                    (row, t0.elapsed().as_secs_f64())
                })
                .collect()
        });
        let flushed = writer.map(|w| w.join().expect("partial writer panicked")).unwrap_or(Ok(()));
        (results, flushed)
    });
    flushed?;

    let (rows, sample_seconds): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let mut table = SweepTable { extra_columns: inputs.columns, rows };
    finalize(&mut table, cfg);
    Ok(SweepOutcome { table, sample_seconds, total_seconds: started.elapsed().as_secs_f64(), workers })
}

/// Evaluates all truncations at a single gap.
pub fn run_point(cfg: &RunConfig, z_over_r: f64) -> CliResult<SweepOutcome> {
    let cfg = RunConfig { z_over_r_list: Some(vec![z_over_r]), ..cfg.clone() };
    run_sweep(&cfg, None)
}

fn write_partial(path: &Path, header: &[String], rx: mpsc::Receiver<SampleRow>) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::io(path, e);
    let mut w = csv_writer(BufWriter::new(File::create(path).map_err(io)?));
    w.write_record(header).map_err(|e| CliError::io(path, e.into()))?;
    w.flush().map_err(io)?;
    for row in rx {
        w.write_record(record(&row)).map_err(|e| CliError::io(path, e.into()))?;
        w.flush().map_err(io)?;
    }
    Ok(())
}

/// Fills the columns that depend on neighbouring rows: local slopes and the
/// anchored power-law reference. Rows must already be grouped by truncation
/// with ascending gaps.
pub fn finalize(table: &mut SweepTable, cfg: &RunConfig) {
    let power = table.extra_index(COL_POWER_LAW);
    let mut start = 0;
    while start < table.rows.len() {
        let t = table.rows[start].truncation;
        let end = start + table.rows[start..].iter().take_while(|r| r.truncation == t).count();
        let group = &mut table.rows[start..end];
        let z: Vec<f64> = group.iter().map(|r| r.z_over_r).collect();
        let e: Vec<f64> = group.iter().map(|r| r.energy).collect();
        let slopes = local_slope(&z, &e).unwrap_or_else(|_| vec![None; group.len()]);
        for (row, s) in group.iter_mut().zip(slopes) {
            row.slope_local = s.filter(|v| v.is_finite());
        }
        if let (Some(col), Some(p)) = (power, cfg.power_law_exponent) {
            let anchor = group.iter().rev().find(|r| r.energy.is_finite() && r.energy != 0.0);
            let law = anchor.and_then(|a| power_law_reference(p, a.z_over_r, a.energy).ok());
            for row in group.iter_mut() {
                row.extras[col] = law.map_or(f64::NAN, |l| l.eval(row.z_over_r));
            }
        }
        start = end;
    }
}

fn status_of(err: &CoreError) -> Status {
    match err {
        CoreError::ModeCollapse(_) | CoreError::EigenvalueOutOfRange(_) | CoreError::Overdamped { .. } => {
            Status::ModeCollapse
        }
        CoreError::InconsistentForce { .. } => Status::InconsistentForce,
        _ => Status::Failed,
    }
}

fn evaluate(inp: &Inputs<'_>, truncation: Truncation, z_over_r: f64) -> SampleRow {
    let cfg = inp.cfg;
    let z_nm = z_over_r * cfg.r_nm;
    let mut row = SampleRow {
        z_over_r,
        z_nm,
        truncation,
        l_used: 0,
        energy: f64::NAN,
        energy_ev: f64::NAN,
        force_ev_per_nm: f64::NAN,
        force_method: if cfg.force_method == ForceMethod::Fd { ForceMethod::Fd } else { ForceMethod::Hf },
        slope_local: None,
        status: Status::Ok,
        extras: vec![f64::NAN; inp.columns.len()],
    };
    if let Err(e) = fill(inp, &mut row) {
        row.status = status_of(&e);
        if let CoreError::InconsistentForce { force } = e {
            row.force_ev_per_nm = hbar_wp_to_ev(force, cfg.omega_p_ev);
        }
    }
    row
}

fn fill(inp: &Inputs<'_>, row: &mut SampleRow) -> Result<(), CoreError> {
    let cfg = inp.cfg;
    let geom = SpherePlateGeometry::from_gap_ratio(cfg.r_nm, row.z_over_r)?;
    let want_hf = cfg.force_method != ForceMethod::Fd;
    let want_fd = cfg.force_method != ForceMethod::Hf;
    let to_ev = |v: f64| hbar_wp_to_ev(v, cfg.omega_p_ev);

    // Gap-only baselines come first so they survive a failed spectrum.
    for (i, name) in inp.columns.iter().enumerate() {
        row.extras[i] = match name.as_str() {
            COL_PT_IDEAL => pt_force_perfect_conductor(row.z_nm, cfg.r_nm),
            COL_PT_NONRETARDED => {
                let plate = plate_plate_nonretarded_energy(row.z_nm, cfg.omega_p_ev)?;
                pt_force_sphere_plate(row.z_nm, cfg.r_nm, |_| plate)?
            }
            COL_PT_ROUGH => {
                let amplitude = cfg.roughness_amplitude_nm.unwrap_or(0.0);
                pt_force_perfect_conductor(row.z_nm, cfg.r_nm) * roughness_multiplier(row.z_nm, amplitude)?
            }
            _ => continue,
        };
    }

    let (spectrum, converged) = match (row.truncation, cfg.l_policy) {
        (Truncation::Dipole, _) => (solve_spectrum_with(&geom, inp.f_c, 1, want_hf)?, true),
        (Truncation::Quadrupole, _) => (solve_spectrum_with(&geom, inp.f_c, 2, want_hf)?, true),
        (Truncation::Full, LPolicy::Fixed) => (solve_spectrum_with(&geom, inp.f_c, cfg.l_fixed, want_hf)?, true),
        (Truncation::Full, LPolicy::Auto) => {
            // The ladder only needs eigenvalues; vectors are paid for once, at the final order.
            let out = converge_l(&geom, inp.f_c, &cfg.convergence(), false)?;
            let spectrum =
                if want_hf { solve_spectrum_with(&geom, inp.f_c, out.l_used, true)? } else { out.spectrum };
            (spectrum, out.converged)
        }
    };
    row.l_used = spectrum.l_max;
    row.energy = interaction_energy(&spectrum)?;
    row.energy_ev = to_ev(row.energy);

    let fd = if want_fd {
        let l = spectrum.l_max;
        let f = force_finite_difference(
            |z| energy_at(&geom.with_gap(z)?, inp.f_c, l),
            geom.gap(),
            cfg.h_rel,
            inp.f_c < 0.0,
        )?;
        Some(to_ev(f))
    } else {
        None
    };
    row.force_ev_per_nm = if want_hf { to_ev(force_hellmann_feynman(&spectrum)?) } else { fd.unwrap_or(f64::NAN) };

    for (i, name) in inp.columns.iter().enumerate() {
        match name.as_str() {
            COL_FORCE_FD => row.extras[i] = fd.unwrap_or(f64::NAN),
            COL_DAMPED => row.extras[i] = damped_interaction_energy(&spectrum, &inp.drude)?,
            _ => {}
        }
    }
    if !converged {
        row.status = Status::NotConverged;
    }
    Ok(())
}
