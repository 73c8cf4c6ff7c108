use std::fs;
use std::path::Path;
use std::process::Command;

use mvdw_cli::{SweepTable, Truncation};

fn mvdw() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mvdw"));
    c.env_remove("MVDW_WORKERS");
    c
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("run.toml");
    let out = dir.join("out").display().to_string();
    fs::write(&p, format!("output_dir = {out:?}\neps_substrate = 3.13\n{body}")).unwrap();
    p
}

#[test]
fn empty_sweep_succeeds_with_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "z_over_r_list = []\n");
    let out = mvdw().args(["sweep", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(!dir.path().join("out/sweep.csv.partial").exists());
    assert!(dir.path().join("out/sweep.gp").exists());
    assert!(dir.path().join("out/sweep.manifest.toml").exists());
}

#[test]
fn invalid_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "points = 0\n");
    let out = mvdw().args(["sweep", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let cfg = write_config(dir.path(), "no_such_key = 1\n");
    let out = mvdw().args(["sweep", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = mvdw().args(["sweep", "--l-cap", "not-a-number"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = mvdw()
        .env("MVDW_WORKERS", "many")
        .args(["point", "--z-over-r-point", "1", "--eps-substrate", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_substrate_is_a_configuration_error() {
    let out = mvdw().args(["point", "--z-over-r-point", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eps_substrate"));
}

#[test]
fn unconverged_samples_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "z_over_r_list = [0.05]\ntruncations = [\"full\"]\nrel_tol = 1e-12\nl_start = 2\nl_step = 2\nl_cap = 4\n",
    );
    let out = mvdw().args(["sweep", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let csv = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",not_converged"));
}

#[test]
fn point_dipole_matches_closed_form() {
    let out = mvdw()
        .args(["point", "--z-over-r-point", "10", "--truncations", "1", "--eps-substrate", "perfect_conductor"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = SweepTable::read_csv(out.stdout.as_slice(), Path::new("<stdout>")).unwrap();
    assert_eq!(table.rows.len(), 1);
    let row = &table.rows[0];
    assert_eq!(row.truncation, Truncation::Dipole);
    assert_eq!(row.l_used, 1);
    let x: f64 = 1.0 / 22.0;
    let third = 1.0_f64 / 3.0;
    let exact = 0.5
        * ((third - 2.0 / 3.0 * x.powi(3)).sqrt() - third.sqrt() + 2.0 * ((third - third * x.powi(3)).sqrt() - third.sqrt()));
    assert!(((row.energy - exact) / exact).abs() < 1e-12, "{} vs {exact}", row.energy);
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "r_nm = 10.0\ntruncations = [\"1\"]\n");
    let out = mvdw()
        .args(["point", "--z-over-r-point", "2", "--r-nm", "25", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    let table = SweepTable::read_csv(out.stdout.as_slice(), Path::new("<stdout>")).unwrap();
    assert_eq!(table.rows[0].z_nm, 50.0);
}

#[test]
fn report_rebuilds_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "z_over_r_min = 0.5\nz_over_r_max = 8.0\npoints = 5\nl_policy = \"fixed\"\nl_fixed = 6\nbaseline_damped = true\n",
    );
    let out = mvdw().args(["sweep", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let original = fs::read(dir.path().join("out/sweep.csv")).unwrap();
    let plot = fs::read(dir.path().join("out/sweep.gp")).unwrap();
    let out = mvdw()
        .args(["report", "--input"])
        .arg(dir.path().join("out/sweep.csv"))
        .args(["--output-stem", "again", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read(dir.path().join("out/again.csv")).unwrap(), original);
    let again_plot = String::from_utf8(fs::read(dir.path().join("out/again.gp")).unwrap()).unwrap();
    assert_eq!(again_plot.replace("again", "sweep").into_bytes(), plot);
    let table = SweepTable::read_csv(original.as_slice(), Path::new("sweep.csv")).unwrap();
    assert_eq!(table.rows.len(), 15);
    assert_eq!(table.extra_columns, vec!["energy_damped_hbar_wp"]);
}

#[test]
fn bench_reports_every_size() {
    let out = mvdw().args(["bench", "--sizes", "1,16,32", "--repeats", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
}
