//! Run configuration: a flat TOML key-value file, overridable from the command line.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use mvdw_core::{contrast_factor, ConvergenceSettings, DielectricModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Environment variable that overrides the configured worker count.
pub const WORKERS_ENV: &str = "MVDW_WORKERS";

/// Substrate permittivity: a real constant, or an ideal conductor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SubstrateRepr", into = "SubstrateRepr")]
pub enum Substrate {
    Constant(f64),
    PerfectConductor,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SubstrateRepr {
    Number(f64),
    Name(String),
}

const PERFECT_CONDUCTOR: &str = "perfect_conductor";

impl TryFrom<SubstrateRepr> for Substrate {
    type Error = String;

    fn try_from(r: SubstrateRepr) -> Result<Self, String> {
        match r {
            SubstrateRepr::Number(eps) => Ok(Self::Constant(eps)),
            SubstrateRepr::Name(s) => s.parse(),
        }
    }
}

impl From<Substrate> for SubstrateRepr {
    fn from(s: Substrate) -> Self {
        match s {
            Substrate::Constant(eps) => Self::Number(eps),
            Substrate::PerfectConductor => Self::Name(PERFECT_CONDUCTOR.into()),
        }
    }
}

impl FromStr for Substrate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == PERFECT_CONDUCTOR {
            return Ok(Self::PerfectConductor);
        }
        s.parse::<f64>()
            .map(Self::Constant)
            .map_err(|_| format!("expected a permittivity or \"{PERFECT_CONDUCTOR}\", got {s:?}"))
    }
}

impl Substrate {
    pub fn model(&self) -> CliResult<DielectricModel> {
        match *self {
            Self::Constant(eps) => DielectricModel::constant(eps).map_err(|e| CliError::Config(e.to_string())),
            Self::PerfectConductor => Ok(DielectricModel::perfect_conductor()),
        }
    }
}

/// How the multipole order is chosen for the `full` truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum LPolicy {
    Fixed,
    Auto,
}

/// Which curves to compute at every gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
pub enum Truncation {
    #[serde(rename = "1")]
    #[value(name = "1")]
    Dipole,
    #[serde(rename = "2")]
    #[value(name = "2")]
    Quadrupole,
    #[serde(rename = "full")]
    #[value(name = "full")]
    Full,
}

impl Truncation {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Dipole => "1",
            Self::Quadrupole => "2",
            Self::Full => "full",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "1" => Some(Self::Dipole),
            "2" => Some(Self::Quadrupole),
            "full" => Some(Self::Full),
            _ => None,
        }
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ForceMethod {
    /// Eigenvalue derivatives (needs eigenvectors).
    Hf,
    /// Central finite difference of the energy at fixed L.
    Fd,
    /// Hellmann–Feynman in the force column, finite difference appended.
    Both,
}

/// Everything a sweep needs. Lengths in nm, energies in eV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub omega_p_ev: f64,
    pub inv_tau_wp: f64,
    /// Required; there is no default substrate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_substrate: Option<Substrate>,
    pub r_nm: f64,
    pub z_over_r_min: f64,
    pub z_over_r_max: f64,
    pub points: usize,
    pub log_spaced: bool,
    /// Explicit gaps; replaces the min/max/points range when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_over_r_list: Option<Vec<f64>>,
    pub l_policy: LPolicy,
    pub l_fixed: u32,
    pub rel_tol: f64,
    pub l_start: u32,
    pub l_step: u32,
    pub l_cap: u32,
    pub truncations: Vec<Truncation>,
    pub force_method: ForceMethod,
    pub h_rel: f64,
    /// Append the energy with Drude damping in the mode frequencies.
    pub baseline_damped: bool,
    /// Append the ideal-conductor Proximity-Theorem force.
    pub baseline_pt_ideal: bool,
    /// Append the Proximity-Theorem force built on the non-retarded plate energy.
    pub baseline_pt_nonretarded: bool,
    /// Append the roughness-corrected ideal PT force with this amplitude.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roughness_amplitude_nm: Option<f64>,
    /// Append a power-law reference energy anchored at the largest gap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_law_exponent: Option<f64>,
    pub output_dir: PathBuf,
    pub output_stem: String,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let conv = ConvergenceSettings::default();
        Self {
            omega_p_ev: 15.80,
            inv_tau_wp: 0.04,
            eps_substrate: None,
            r_nm: 50.0,
            z_over_r_min: 0.01,
            z_over_r_max: 100.0,
            points: 41,
            log_spaced: true,
            z_over_r_list: None,
            l_policy: LPolicy::Auto,
            l_fixed: 64,
            rel_tol: conv.rel_tol,
            l_start: conv.l_start,
            l_step: conv.l_step,
            l_cap: conv.l_cap,
            truncations: vec![Truncation::Dipole, Truncation::Quadrupole, Truncation::Full],
            force_method: ForceMethod::Hf,
            h_rel: 1e-4,
            baseline_damped: false,
            baseline_pt_ideal: false,
            baseline_pt_nonretarded: false,
            roughness_amplitude_nm: None,
            power_law_exponent: None,
            output_dir: PathBuf::from("out"),
            output_stem: "sweep".into(),
            workers: 0,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(self.omega_p_ev > 0.0 && self.omega_p_ev.is_finite()) {
            return bad(format!("omega_p_ev must be positive, got {}", self.omega_p_ev));
        }
        if !(self.inv_tau_wp >= 0.0 && self.inv_tau_wp.is_finite()) {
            return bad(format!("inv_tau_wp must be non-negative, got {}", self.inv_tau_wp));
        }
        if !(self.r_nm > 0.0 && self.r_nm.is_finite()) {
            return bad(format!("r_nm must be positive, got {}", self.r_nm));
        }
        self.substrate()?.model()?;
        self.drude()?;
        match &self.z_over_r_list {
            Some(list) => {
                if let Some(z) = list.iter().find(|z| !(**z > 0.0 && z.is_finite())) {
                    return bad(format!("z_over_r_list entries must be positive, got {z}"));
                }
            }
            None => {
                if self.points < 1 {
                    return bad("points must be at least 1".into());
                }
                if !(self.z_over_r_min > 0.0 && self.z_over_r_max >= self.z_over_r_min && self.z_over_r_max.is_finite()) {
                    return bad(format!(
                        "need 0 < z_over_r_min <= z_over_r_max, got {} and {}",
                        self.z_over_r_min, self.z_over_r_max
                    ));
                }
            }
        }
        if self.l_fixed < 1 {
            return bad("l_fixed must be at least 1".into());
        }
        if !(self.rel_tol > 0.0) {
            return bad(format!("rel_tol must be positive, got {}", self.rel_tol));
        }
        if self.l_start < 1 || self.l_step < 1 || self.l_cap < self.l_start {
            return bad(format!(
                "need 1 <= l_start ({}) <= l_cap ({}) and l_step ({}) >= 1",
                self.l_start, self.l_cap, self.l_step
            ));
        }
        if self.truncations.is_empty() {
            return bad("truncations must not be empty".into());
        }
        for (i, t) in self.truncations.iter().enumerate() {
            if self.truncations[..i].contains(t) {
                return bad(format!("truncation {t} listed twice"));
            }
        }
        if !(self.h_rel > 0.0 && self.h_rel <= 1e-2) {
            return bad(format!("h_rel must lie in (0, 1e-2], got {}", self.h_rel));
        }
        if let Some(a) = self.roughness_amplitude_nm {
            if !(a >= 0.0 && a.is_finite()) {
                return bad(format!("roughness_amplitude_nm must be non-negative, got {a}"));
            }
        }
        if let Some(p) = self.power_law_exponent {
            if !p.is_finite() {
                return bad("power_law_exponent must be finite".into());
            }
        }
        if self.output_stem.is_empty() || self.output_stem.contains(['/', '\\']) {
            return bad(format!("output_stem must be a plain file name, got {:?}", self.output_stem));
        }
        Ok(())
    }

    /// Gap ratios of the sweep, ascending and without duplicates.
    pub fn gap_ratios(&self) -> Vec<f64> {
        let mut z = match &self.z_over_r_list {
            Some(list) => list.clone(),
            None if self.points == 1 => vec![self.z_over_r_min],
            None => {
                let (a, b) = (self.z_over_r_min, self.z_over_r_max);
                let last = (self.points - 1) as f64;
                (0..self.points)
                    .map(|i| {
                        let t = i as f64 / last;
                        if i == 0 {
                            a
                        } else if i + 1 == self.points {
                            b
                        } else if self.log_spaced {
                            (a.ln() + t * (b.ln() - a.ln())).exp()
                        } else {
                            a + t * (b - a)
                        }
                    })
                    .collect()
            }
        };
        z.sort_by(f64::total_cmp);
        z.dedup();
        z
    }

    pub fn contrast(&self) -> CliResult<f64> {
        Ok(contrast_factor(&self.substrate()?.model()?)?)
    }

    pub fn substrate(&self) -> CliResult<Substrate> {
        self.eps_substrate
            .ok_or_else(|| CliError::Config("eps_substrate is required (a permittivity or \"perfect_conductor\")".into()))
    }

    pub fn drude(&self) -> CliResult<DielectricModel> {
        DielectricModel::drude(self.omega_p_ev, self.inv_tau_wp).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn convergence(&self) -> ConvergenceSettings {
        ConvergenceSettings { rel_tol: self.rel_tol, l_start: self.l_start, l_step: self.l_step, l_cap: self.l_cap }
    }

    /// Configured worker count, unless the environment overrides it.
    pub fn effective_workers(&self) -> CliResult<usize> {
        match std::env::var(WORKERS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{WORKERS_ENV} must be a non-negative integer, got {v:?}"))),
            Err(_) => Ok(self.workers),
        }
    }
}

/// Command-line overrides; every flag wins over the file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub omega_p_ev: Option<f64>,
    #[arg(long)]
    pub inv_tau_wp: Option<f64>,
    /// A permittivity, or "perfect_conductor".
    #[arg(long)]
    pub eps_substrate: Option<Substrate>,
    #[arg(long)]
    pub r_nm: Option<f64>,
    #[arg(long)]
    pub z_over_r_min: Option<f64>,
    #[arg(long)]
    pub z_over_r_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub log_spaced: Option<bool>,
    #[arg(long, value_delimiter = ',')]
    pub z_over_r_list: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub l_policy: Option<LPolicy>,
    #[arg(long)]
    pub l_fixed: Option<u32>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub l_start: Option<u32>,
    #[arg(long)]
    pub l_step: Option<u32>,
    #[arg(long)]
    pub l_cap: Option<u32>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub truncations: Option<Vec<Truncation>>,
    #[arg(long, value_enum)]
    pub force_method: Option<ForceMethod>,
    #[arg(long)]
    pub h_rel: Option<f64>,
    #[arg(long)]
    pub baseline_damped: Option<bool>,
    #[arg(long)]
    pub baseline_pt_ideal: Option<bool>,
    #[arg(long)]
    pub baseline_pt_nonretarded: Option<bool>,
    #[arg(long)]
    pub roughness_amplitude_nm: Option<f64>,
    #[arg(long)]
    pub power_law_exponent: Option<f64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub output_stem: Option<String>,
    #[arg(long)]
    pub workers: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($($field:ident),* $(,)?) => {
                $(if let Some(v) = &self.$field { cfg.$field = v.clone(); })*
            };
        }
        set!(
            omega_p_ev, inv_tau_wp, r_nm, z_over_r_min, z_over_r_max, points, log_spaced,
            l_policy, l_fixed, rel_tol, l_start, l_step, l_cap, truncations, force_method, h_rel,
            baseline_damped, baseline_pt_ideal, baseline_pt_nonretarded, output_dir, output_stem, workers,
        );
        if let Some(v) = self.eps_substrate {
            cfg.eps_substrate = Some(v);
        }
        if let Some(v) = &self.z_over_r_list {
            cfg.z_over_r_list = Some(v.clone());
        }
        if let Some(v) = self.roughness_amplitude_nm {
            cfg.roughness_amplitude_nm = Some(v);
        }
        if let Some(v) = self.power_law_exponent {
            cfg.power_law_exponent = Some(v);
        }
    }
}

/// Loads the optional file, applies overrides, and validates.
pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> CliResult<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_is_valid_once_a_substrate_is_given() {
        let err = RunConfig::default().validate().unwrap_err();
        assert!(err.to_string().contains("eps_substrate is required"), "{err}");
        let cfg = RunConfig { eps_substrate: Some(Substrate::Constant(3.0)), ..Default::default() };
        cfg.validate().unwrap();
    }

    #[test]
    fn substrate_forms() {
        let cfg = RunConfig::from_toml_str("eps_substrate = \"perfect_conductor\"").unwrap();
        assert_eq!(cfg.eps_substrate, Some(Substrate::PerfectConductor));
        assert_eq!(cfg.contrast().unwrap(), -1.0);
        let cfg = RunConfig::from_toml_str("eps_substrate = 1.0").unwrap();
        assert_eq!(cfg.contrast().unwrap(), 0.0);
        assert!(RunConfig::from_toml_str("eps_substrate = \"glass\"").is_err());
        assert_eq!("3.5".parse::<Substrate>().unwrap(), Substrate::Constant(3.5));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml_str("radius = 3").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn truncation_labels() {
        let cfg = RunConfig::from_toml_str("truncations = [\"full\", \"1\"]").unwrap();
        assert_eq!(cfg.truncations, vec![Truncation::Full, Truncation::Dipole]);
        for t in [Truncation::Dipole, Truncation::Quadrupole, Truncation::Full] {
            assert_eq!(Truncation::from_label(t.label()), Some(t));
        }
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let cases = [
            "points = 0",
            "l_start = 10\nl_cap = 5",
            "rel_tol = 0.0",
            "z_over_r_list = [1.0, -2.0]",
            "h_rel = 0.5",
            "truncations = [\"1\", \"1\"]",
            "truncations = []",
            "r_nm = 0.0",
            "eps_substrate = -1.0",
        ];
        for case in cases {
            let text = if case.starts_with("eps_substrate") { case.to_string() } else { format!("eps_substrate = 3.0\n{case}") };
            let cfg = RunConfig::from_toml_str(&text).unwrap();
            let err = cfg.validate().unwrap_err();
            assert_eq!(err.exit_code(), 2, "{case}");
        }
    }

    #[test]
    fn overrides_win_over_file() {
        let mut cfg = RunConfig::from_toml_str("r_nm = 10.0\npoints = 3").unwrap();
        let o = Overrides { r_nm: Some(20.0), z_over_r_list: Some(vec![1.0]), ..Default::default() };
        o.apply(&mut cfg);
        assert_eq!(cfg.r_nm, 20.0);
        assert_eq!(cfg.points, 3);
        assert_eq!(cfg.gap_ratios(), vec![1.0]);
    }

    #[test]
    fn log_grid_hits_both_ends() {
        let cfg = RunConfig { z_over_r_min: 0.1, z_over_r_max: 50.0, points: 10, ..Default::default() };
        let z = cfg.gap_ratios();
        assert_eq!(z.len(), 10);
        assert_eq!(z[0], 0.1);
        assert_eq!(z[9], 50.0);
        let r = z[1] / z[0];
        for w in z.windows(2) {
            assert!((w[1] / w[0] / r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn explicit_list_is_sorted() {
        let cfg = RunConfig { z_over_r_list: Some(vec![3.0, 1.0, 2.0, 1.0]), ..Default::default() };
        assert_eq!(cfg.gap_ratios(), vec![1.0, 2.0, 3.0]);
        let empty =
            RunConfig { z_over_r_list: Some(vec![]), eps_substrate: Some(Substrate::Constant(2.0)), ..Default::default() };
        empty.validate().unwrap();
        assert!(empty.gap_ratios().is_empty());
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        (
            (1e-3f64..100.0, 0.0f64..1.0, prop_oneof![Just(Substrate::PerfectConductor), (1.0f64..20.0).prop_map(Substrate::Constant)]),
            (1e-3f64..1e3, 1usize..200, any::<bool>(), proptest::option::of(proptest::collection::vec(1e-3f64..1e3, 0..6))),
            (prop_oneof![Just(LPolicy::Fixed), Just(LPolicy::Auto)], 1u32..3000, 1e-12f64..1.0, 1u32..64),
            (proptest::sample::subsequence(vec![Truncation::Dipole, Truncation::Quadrupole, Truncation::Full], 1..=3),
             prop_oneof![Just(ForceMethod::Hf), Just(ForceMethod::Fd), Just(ForceMethod::Both)],
             proptest::option::of(0.0f64..10.0), proptest::option::of(-6.0f64..-1.0), 0usize..16),
        )
            .prop_map(|((wp, tau, eps), (zmin, points, log, list), (pol, lf, tol, ls), (tr, fm, rough, pl, w))| RunConfig {
                omega_p_ev: wp,
                inv_tau_wp: tau,
                eps_substrate: Some(eps),
                z_over_r_min: zmin,
                z_over_r_max: zmin * 3.0,
                points,
                log_spaced: log,
                z_over_r_list: list,
                l_policy: pol,
                l_fixed: lf,
                rel_tol: tol,
                l_start: ls,
                l_step: ls,
                l_cap: ls + lf,
                truncations: tr,
                force_method: fm,
                roughness_amplitude_nm: rough,
                power_law_exponent: pl,
                workers: w,
                ..Default::default()
            })
    }

    proptest! {
        #[test]
        fn serialization_round_trips(cfg in arb_config()) {
            let text = cfg.to_toml_string();
            let back = RunConfig::from_toml_str(&text).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert!(back.validate().is_ok());
        }
    }
}
