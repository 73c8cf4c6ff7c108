//! Result rows and their CSV form.

use std::io::{Read, Write};
use std::path::Path;

use crate::config::{ForceMethod, Truncation};
use crate::error::{CliError, CliResult};

/// Fixed leading columns of every results file.
pub const CORE_COLUMNS: [&str; 10] = [
    "z_over_R",
    "z_nm",
    "truncation",
    "L_used",
    "energy_hbar_wp",
    "energy_eV",
    "force_eV_per_nm",
    "force_method",
    "slope_local",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    NotConverged,
    ModeCollapse,
    InconsistentForce,
    Failed,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::NotConverged => "not_converged",
            Self::ModeCollapse => "mode_collapse",
            Self::InconsistentForce => "inconsistent_force",
            Self::Failed => "failed",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        [Self::Ok, Self::NotConverged, Self::ModeCollapse, Self::InconsistentForce, Self::Failed]
            .into_iter()
            .find(|v| v.label() == s)
    }
}

/// One (gap, truncation) sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub z_over_r: f64,
    pub z_nm: f64,
    pub truncation: Truncation,
    pub l_used: u32,
    /// Units of ħω_p.
    pub energy: f64,
    pub energy_ev: f64,
    pub force_ev_per_nm: f64,
    /// Route behind `force_ev_per_nm`; never `Both`.
    pub force_method: ForceMethod,
    pub slope_local: Option<f64>,
    pub status: Status,
    /// Values of the optional columns, aligned with [`SweepTable::extra_columns`].
    pub extras: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub extra_columns: Vec<String>,
    pub rows: Vec<SampleRow>,
}

/// Seventeen significant digits, enough to round-trip any f64.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn method_label(m: ForceMethod) -> &'static str {
    match m {
        ForceMethod::Hf => "hf",
        ForceMethod::Fd => "fd",
        ForceMethod::Both => "both",
    }
}

pub(crate) fn record(row: &SampleRow) -> Vec<String> {
    let mut out = vec![
        format_number(row.z_over_r),
        format_number(row.z_nm),
        row.truncation.label().to_string(),
        row.l_used.to_string(),
        format_number(row.energy),
        format_number(row.energy_ev),
        format_number(row.force_ev_per_nm),
        method_label(row.force_method).to_string(),
        row.slope_local.map(format_number).unwrap_or_default(),
        row.status.label().to_string(),
    ];
    out.extend(row.extras.iter().map(|&v| format_number(v)));
    out
}

pub(crate) fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

impl SweepTable {
    pub fn header(extra: &[String]) -> Vec<String> {
        CORE_COLUMNS.iter().map(|s| s.to_string()).chain(extra.iter().cloned()).collect()
    }

    pub fn extra_index(&self, name: &str) -> Option<usize> {
        self.extra_columns.iter().position(|c| c == name)
    }

    /// Rows of one truncation, in stored order.
    pub fn curve(&self, t: Truncation) -> impl Iterator<Item = &SampleRow> {
        self.rows.iter().filter(move |r| r.truncation == t)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut w = csv_writer(w);
        w.write_record(Self::header(&self.extra_columns))?;
        for row in &self.rows {
            w.write_record(record(row))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }

    /// Parses a results file; `origin` only labels errors.
    pub fn read_csv<R: Read>(r: R, origin: &Path) -> CliResult<Self> {
        let bad = |msg: String| CliError::Table { path: origin.to_path_buf(), msg };
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
        if header.len() < CORE_COLUMNS.len() || header.iter().zip(CORE_COLUMNS).any(|(a, b)| a != b) {
            return Err(bad(format!("header must start with {}", CORE_COLUMNS.join(","))));
        }
        let extra_columns: Vec<String> = header.iter().skip(CORE_COLUMNS.len()).map(String::from).collect();
        let mut rows = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let at = |msg: &str| bad(format!("data row {}: {msg}", line + 1));
            let num = |i: usize| rec[i].parse::<f64>().map_err(|_| at(&format!("bad number in {}", header[i].to_string())));
            let truncation = Truncation::from_label(&rec[2]).ok_or_else(|| at("unknown truncation"))?;
            let force_method = match &rec[7] {
                "hf" => ForceMethod::Hf,
                "fd" => ForceMethod::Fd,
                _ => return Err(at("unknown force method")),
            };
            let slope_local = if rec[8].is_empty() { None } else { Some(num(8)?) };
            let status = Status::from_label(&rec[9]).ok_or_else(|| at("unknown status"))?;
            let extras = (CORE_COLUMNS.len()..rec.len()).map(num).collect::<CliResult<Vec<_>>>()?;
            rows.push(SampleRow {
                z_over_r: num(0)?,
                z_nm: num(1)?,
                truncation,
                l_used: rec[3].parse().map_err(|_| at("bad L_used"))?,
                energy: num(4)?,
                energy_ev: num(5)?,
                force_ev_per_nm: num(6)?,
                force_method,
                slope_local,
                status,
                extras,
            });
        }
        Ok(Self { extra_columns, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(z: f64, slope: Option<f64>) -> SampleRow {
        SampleRow {
            z_over_r: z,
            z_nm: 50.0 * z,
            truncation: Truncation::Full,
            l_used: 17,
            energy: -1.0 / 3.0,
            energy_ev: -15.8 / 3.0,
            force_ev_per_nm: -0.1,
            force_method: ForceMethod::Hf,
            slope_local: slope,
            status: Status::NotConverged,
            extras: vec![f64::NAN, 1e-300],
        }
    }

    #[test]
    fn three_rows_give_header_plus_three_lines() {
        let t = SweepTable {
            extra_columns: vec!["a".into(), "b".into()],
            rows: vec![row(1.0, None), row(2.0, Some(-2.5)), row(3.0, None)],
        };
        let text = t.to_csv_string();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("z_over_R,z_nm,truncation,L_used,energy_hbar_wp,energy_eV,force_eV_per_nm,force_method,slope_local,status,a,b\n"));
        assert!(text.contains(",hf,-2.5000000000000000e0,not_converged,NaN,1.0000000000000000e-300\n"));
    }

    #[test]
    fn rejects_foreign_headers() {
        let err = SweepTable::read_csv("x,y\n1,2\n".as_bytes(), Path::new("t.csv")).unwrap_err();
        assert!(matches!(err, CliError::Table { .. }));
    }

    proptest! {
        #[test]
        fn numbers_round_trip_exactly(v in proptest::num::f64::ANY) {
            let back: f64 = format_number(v).parse().unwrap();
            prop_assert!(back.to_bits() == v.to_bits() || (v.is_nan() && back.is_nan()));
        }

        #[test]
        fn table_round_trips(zs in proptest::collection::vec(1e-3f64..1e3, 0..8), s in proptest::option::of(-10.0f64..0.0)) {
            let t = SweepTable {
                extra_columns: vec!["a".into(), "b".into()],
                rows: zs.iter().map(|&z| row(z, s)).collect(),
            };
            let text = t.to_csv_string();
            let back = SweepTable::read_csv(text.as_bytes(), Path::new("t.csv")).unwrap();
            prop_assert_eq!(back.to_csv_string(), text);
        }
    }
}
