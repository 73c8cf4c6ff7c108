//! Eigensolver timing against block size.

use std::time::Instant;

use mvdw_core::{build_block, EigenWorkspace, SpherePlateGeometry};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub size: usize,
    pub median_s: f64,
    pub min_s: f64,
    pub max_s: f64,
    /// (max − min) / median over the repeats.
    pub spread: f64,
    /// Rough rate from a 4n³/3 (values) or 9n³ (with vectors) operation count.
    pub gflops: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSettings {
    pub sizes: Vec<usize>,
    pub repeats: usize,
    pub with_vectors: bool,
    /// Geometry of the benchmarked blocks; small gaps keep them fully coupled.
    pub z_over_r: f64,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self { sizes: vec![1, 32, 64, 128, 256, 512], repeats: 5, with_vectors: false, z_over_r: 0.01 }
    }
}

/// Times the full dense solve (deflation off) of the m = 0 block of each size.
pub fn bench(settings: &BenchSettings) -> CliResult<Vec<BenchRow>> {
    if settings.repeats == 0 || settings.sizes.iter().any(|&s| s == 0) {
        return Err(CliError::Config("bench needs repeats >= 1 and sizes >= 1".into()));
    }
    let geom = SpherePlateGeometry::from_gap_ratio(1.0, settings.z_over_r).map_err(|e| CliError::Config(e.to_string()))?;
    let mut ws = EigenWorkspace::without_deflation();
    let mut rows = Vec::with_capacity(settings.sizes.len());
    for &size in &settings.sizes {
        let block = build_block(0, size as u32, &geom, -1.0)?;
        ws.solve(block.matrix(), settings.with_vectors)?;
        let mut times: Vec<f64> = (0..settings.repeats)
            .map(|_| {
                let t = Instant::now();
                let r = ws.solve(block.matrix(), settings.with_vectors);
                let dt = t.elapsed().as_secs_f64();
                r.map(|_| dt)
            })
            .collect::<Result<_, _>>()?;
        times.sort_by(f64::total_cmp);
        let median = times[times.len() / 2];
        let (min, max) = (times[0], times[times.len() - 1]);
        let n = size as f64;
        let ops = if settings.with_vectors { 9.0 * n.powi(3) } else { 4.0 / 3.0 * n.powi(3) };
        rows.push(BenchRow {
            size,
            median_s: median,
            min_s: min,
            max_s: max,
            spread: if median > 0.0 { (max - min) / median } else { 0.0 },
            gflops: if median > 0.0 { ops / median * 1e-9 } else { 0.0 },
        });
    }
    Ok(rows)
}

/// Median time ratio between two benchmarked sizes.
pub fn scaling_ratio(rows: &[BenchRow], small: usize, large: usize) -> Option<f64> {
    let t = |s| rows.iter().find(|r| r.size == s).map(|r| r.median_s);
    Some(t(large)? / t(small)?)
}

pub fn format_table(rows: &[BenchRow]) -> String {
    let mut s = format!("{:>6} {:>12} {:>12} {:>12} {:>8} {:>8}\n", "size", "median_s", "min_s", "max_s", "spread", "GFlop/s");
    for r in rows {
        s.push_str(&format!(
            "{:>6} {:>12.3e} {:>12.3e} {:>12.3e} {:>8.3} {:>8.2}\n",
            r.size, r.median_s, r.min_s, r.max_s, r.spread, r.gflops
        ));
    }
    s
}
