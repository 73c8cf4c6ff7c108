//! Sphere–image coupling matrix.
//!
//! The sphere's multipoles interact with their images in the substrate, which
//! sit at distance d = 2(z + R) from the sphere centre. Axial symmetry keeps m
//! conserved, so the matrix splits into one real symmetric block per m ≥ 0
//! (the −m block is identical). For orders l, l′ ≥ max(1, m) the entries are
//!
//! ```text
//! H[l][l′] = δ_ll′ l/(2l+1)
//!          + f_c (−1)^{l+l′} √(l l′ / ((2l+1)(2l′+1)))
//!            (l+l′)! / √((l+m)!(l−m)!(l′+m)!(l′−m)!) · x^{l+l′+1}
//! ```
//!
//! with x = R/d. Beyond low orders the factorial ratio is evaluated in log
//! space since it overflows binary64 long before the full entry stops being O(1).

use std::io::{self, Write};

use crate::combinatorics::LnFactorials;
use crate::eigen::DenseSymmetric;
use crate::error::{Error, Result};
use crate::physics::depolarization_factor;

/// Entries whose magnitude falls below this are flushed to zero.
pub const FLUSH_THRESHOLD: f64 = 1e-300;

/// Sphere of radius R with its closest point a gap z above the substrate (both in nm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePlateGeometry {
    radius: f64,
    gap: f64,
}

impl SpherePlateGeometry {
    pub fn new(radius: f64, gap: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
        }
        if !(gap > 0.0) {
            return Err(Error::InvalidParameter(format!("gap must be positive, got {gap}")));
        }
        Ok(Self { radius, gap })
    }

    pub fn from_gap_ratio(radius: f64, z_over_r: f64) -> Result<Self> {
        Self::new(radius, z_over_r * radius)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn gap_ratio(&self) -> f64 {
        self.gap / self.radius
    }

    /// Distance between the sphere centre and the image centre, 2(z + R).
    pub fn image_distance(&self) -> f64 {
        2.0 * (self.gap + self.radius)
    }

    /// x = R / (2(z + R)), always in (0, 1/2).
    pub fn ratio(&self) -> f64 {
        self.radius / self.image_distance()
    }

    pub fn with_gap(&self, gap: f64) -> Result<Self> {
        Self::new(self.radius, gap)
    }
}

/// Orders with l + l′ up to this are evaluated with plain factorials.
const DIRECT_ORDER_LIMIT: u32 = 30;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Coupling part of one entry, given a log-factorial table covering l + l′.
pub(crate) fn coupling_entry(table: &LnFactorials, l: u32, lp: u32, m: u32, x: f64, f_c: f64) -> f64 {
    if f_c == 0.0 {
        return 0.0;
    }
    let (lf, lpf) = (l as f64, lp as f64);
    let mag = if l + lp <= DIRECT_ORDER_LIMIT {
        let ratio = factorial(l + lp)
            / (factorial(l + m) * factorial(l - m) * factorial(lp + m) * factorial(lp - m)).sqrt();
        (lf * lpf / ((2.0 * lf + 1.0) * (2.0 * lpf + 1.0))).sqrt() * ratio * x.powi((l + lp + 1) as i32) * f_c.abs()
    } else {
        let (lu, lpu, mu) = (l as usize, lp as usize, m as usize);
        let ln_mag = table.get(lu + lpu)
            - 0.5 * (table.get(lu + mu) + table.get(lu - mu) + table.get(lpu + mu) + table.get(lpu - mu))
            + 0.5 * (lf * lpf / ((2.0 * lf + 1.0) * (2.0 * lpf + 1.0))).ln()
            + (lf + lpf + 1.0) * x.ln()
            + f_c.abs().ln();
        ln_mag.exp()
    };
    if mag < FLUSH_THRESHOLD {
        return 0.0;
    }
    let parity = if (l + lp) % 2 == 0 { 1.0 } else { -1.0 };
    f_c.signum() * parity * mag
}

/// Coupling coefficient between orders l and l′ in the block of azimuthal order m.
pub fn coupling_coefficient(l: u32, lp: u32, m: i64, x: f64, f_c: f64) -> Result<f64> {
    let m = m.unsigned_abs() as u32;
    if l < m.max(1) || lp < m.max(1) {
        return Err(Error::InvalidParameter(format!("orders ({l}, {lp}) must be >= max(1, |m| = {m})")));
    }
    if !(x > 0.0 && x < 0.5) {
        return Err(Error::InvalidParameter(format!("geometry ratio must lie in (0, 1/2), got {x}")));
    }
    let table = LnFactorials::new((l + lp) as usize);
    Ok(coupling_entry(&table, l, lp, m, x, f_c))
}

/// One m-block of the coupling matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingBlock {
    m: i64,
    l_min: u32,
    l_max: u32,
    f_c: f64,
    x: f64,
    matrix: DenseSymmetric,
    diagonal_coupling: Vec<f64>,
}

impl CouplingBlock {
    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn l_min(&self) -> u32 {
        self.l_min
    }

    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    pub fn size(&self) -> usize {
        self.matrix.size()
    }

    pub fn contrast(&self) -> f64 {
        self.f_c
    }

    pub fn ratio(&self) -> f64 {
        self.x
    }

    pub fn matrix(&self) -> &DenseSymmetric {
        &self.matrix
    }

    /// Multipole order of row `i`.
    pub fn order(&self, i: usize) -> u32 {
        self.l_min + i as u32
    }

    /// Isolated-sphere eigenvalues l/(2l+1), ascending.
    pub fn reference_values(&self) -> Vec<f64> {
        (self.l_min..=self.l_max).map(depolarization_factor).collect()
    }

    /// Geometry-dependent part of entry (i, j), i.e. without the l/(2l+1) diagonal.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diagonal_coupling[i]
        } else {
            self.matrix.get(i, j)
        }
    }

    /// Row-major plain-text dump, 17 significant digits.
    pub fn write_plain_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.size();
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| format!("{:.16e}", self.matrix.get(i, j))).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Builds the block of azimuthal order `m` truncated at `l_max`.
pub fn build_block(m: i64, l_max: u32, geom: &SpherePlateGeometry, f_c: f64) -> Result<CouplingBlock> {
    let table = LnFactorials::new(2 * l_max as usize);
    build_block_with(&table, m, l_max, geom.ratio(), f_c)
}

pub(crate) fn build_block_with(table: &LnFactorials, m: i64, l_max: u32, x: f64, f_c: f64) -> Result<CouplingBlock> {
    let am = m.unsigned_abs() as u32;
    if l_max < 1 || am > l_max {
        return Err(Error::InvalidParameter(format!("block order |m| = {am} must not exceed L = {l_max} >= 1")));
    }
    if table.max() < 2 * l_max as usize {
        return Err(Error::InvalidParameter("log-factorial table too small".into()));
    }
    let l_min = am.max(1);
    let n = (l_max - l_min + 1) as usize;
    let mut matrix = DenseSymmetric::zeros(n);
    let mut diagonal_coupling = vec![0.0; n];
    for i in 0..n {
        let l = l_min + i as u32;
        let c = coupling_entry(table, l, l, am, x, f_c);
        diagonal_coupling[i] = c;
        matrix.set(i, i, depolarization_factor(l) + c);
        for j in 0..i {
            let c = coupling_entry(table, l, l_min + j as u32, am, x, f_c);
            matrix.set(i, j, c);
            matrix.set(j, i, c);
        }
    }
    Ok(CouplingBlock { m, l_min, l_max, f_c, x, matrix, diagonal_coupling })
}

/// Analytic dH/dz of a block (per nm). Each coupling entry scales as
/// x^{l+l′+1} and dx/dz = −x/(z+R), so its derivative is −(l+l′+1)/(z+R) times the entry.
pub fn block_z_derivative(block: &CouplingBlock, geom: &SpherePlateGeometry) -> DenseSymmetric {
    let n = block.size();
    let inv = 1.0 / (geom.gap() + geom.radius());
    let mut d = DenseSymmetric::zeros(n);
    for i in 0..n {
        let l = block.order(i) as f64;
        for j in 0..=i {
            let lp = block.order(j) as f64;
            let v = -(l + lp + 1.0) * inv * block.coupling(i, j);
            d.set(i, j, v);
            d.set(j, i, v);
        }
    }
    d
}
