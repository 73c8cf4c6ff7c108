//! Force from the interaction energy, and local power-law exponents.

use crate::eigen::{DenseSymmetric, EigenResult};
use crate::error::{Error, Result};
use crate::spectrum::ModeSpectrum;
use crate::sum::NeumaierSum;

/// One point of an energy/force curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample {
    pub z_over_r: f64,
    pub z_nm: f64,
    pub l_used: u32,
    /// Energy in units of ħω_p.
    pub energy: f64,
    pub energy_ev: f64,
    pub force_ev_per_nm: f64,
    pub slope_local: Option<f64>,
}

/// Central-difference force −[E(z+h) − E(z−h)]/(2h) with h = h_rel·z.
///
/// The caller's `energy` must evaluate both sides at the same truncation. With
/// `expect_attractive`, a positive (repulsive) result is reported as an error.
pub fn force_finite_difference<F>(mut energy: F, z: f64, h_rel: f64, expect_attractive: bool) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(z > 0.0) {
        return Err(Error::InvalidParameter(format!("gap must be positive, got {z}")));
    }
    if !(h_rel > 0.0 && h_rel <= 1e-2) {
        return Err(Error::InvalidParameter(format!("relative step must lie in (0, 1e-2], got {h_rel}")));
    }
    let h = h_rel * z;
    let up = energy(z + h)?;
    let down = energy(z - h)?;
    let force = -(up - down) / (2.0 * h);
    if expect_attractive && force > 0.0 {
        return Err(Error::InconsistentForce { force });
    }
    Ok(force)
}

/// Hellmann–Feynman force −dE/dz in units of ħω_p per nm.
///
/// With E = ½ Σ g √n_ν, dE/dz = ¼ Σ g n_ν^{−1/2} dn_ν/dz.
pub fn force_hellmann_feynman(spectrum: &ModeSpectrum) -> Result<f64> {
    spectrum.validate()?;
    let mut acc = NeumaierSum::new();
    for b in &spectrum.blocks {
        let d = b.derivatives.as_ref().ok_or(Error::MissingVectors)?;
        let block: f64 = b.values.iter().zip(d).map(|(n, dn)| dn / n.sqrt()).collect::<NeumaierSum>().value();
        acc.add(b.degeneracy as f64 * block);
    }
    Ok(-0.25 * acc.value())
}

/// dn_ν/dz = v_νᵀ (dH/dz) v_ν for every eigenpair.
pub fn eigenvalue_derivatives(eigen: &EigenResult, dh: &DenseSymmetric) -> Result<Vec<f64>> {
    if dh.size() != eigen.size() {
        return Err(Error::InvalidParameter("derivative matrix size does not match the eigensystem".into()));
    }
    (0..eigen.size())
        .map(|nu| eigen.vector(nu).map(|v| dh.quadratic_form(v)).ok_or(Error::MissingVectors))
        .collect()
}

/// Centred log-log slope d ln|E| / d ln z at interior samples.
///
/// End points, and points whose neighbours have zero energy, get `None`.
pub fn local_slope(z: &[f64], energy: &[f64]) -> Result<Vec<Option<f64>>> {
    if z.len() != energy.len() {
        return Err(Error::InvalidParameter("abscissa and energy lengths differ".into()));
    }
    if z.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 samples, got {}", z.len())));
    }
    if z.windows(2).any(|w| !(w[0] > 0.0 && w[1] > w[0])) {
        return Err(Error::InvalidParameter("abscissae must be positive and increasing".into()));
    }
    let n = z.len();
    Ok((0..n)
        .map(|i| {
            if i == 0 || i == n - 1 || energy[i - 1] == 0.0 || energy[i + 1] == 0.0 {
                return None;
            }
            let num = energy[i + 1].abs().ln() - energy[i - 1].abs().ln();
            let den = z[i + 1].ln() - z[i - 1].ln();
            Some(num / den)
        })
        .collect())
}
