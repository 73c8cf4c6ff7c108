//! Material response: dielectric functions, the spectral variable u(ω), the
//! substrate contrast factor and the sphere's multipolar polarizabilities.
//!
//! All frequencies are in units of the sphere's plasma frequency ω_p.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Local dielectric response of either the sphere or the substrate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DielectricModel {
    /// Free-electron metal, ε(ω) = 1 − ω_p²/(ω(ω + i/τ)).
    Drude {
        /// ħω_p in eV.
        omega_p_ev: f64,
        /// Dimensionless damping (τω_p)⁻¹.
        inv_tau_wp: f64,
    },
    /// Real, frequency-independent permittivity. `f64::INFINITY` is a perfect conductor.
    Constant { eps: f64 },
}

impl DielectricModel {
    pub fn drude(omega_p_ev: f64, inv_tau_wp: f64) -> Result<Self> {
        if !(omega_p_ev > 0.0 && omega_p_ev.is_finite()) {
            return Err(Error::InvalidParameter(format!("plasma energy must be positive, got {omega_p_ev}")));
        }
        if !(inv_tau_wp >= 0.0 && inv_tau_wp.is_finite()) {
            return Err(Error::InvalidParameter(format!("damping must be non-negative, got {inv_tau_wp}")));
        }
        Ok(Self::Drude { omega_p_ev, inv_tau_wp })
    }

    /// Constant substrate permittivity; must satisfy ε ≥ 1 (or be +∞).
    pub fn constant(eps: f64) -> Result<Self> {
        if eps.is_nan() || eps < 1.0 {
            return Err(Error::InvalidParameter(format!("substrate permittivity must be >= 1, got {eps}")));
        }
        Ok(Self::Constant { eps })
    }

    pub fn perfect_conductor() -> Self {
        Self::Constant { eps: f64::INFINITY }
    }

    /// ε(ω̃) with ω̃ = ω/ω_p.
    pub fn permittivity(&self, omega: f64, lossless: bool) -> Complex64 {
        match *self {
            Self::Drude { inv_tau_wp, .. } => {
                let gamma = if lossless { 0.0 } else { inv_tau_wp };
                Complex64::new(1.0, 0.0) - Complex64::new(1.0, 0.0) / (omega * Complex64::new(omega, gamma))
            }
            Self::Constant { eps } => Complex64::new(eps, 0.0),
        }
    }
}

/// Value of the spectral variable u = 1/(1 − ε).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralValue(pub Complex64);

impl SpectralValue {
    pub fn re(&self) -> f64 {
        self.0.re
    }

    pub fn im(&self) -> f64 {
        self.0.im
    }
}

/// Depolarization factor l/(2l+1) of the isolated sphere's l-th mode.
#[inline]
pub fn depolarization_factor(l: u32) -> f64 {
    let l = l as f64;
    l / (2.0 * l + 1.0)
}

/// Substrate contrast (1 − ε)/(1 + ε); −1 for a perfect conductor.
pub fn contrast_factor(substrate: &DielectricModel) -> Result<f64> {
    match *substrate {
        DielectricModel::Drude { .. } => Err(Error::DispersiveSubstrate),
        DielectricModel::Constant { eps } if eps.is_infinite() => Ok(-1.0),
        DielectricModel::Constant { eps } => Ok((1.0 - eps) / (1.0 + eps)),
    }
}

/// u(ω̃) = ω̃(ω̃ + i(τω_p)⁻¹) for a Drude sphere; the imaginary part is dropped when `lossless`.
pub fn spectral_u(model: &DielectricModel, omega: f64, lossless: bool) -> Result<SpectralValue> {
    let DielectricModel::Drude { inv_tau_wp, .. } = *model else {
        return Err(Error::InvalidParameter("spectral variable requires a Drude model".into()));
    };
    let im = if lossless { 0.0 } else { omega * inv_tau_wp };
    Ok(SpectralValue(Complex64::new(omega * omega, im)))
}

/// Mode frequency (units of ω_p) belonging to a depolarization eigenvalue `n`.
///
/// Lossless: √n. Damped: real part of the root of ω̃² + iγω̃ − n = 0, √(n − γ²/4).
pub fn omega_of_eigenvalue(model: &DielectricModel, n: f64, lossless: bool) -> Result<f64> {
    let DielectricModel::Drude { inv_tau_wp, .. } = *model else {
        return Err(Error::InvalidParameter("mode frequencies require a Drude model".into()));
    };
    if !(n > 0.0) {
        return Err(Error::ModeCollapse(n));
    }
    if lossless {
        return Ok(n.sqrt());
    }
    let threshold = 0.25 * inv_tau_wp * inv_tau_wp;
    if n <= threshold {
        return Err(Error::Overdamped { n, threshold });
    }
    Ok((n - threshold).sqrt())
}

/// α_l written in terms of the permittivity: l(ε − 1)/(l(ε + 1) + 1) · R^{2l+1}.
pub fn polarizability_from_permittivity(l: u32, radius: f64, eps: Complex64) -> Result<Complex64> {
    check_order(l, radius)?;
    let lf = l as f64;
    let volume = radius.powi(2 * l as i32 + 1);
    if eps.re.is_infinite() {
        return Ok(Complex64::new(volume, 0.0));
    }
    let denom = lf * (eps + 1.0) + 1.0;
    if denom.norm() == 0.0 {
        return Err(Error::OnResonance { l, u: depolarization_factor(l) });
    }
    Ok(lf * (eps - 1.0) / denom * volume)
}

/// α_l written in terms of the spectral variable: n_l/(n_l − u) · R^{2l+1}.
pub fn polarizability_from_spectral(l: u32, radius: f64, u: Complex64) -> Result<Complex64> {
    check_order(l, radius)?;
    let n0 = depolarization_factor(l);
    let denom = n0 - u;
    if denom.norm() == 0.0 {
        return Err(Error::OnResonance { l, u: u.re });
    }
    Ok(n0 / denom * radius.powi(2 * l as i32 + 1))
}

/// Multipolar polarizability of a homogeneous Drude sphere at frequency ω̃.
pub fn sphere_polarizability(
    model: &DielectricModel,
    l: u32,
    radius: f64,
    omega: f64,
    lossless: bool,
) -> Result<Complex64> {
    let u = spectral_u(model, omega, lossless)?;
    polarizability_from_spectral(l, radius, u.0)
}

fn check_order(l: u32, radius: f64) -> Result<()> {
    if l == 0 {
        return Err(Error::InvalidParameter("multipole order must be >= 1".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    Ok(())
}
