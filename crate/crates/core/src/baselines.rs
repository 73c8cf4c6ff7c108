//! Comparison formulas: the ideal Casimir plate energy, Proximity-Theorem
//! forces, the surface-roughness correction, a non-retarded plate–plate energy
//! for Drude half-spaces, and anchored power-law reference curves.
//!
//! Lengths in nm, energies in eV.

use std::f64::consts::PI;

use quadrature::integrate;

use crate::error::{Error, Result};
use crate::units::HBAR_C_EV_NM;

/// Ideal-conductor Casimir energy per unit area, −π²ħc/(720 z³), in eV/nm².
pub fn casimir_plate_energy(z: f64) -> f64 {
    -PI * PI * HBAR_C_EV_NM / (720.0 * z.powi(3))
}

/// Proximity-Theorem force between two spheres, 2π R₁R₂/(R₁+R₂) · V(z).
pub fn pt_force_two_spheres<F: Fn(f64) -> f64>(z: f64, r1: f64, r2: f64, plate_energy: F) -> Result<f64> {
    if !(r1 > 0.0 && r2 > 0.0) {
        return Err(Error::InvalidParameter(format!("radii must be positive, got {r1}, {r2}")));
    }
    let reduced = if r2.is_infinite() { r1 } else { r1 * r2 / (r1 + r2) };
    Ok(2.0 * PI * reduced * plate_energy(z))
}

/// Proximity-Theorem force between a sphere and a plate, 2πR · V(z).
pub fn pt_force_sphere_plate<F: Fn(f64) -> f64>(z: f64, radius: f64, plate_energy: F) -> Result<f64> {
    pt_force_two_spheres(z, radius, f64::INFINITY, plate_energy)
}

/// Sphere–plate force for perfect conductors, −π³ħcR/(360 z³), in eV/nm.
pub fn pt_force_perfect_conductor(z: f64, radius: f64) -> f64 {
    -PI.powi(3) * HBAR_C_EV_NM * radius / (360.0 * z.powi(3))
}

/// Roughness enhancement 1 + 6(A_r/z)² + 15(A_r/z)⁴.
pub fn roughness_multiplier(z: f64, amplitude: f64) -> Result<f64> {
    if !(z > 0.0) || !(amplitude >= 0.0) {
        return Err(Error::InvalidParameter(format!("need z > 0 and A_r >= 0, got {z}, {amplitude}")));
    }
    let r2 = (amplitude / z).powi(2);
    Ok(1.0 + 6.0 * r2 + 15.0 * r2 * r2)
}

const QUAD_TOL: f64 = 1e-14;
/// Beyond this reduced wavevector kz the integrands are below e⁻⁸⁰.
const K_CUTOFF: f64 = 40.0;

fn checked(o: quadrature::Output, tol: f64) -> Result<f64> {
    if !o.integral.is_finite() || o.error_estimate > tol {
        return Err(Error::Quadrature { estimate: o.integral, error: o.error_estimate });
    }
    Ok(o.integral)
}

fn integrate_pieces<F: Fn(f64) -> f64 + Copy>(f: F, breaks: &[f64], tol: f64) -> Result<f64> {
    breaks.windows(2).map(|w| checked(integrate(f, w[0], w[1], tol), 1e3 * tol)).sum()
}

/// Dimensionless plasmon-sum integral
/// ∫₀^∞ t [√((1+e^{−t})/2) + √((1−e^{−t})/2) − √2] dt.
fn plasmon_sum_integral() -> Result<f64> {
    let f = |t: f64| {
        let q = (-t).exp();
        let one_minus = -(-t).exp_m1();
        t * (((1.0 + q) / 2.0).sqrt() + (one_minus / 2.0).sqrt() - std::f64::consts::SQRT_2)
    };
    integrate_pieces(f, &[0.0, 0.5, 2.0, 8.0, K_CUTOFF], QUAD_TOL)
}

/// Dimensionless imaginary-frequency integral
/// ∫₀^∞ ds ∫₀^∞ t ln(1 − r(s)² e^{−2t}) dt with r(s) = 1/(1 + 2s²).
fn imaginary_frequency_integral() -> Result<f64> {
    let inner = |a: f64| -> Result<f64> {
        let g = move |t: f64| t * (-a * (-2.0 * t).exp()).ln_1p();
        integrate_pieces(g, &[0.0, 0.5, 2.0, 8.0, K_CUTOFF], QUAD_TOL)
    };
    // s = tan θ maps [0, ∞) onto [0, π/2).
    let outer = |theta: f64| -> Result<f64> {
        let s = theta.tan();
        let c = theta.cos();
        if c == 0.0 {
            return Ok(0.0);
        }
        let r = 1.0 / (1.0 + 2.0 * s * s);
        Ok(inner(r * r)? / (c * c))
    };
    let failure = std::cell::Cell::new(None);
    let f = |theta: f64| match outer(theta) {
        Ok(v) => v,
        Err(e) => {
            failure.set(Some(e));
            0.0
        }
    };
    let mut total = 0.0;
    for w in [0.0, 0.3, 0.8, PI / 2.0].windows(2) {
        total += checked(integrate(f, w[0], w[1], QUAD_TOL), 1e-11)?;
    }
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(total)
}

fn check_plate_args(z: f64, omega_p_ev: f64) -> Result<()> {
    if !(z > 0.0) || !(omega_p_ev > 0.0) {
        return Err(Error::InvalidParameter(format!("need z > 0 and ħω_p > 0, got {z}, {omega_p_ev}")));
    }
    Ok(())
}

/// Non-retarded energy per area of two Drude half-spaces from the zero-point
/// shift of the coupled surface plasmons ω±(k) = ω_p √((1 ± e^{−kz})/2), in eV/nm².
pub fn plate_plate_energy_plasmon_sum(z: f64, omega_p_ev: f64) -> Result<f64> {
    check_plate_args(z, omega_p_ev)?;
    Ok(omega_p_ev * plasmon_sum_integral()? / (4.0 * PI * z * z))
}

/// The same energy from the non-retarded imaginary-frequency formula
/// (ħ/2π) ∫dξ ∫d²k/(2π)² ln(1 − r(iξ)² e^{−2kz}), in eV/nm².
pub fn plate_plate_energy_imaginary_frequency(z: f64, omega_p_ev: f64) -> Result<f64> {
    check_plate_args(z, omega_p_ev)?;
    Ok(omega_p_ev * imaginary_frequency_integral()? / (4.0 * PI * PI * z * z))
}

/// Non-retarded plate–plate energy per area; both formulations are evaluated
/// and must agree to 1e-8 relative.
pub fn plate_plate_nonretarded_energy(z: f64, omega_p_ev: f64) -> Result<f64> {
    let a = plate_plate_energy_plasmon_sum(z, omega_p_ev)?;
    let b = plate_plate_energy_imaginary_frequency(z, omega_p_ev)?;
    if ((a - b) / b).abs() > 1e-8 {
        return Err(Error::Quadrature { estimate: a, error: (a - b).abs() });
    }
    Ok(a)
}

/// Reference curve c·z^p through an anchor point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub exponent: f64,
    pub prefactor: f64,
}

impl PowerLaw {
    pub fn eval(&self, z: f64) -> f64 {
        self.prefactor * z.powf(self.exponent)
    }
}

pub fn power_law_reference(exponent: f64, anchor_z: f64, anchor_value: f64) -> Result<PowerLaw> {
    if !(anchor_z > 0.0) || anchor_value == 0.0 || !anchor_value.is_finite() {
        return Err(Error::InvalidParameter(format!("anchor ({anchor_z}, {anchor_value}) must be nonzero")));
    }
    Ok(PowerLaw { exponent, prefactor: anchor_value / anchor_z.powf(exponent) })
}

/// What a [`BaselineCurve`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    PtPerfectConductor,
    PtFromPlateEnergy,
    PlateCasimir,
    RoughnessCorrected,
    PowerLawRef,
    DipoleTruncation,
    QuadrupoleTruncation,
}

/// Sampled comparison curve, (z, value) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineCurve {
    pub kind: BaselineKind,
    pub samples: Vec<(f64, f64)>,
}

impl BaselineCurve {
    pub fn sample<F: Fn(f64) -> f64>(kind: BaselineKind, z: &[f64], f: F) -> Self {
        Self { kind, samples: z.iter().map(|&z| (z, f(z))).collect() }
    }
}
