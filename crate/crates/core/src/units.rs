//! Unit conversions. Frequencies are carried in units of the sphere's plasma
//! frequency and lengths in nanometres; eV appear only at the boundaries.

/// ħc in eV·nm.
pub const HBAR_C_EV_NM: f64 = 197.327;

/// Converts an energy in units of ħω_p to eV.
pub fn hbar_wp_to_ev(energy: f64, omega_p_ev: f64) -> f64 {
    energy * omega_p_ev
}
