//! Mode spectrum of the sphere–substrate system and its zero-point energy.

use rayon::prelude::*;

use crate::combinatorics::LnFactorials;
use crate::coupling::{build_block_with, CouplingBlock, SpherePlateGeometry};
use crate::eigen::{EigenResult, EigenWorkspace};
use crate::error::{Error, Result};
use crate::physics::{contrast_factor, depolarization_factor, omega_of_eigenvalue, DielectricModel};
use crate::sum::NeumaierSum;

/// Eigenvalues of one m-block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpectrum {
    pub m: i64,
    /// 1 for m = 0, 2 when the block also stands for −m.
    pub degeneracy: u32,
    pub l_min: u32,
    /// Ascending eigenvalues n_ν.
    pub values: Vec<f64>,
    /// dn_ν/dz in nm⁻¹, when requested.
    pub derivatives: Option<Vec<f64>>,
    /// n_ν − n⁰_ν to full relative precision, present whenever eigenvectors were formed.
    pub shifts: Option<Vec<f64>>,
}

impl BlockSpectrum {
    /// Isolated-sphere values l/(2l+1), ascending, paired index-wise with `values`.
    pub fn reference(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| depolarization_factor(self.l_min + i as u32))
    }

    /// n_ν − n⁰_ν, from the refined shifts when available.
    pub fn shift(&self, index: usize) -> f64 {
        match &self.shifts {
            Some(s) => s[index],
            None => self.values[index] - depolarization_factor(self.l_min + index as u32),
        }
    }

    fn energy_shift(&self) -> f64 {
        self.values
            .iter()
            .zip(self.reference())
            .enumerate()
            .map(|(i, (&n, n0))| self.shift(i) / (n.sqrt() + n0.sqrt()))
            .collect::<NeumaierSum>()
            .value()
    }
}

/// All modes of the system at one geometry and truncation order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    pub geometry: SpherePlateGeometry,
    pub contrast: f64,
    pub l_max: u32,
    pub blocks: Vec<BlockSpectrum>,
}

impl ModeSpectrum {
    /// Number of modes counted with degeneracy; L² + 2L for a complete spectrum.
    pub fn mode_count(&self) -> usize {
        self.blocks.iter().map(|b| b.degeneracy as usize * b.values.len()).sum()
    }

    pub fn has_derivatives(&self) -> bool {
        self.blocks.iter().all(|b| b.derivatives.is_some())
    }

    /// Smallest eigenvalue of the m = 0 block.
    pub fn lowest_axial(&self) -> Option<f64> {
        self.blocks.iter().find(|b| b.m == 0).and_then(|b| b.values.first().copied())
    }

    /// Every eigenvalue must lie in (0, 1).
    pub fn validate(&self) -> Result<()> {
        for b in &self.blocks {
            for &n in &b.values {
                if !(n > 0.0) {
                    return Err(Error::ModeCollapse(n));
                }
                if !(n < 1.0) {
                    return Err(Error::EigenvalueOutOfRange(n));
                }
            }
        }
        Ok(())
    }
}

/// Up to this order eigenvectors are always formed so that energies use refined shifts.
///
/// Subtracting n⁰ ≈ 1/3 from an eigenvalue leaves an absolute error of a few ulp(1/3),
/// which at large gaps is a visible fraction of a shift of order x³. Beyond this
/// order the spectra only arise at small gaps where the shifts are large.
pub const REFINE_MAX_ORDER: u32 = 128;

/// Solves every block m = 0..=L at one geometry.
pub fn solve_spectrum(geom: &SpherePlateGeometry, substrate: &DielectricModel, l_max: u32) -> Result<ModeSpectrum> {
    let f_c = contrast_factor(substrate)?;
    solve_spectrum_with(geom, f_c, l_max, false)
}

/// Same as [`solve_spectrum`] for a known contrast, optionally with the
/// Hellmann–Feynman eigenvalue derivatives.
pub fn solve_spectrum_with(
    geom: &SpherePlateGeometry,
    f_c: f64,
    l_max: u32,
    with_derivatives: bool,
) -> Result<ModeSpectrum> {
    if l_max < 1 {
        return Err(Error::InvalidParameter("truncation order must be >= 1".into()));
    }
    let table = LnFactorials::new(2 * l_max as usize);
    let x = geom.ratio();
    let inv_span = 1.0 / (geom.gap() + geom.radius());
    let want_vectors = with_derivatives || l_max <= REFINE_MAX_ORDER;
    let blocks = (0..=l_max as i64)
        .into_par_iter()
        .map_init(EigenWorkspace::new, |ws, m| {
            let block = build_block_with(&table, m, l_max, x, f_c)?;
            let eig = ws.solve(block.matrix(), want_vectors)?;
            let shifts = want_vectors.then(|| refined_shifts(&eig, &block));
            let derivatives = with_derivatives.then(|| scaled_derivatives(&eig, &block, shifts.as_deref(), inv_span));
            Ok(BlockSpectrum {
                m,
                degeneracy: if m == 0 { 1 } else { 2 },
                l_min: block.l_min(),
                values: eig.values,
                derivatives,
                shifts,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModeSpectrum { geometry: *geom, contrast: f_c, l_max, blocks })
}

/// n_ν − n⁰_ν as the Rayleigh quotient of H − n⁰_ν, built from the coupling entries
/// and differences of reference values so that no O(1) quantity is ever subtracted.
fn refined_shifts(eig: &EigenResult, block: &CouplingBlock) -> Vec<f64> {
    let n0 = block.reference_values();
    (0..eig.size())
        .map(|nu| {
            let v = eig.vector(nu).expect("vectors requested");
            let support: Vec<usize> = (0..v.len()).filter(|&i| v[i] != 0.0).collect();
            let mut num = NeumaierSum::new();
            let mut norm = 0.0;
            for &i in &support {
                let vi = v[i];
                norm += vi * vi;
                let mut row = (n0[i] - n0[nu]) * vi;
                for &j in &support {
                    row += block.coupling(i, j) * v[j];
                }
                num.add(vi * row);
            }
            num.value() / norm
        })
        .collect()
}

/// dn_ν/dz from the eigenpairs alone.
///
/// With C the coupling part of H and Λ = diag(l + ½), dH/dz = −(ΛC + CΛ)/(z+R)
/// and Cv = (n − D)v, so vᵀ(dH/dz)v = −2/(z+R) Σ_i v_i² (l_i + ½)(n − n⁰_i).
/// The differences n − n⁰_i are taken as shift_ν + (n⁰_ν − n⁰_i).
fn scaled_derivatives(eig: &EigenResult, block: &CouplingBlock, shifts: Option<&[f64]>, inv_span: f64) -> Vec<f64> {
    let n = eig.size();
    let n0 = block.reference_values();
    (0..n)
        .map(|nu| {
            let v = eig.vector(nu).expect("vectors requested");
            let shift = shifts.map_or(eig.values[nu] - n0[nu], |s| s[nu]);
            let s: f64 = v
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(i, c)| c * c * (block.order(i) as f64 + 0.5) * (shift + (n0[nu] - n0[i])))
                .sum();
            -2.0 * inv_span * s
        })
        .collect()
}

/// Zero-point interaction energy in units of ħω_p, with lossless mode frequencies ω = ω_p√n.
///
/// Per mode the difference √n − √n⁰ is formed as (n − n⁰)/(√n + √n⁰). Blocks are
/// folded in ascending |m| with each degenerate pair added as one term.
pub fn interaction_energy(spectrum: &ModeSpectrum) -> Result<f64> {
    spectrum.validate()?;
    Ok(0.5 * fold_by_order(spectrum, |b| Ok(b.energy_shift()))?)
}

/// Energy using the real part of the damped mode frequencies, √(n − γ²/4).
pub fn damped_interaction_energy(spectrum: &ModeSpectrum, model: &DielectricModel) -> Result<f64> {
    spectrum.validate()?;
    if !matches!(model, DielectricModel::Drude { .. }) {
        return Err(Error::InvalidParameter("damped energy requires a Drude sphere".into()));
    }
    let e = fold_by_order(spectrum, |b| {
        let mut acc = NeumaierSum::new();
        for (i, (&n, n0)) in b.values.iter().zip(b.reference()).enumerate() {
            let w = omega_of_eigenvalue(model, n, false)?;
            let w0 = omega_of_eigenvalue(model, n0, false)?;
            // w² − w0² = n − n0
            acc.add(b.shift(i) / (w + w0));
        }
        Ok(acc.value())
    })?;
    Ok(0.5 * e)
}

fn fold_by_order(spectrum: &ModeSpectrum, per_block: impl Fn(&BlockSpectrum) -> Result<f64>) -> Result<f64> {
    let mut order: Vec<usize> = (0..spectrum.blocks.len()).collect();
    order.sort_by_key(|&i| (spectrum.blocks[i].m.unsigned_abs(), spectrum.blocks[i].m < 0));
    let mut total = NeumaierSum::new();
    let mut i = 0;
    while i < order.len() {
        let am = spectrum.blocks[order[i]].m.unsigned_abs();
        let mut group = 0.0;
        while i < order.len() && spectrum.blocks[order[i]].m.unsigned_abs() == am {
            let b = &spectrum.blocks[order[i]];
            let s = per_block(b)?;
            group += if b.degeneracy == 2 { s + s } else { s };
            i += 1;
        }
        total.add(group);
    }
    Ok(total.value())
}

/// Scaled multipole amplitudes x_μ and drive b_μ of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMultipoleState {
    pub amplitudes: Vec<f64>,
    pub drive: Vec<f64>,
}

impl ScaledMultipoleState {
    pub fn from_drive(drive: Vec<f64>) -> Self {
        Self { amplitudes: vec![0.0; drive.len()], drive }
    }

    /// Scales physical moments Q_l and exciting-field coefficients V_l for orders l_min.. .
    pub fn from_physical(l_min: u32, radius: f64, moments: &[f64], field: &[f64]) -> Self {
        let s = |i: usize| {
            let l = l_min + i as u32;
            (l as f64 * radius.powi(2 * l as i32 + 1)).sqrt()
        };
        Self {
            amplitudes: moments.iter().enumerate().map(|(i, q)| q / s(i)).collect(),
            drive: field.iter().enumerate().map(|(i, v)| -s(i) * v / (4.0 * std::f64::consts::PI)).collect(),
        }
    }

    /// Unscaled multipole moments Q_l.
    pub fn moments(&self, l_min: u32, radius: f64) -> Vec<f64> {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let l = l_min + i as u32;
                x * (l as f64 * radius.powi(2 * l as i32 + 1)).sqrt()
            })
            .collect()
    }
}

/// Minimum distance from a pole accepted by [`greens_response`].
pub const POLE_GUARD: f64 = 1e-9;

/// Solves (H − u)x = b through the spectral decomposition,
/// x = −Σ_ν v_ν (v_νᵀ b)/(u − n_ν).
pub fn greens_response(eigen: &EigenResult, u: f64, drive: &ScaledMultipoleState) -> Result<ScaledMultipoleState> {
    let n = eigen.size();
    if drive.drive.len() != n {
        return Err(Error::InvalidParameter(format!("drive has {} entries, block has {n}", drive.drive.len())));
    }
    if eigen.vectors.is_none() {
        return Err(Error::MissingVectors);
    }
    if let Some(&closest) = eigen.values.iter().min_by(|a, b| (u - **a).abs().total_cmp(&(u - **b).abs())) {
        let distance = (u - closest).abs();
        if distance < POLE_GUARD {
            return Err(Error::PoleProximity { u, n: closest, distance });
        }
    }
    let mut x = vec![0.0; n];
    for nu in 0..n {
        let v = eigen.vector(nu).expect("checked above");
        let proj: f64 = v.iter().zip(&drive.drive).map(|(a, b)| a * b).sum();
        let coef = -proj / (u - eigen.values[nu]);
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi += coef * vi;
        }
    }
    Ok(ScaledMultipoleState { amplitudes: x, drive: drive.drive.clone() })
}

/// Truncation schedule for [`converge_l`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceSettings {
    pub rel_tol: f64,
    pub l_start: u32,
    /// First increment; doubled after every comparison.
    pub l_step: u32,
    pub l_cap: u32,
}

impl Default for ConvergenceSettings {
    fn default() -> Self {
        Self { rel_tol: 1e-6, l_start: 8, l_step: 8, l_cap: 2048 }
    }
}

/// Result of an adaptive truncation run.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationOutcome {
    /// Spectrum at the larger of the two compared orders (or at the cap).
    pub spectrum: ModeSpectrum,
    /// Order of `spectrum`.
    pub l_used: u32,
    /// Smaller order of the last comparison that met the tolerance.
    pub l_converged: u32,
    pub energy: f64,
    /// |E(L + step) − E(L)| of the last comparison.
    pub last_delta: f64,
    pub converged: bool,
}

/// Raises L until successive energies agree to `rel_tol`, or the cap is hit.
pub fn converge_l(
    geom: &SpherePlateGeometry,
    f_c: f64,
    settings: &ConvergenceSettings,
    with_derivatives: bool,
) -> Result<TruncationOutcome> {
    let ConvergenceSettings { rel_tol, l_start, l_step, l_cap } = *settings;
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {rel_tol}")));
    }
    if l_start < 1 || l_step < 1 || l_cap < l_start {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= L_start ({l_start}) <= L_cap ({l_cap}) and L_step >= 1 ({l_step})"
        )));
    }
    let mut l = l_start;
    let mut step = l_step;
    let mut spectrum = solve_spectrum_with(geom, f_c, l, with_derivatives)?;
    let mut energy = interaction_energy(&spectrum)?;
    let mut last_delta = f64::INFINITY;
    loop {
        let next = l.saturating_add(step).min(l_cap);
        if next == l {
            return Ok(TruncationOutcome {
                spectrum,
                l_used: l,
                l_converged: l,
                energy,
                last_delta,
                converged: false,
            });
        }
        let next_spectrum = solve_spectrum_with(geom, f_c, next, with_derivatives)?;
        let next_energy = interaction_energy(&next_spectrum)?;
        last_delta = (next_energy - energy).abs();
        if last_delta <= rel_tol * next_energy.abs() {
            return Ok(TruncationOutcome {
                spectrum: next_spectrum,
                l_used: next,
                l_converged: l,
                energy: next_energy,
                last_delta,
                converged: true,
            });
        }
        spectrum = next_spectrum;
        energy = next_energy;
        l = next;
        step = step.saturating_mul(2);
    }
}

/// Energy at a fixed truncation order.
pub fn energy_at(geom: &SpherePlateGeometry, f_c: f64, l_max: u32) -> Result<f64> {
    interaction_energy(&solve_spectrum_with(geom, f_c, l_max, false)?)
}
