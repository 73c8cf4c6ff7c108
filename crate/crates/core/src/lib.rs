//! Multipolar van der Waals interaction between a sphere and a flat substrate.
//!
//! The sphere's surface-plasmon modes are obtained from the eigenvalues of a
//! dimensionless, geometry-only coupling matrix built in m-conserving blocks.
//! The interaction energy is the shift of the zero-point energy of those modes
//! relative to the isolated sphere, and the force follows either from the
//! Hellmann–Feynman derivative of the eigenvalues or from finite differences.

pub mod baselines;
pub mod combinatorics;
pub mod coupling;
pub mod eigen;
mod error;
pub mod force;
pub mod physics;
pub mod spectrum;
pub mod sum;
pub mod units;

pub use coupling::{build_block, block_z_derivative, coupling_coefficient, CouplingBlock, SpherePlateGeometry};
pub use eigen::{eigenvalues, DenseSymmetric, EigenResult, EigenWorkspace};
pub use error::{Error, Result};
pub use force::{force_finite_difference, force_hellmann_feynman, local_slope, CurveSample};
pub use physics::{contrast_factor, omega_of_eigenvalue, spectral_u, sphere_polarizability, DielectricModel, SpectralValue};
pub use spectrum::{
    converge_l, damped_interaction_energy, greens_response, interaction_energy, solve_spectrum, solve_spectrum_with,
    ConvergenceSettings, ModeSpectrum, ScaledMultipoleState, TruncationOutcome,
};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
