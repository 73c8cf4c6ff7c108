//! Slow, independent reference computations for tests. Nothing here shares
//! code with the engine it checks.

pub mod charpoly;
pub mod dipole;
pub mod projection;
