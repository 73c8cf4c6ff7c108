//! Closed forms for the dipole-only (L = 1) truncation. With x = R/d the
//! three dipole modes sit at 1/3 + 2f x³/3 (axial) and 1/3 + f x³/3 (twice).

const THIRD: f64 = 1.0 / 3.0;

/// Interaction energy in units of ħω_p.
pub fn energy(f_c: f64, x: f64) -> f64 {
    let x3 = x.powi(3);
    0.5 * ((THIRD + 2.0 * THIRD * f_c * x3).sqrt() - THIRD.sqrt()
        + 2.0 * ((THIRD + THIRD * f_c * x3).sqrt() - THIRD.sqrt()))
}

/// dE/dx of [`energy`].
pub fn energy_x_derivative(f_c: f64, x: f64) -> f64 {
    let x3 = x.powi(3);
    0.5 * f_c * x * x * (1.0 / (THIRD + 2.0 * THIRD * f_c * x3).sqrt() + 1.0 / (THIRD + THIRD * f_c * x3).sqrt())
}

/// −dE/dz for a sphere of radius `radius` at gap `gap`, with x = R/(2(z+R)).
pub fn force(f_c: f64, radius: f64, gap: f64) -> f64 {
    let x = radius / (2.0 * (gap + radius));
    energy_x_derivative(f_c, x) * x / (gap + radius)
}

#[cfg(test)]
mod tests {
    #[test]
    fn derivative_matches_difference_quotient() {
        let (f, x, h) = (-0.6, 0.3, 1e-6);
        let fd = (super::energy(f, x + h) - super::energy(f, x - h)) / (2.0 * h);
        assert!((fd / super::energy_x_derivative(f, x) - 1.0).abs() < 1e-8);
    }
}
