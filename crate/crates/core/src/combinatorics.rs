//! Log-factorial table for overflow-free combinatorial prefactors.

use crate::sum::NeumaierSum;

/// Table of ln(k!) for k = 0..=max.
///
/// Built by compensated accumulation of ln k, so entries stay accurate to a
/// few ulps well past the point where k! itself overflows (k > 170).
#[derive(Debug, Clone)]
pub struct LnFactorials {
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        let mut acc = NeumaierSum::new();
        table.push(0.0);
        for k in 1..=max {
            acc.add((k as f64).ln());
            table.push(acc.value());
        }
        Self { table }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    /// ln(k!). Panics if `k` exceeds the table size.
    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.table[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values_are_exact_factorials() {
        let t = LnFactorials::new(20);
        let mut f = 1.0_f64;
        for k in 1..=20 {
            f *= k as f64;
            assert!((t.get(k) - f.ln()).abs() <= 4.0 * f64::EPSILON * f.ln().max(1.0), "k={k}");
        }
        assert_eq!(t.get(0), 0.0);
    }

    #[test]
    fn large_values_match_stirling_series() {
        let t = LnFactorials::new(4000);
        for &n in &[200usize, 1000, 4000] {
            let x = n as f64;
            let stirling = x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
                - 1.0 / (360.0 * x.powi(3));
            assert!(((t.get(n) - stirling) / stirling).abs() < 1e-14, "n={n}");
        }
    }
}
