//! Sphere–image coupling by brute force: the potential of a point multipole
//! at the image centre is sampled on a small sphere around the sphere centre
//! and projected onto spherical harmonics.

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Orthonormal real spherical harmonic's θ-part: N P_l^m(cos θ), with the
/// azimuthal factor √2 cos(mφ) (m > 0) or 1 (m = 0) left out.
pub fn theta_part(l: u32, m: u32, c: f64) -> f64 {
    let s = (1.0 - c * c).max(0.0).sqrt();
    let mut pmm = 1.0;
    for i in 0..m {
        pmm *= -((2 * i + 1) as f64) * s;
    }
    let p = if l == m {
        pmm
    } else {
        let mut p0 = pmm;
        let mut p1 = c * (2 * m + 1) as f64 * pmm;
        for k in (m + 2)..=l {
            let p2 = (c * (2 * k - 1) as f64 * p1 - (k + m - 1) as f64 * p0) / (k - m) as f64;
            p0 = p1;
            p1 = p2;
        }
        p1
    };
    let norm = ((2 * l + 1) as f64 / (4.0 * std::f64::consts::PI) * factorial(l - m) / factorial(l + m)).sqrt();
    norm * p
}

/// Coefficient T with Y_{l′m}(s)/s^{l′+1} = Σ_l T_{ll′} r^l Y_{lm}(r), s = r + d ẑ.
pub fn translation(l: u32, lp: u32, m: u32, d: f64, nodes: &[(f64, f64)]) -> f64 {
    let rho = 0.25 * d;
    // The φ integrals of the two azimuthal factors cancel against the normalisation.
    let mut acc = 0.0;
    for &(c, w) in nodes {
        let sin = (1.0 - c * c).sqrt();
        let (px, pz) = (rho * sin, rho * c + d);
        let s = (px * px + pz * pz).sqrt();
        let source = theta_part(lp, m, pz / s) / s.powi(lp as i32 + 1);
        acc += w * source * theta_part(l, m, c);
    }
    2.0 * std::f64::consts::PI * acc / rho.powi(l as i32)
}

/// Symmetrised sphere–image matrix element from the electrostatics:
/// u q_l = n_l q_l + n_l R^{2l+1} f_c Σ (−1)^{l′+m} T_{ll′} q_l′, R = 1.
pub fn projected_entry(l: u32, lp: u32, m: u32, x: f64, f_c: f64, nodes: &[(f64, f64)]) -> f64 {
    let d = 1.0 / x;
    let k = |a: u32, b: u32| {
        let sign = if (b + m) % 2 == 0 { 1.0 } else { -1.0 };
        f_c * (a as f64 / (2 * a + 1) as f64) * sign * translation(a, b, m, d, nodes)
    };
    let (kab, kba) = (k(l, lp), k(lp, l));
    assert!(kab * kba >= 0.0, "similarity-symmetrisable pattern");
    kab.signum() * (kab * kba).sqrt()
}
