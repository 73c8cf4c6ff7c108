//! Eigenvalues of small symmetric matrices as roots of det(A − λI), located
//! by a sign-change scan and refined by bisection.

/// Deterministic uniform numbers in [-1, 1).
pub struct XorShift(pub u64);

impl XorShift {
    pub fn next_f64(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }
}

/// Random symmetric n×n matrix, row-major.
pub fn random_symmetric(n: usize, rng: &mut XorShift) -> Vec<f64> {
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = rng.next_f64();
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    data
}

/// det(A − λI) by Gaussian elimination with partial pivoting.
pub fn char_poly(a: &[f64], n: usize, lambda: f64) -> f64 {
    let mut m: Vec<f64> = (0..n * n).map(|k| a[k] - if k / n == k % n { lambda } else { 0.0 }).collect();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| m[p * n + col].abs().total_cmp(&m[q * n + col].abs())).unwrap();
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            det = -det;
        }
        let p = m[col * n + col];
        if p == 0.0 {
            return 0.0;
        }
        det *= p;
        for r in (col + 1)..n {
            let f = m[r * n + col] / p;
            for k in col..n {
                m[r * n + k] -= f * m[col * n + k];
            }
        }
    }
    det
}

/// Ascending roots found on a uniform grid of `steps` cells over the
/// Gershgorin bound. Two roots in one cell are missed, so callers should
/// check the count.
pub fn brute_force_roots(a: &[f64], n: usize, steps: usize) -> Vec<f64> {
    let bound = (0..n).map(|i| (0..n).map(|j| a[i * n + j].abs()).sum::<f64>()).fold(0.0, f64::max) + 1e-3;
    let mut roots = Vec::new();
    let mut lo = -bound;
    let mut flo = char_poly(a, n, lo);
    for k in 1..=steps {
        let hi = -bound + 2.0 * bound * k as f64 / steps as f64;
        let fhi = char_poly(a, n, hi);
        if flo == 0.0 {
            roots.push(lo);
        } else if flo.signum() != fhi.signum() {
            let (mut a0, mut b0, mut fa) = (lo, hi, flo);
            for _ in 0..200 {
                let mid = 0.5 * (a0 + b0);
                if mid <= a0 || mid >= b0 {
                    break;
                }
                let fm = char_poly(a, n, mid);
                if fm.signum() == fa.signum() {
                    a0 = mid;
                    fa = fm;
                } else {
                    b0 = mid;
                }
            }
            roots.push(0.5 * (a0 + b0));
        }
        lo = hi;
        flo = fhi;
    }
    roots
}
