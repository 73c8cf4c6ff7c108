//! Dense symmetric eigensolver: Householder reduction to tridiagonal form
//! followed by the implicit-shift QL algorithm (the EISPACK tred2/tql2 pair).
//!
//! The eigenvalues-only path skips the accumulation of the Householder
//! transforms and the rotation updates of the eigenvector matrix.
//!
//! Before the dense solve, trailing rows whose off-diagonal entries are
//! collectively negligible are split off. If the Frobenius norm of every
//! off-diagonal entry in rows k.. (and the mirrored columns) is at most
//! ε‖A‖_max, Weyl's inequality bounds the eigenvalue change from dropping them
//! by the same amount, which is already the backward error of the dense solve.

use crate::error::{Error, Result};
use crate::sum::compensated_sum;

/// Iteration cap per eigenvalue in the QL sweep.
pub const MAX_QL_ITERATIONS: usize = 50;

/// Relative tolerance of the always-on trace check.
pub const TRACE_TOLERANCE: f64 = 1e-12;

/// Square symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetric {
    n: usize,
    data: Vec<f64>,
}

impl DenseSymmetric {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    /// Takes a row-major buffer; rejects it unless it is exactly symmetric.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidParameter(format!("expected {} entries, got {}", n * n, data.len())));
        }
        for i in 0..n {
            for j in 0..i {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::InvalidParameter(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, *v);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets a single entry. Callers keep the matrix symmetric.
    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        compensated_sum((0..self.n).map(|i| self.get(i, i)))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    /// y = A v.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// vᵀ A v.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        self.mul_vec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

/// Eigenvalues in ascending order and, optionally, the orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub values: Vec<f64>,
    /// Column-major n×n; column ν belongs to `values[ν]`.
    pub vectors: Option<Vec<f64>>,
}

impl EigenResult {
    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, index: usize) -> Option<&[f64]> {
        let n = self.values.len();
        self.vectors.as_ref().map(|v| &v[index * n..(index + 1) * n])
    }
}

/// Scratch space reused across solves by one worker.
#[derive(Debug, Default, Clone)]
pub struct EigenWorkspace {
    v: Vec<f64>,
    d: Vec<f64>,
    e: Vec<f64>,
    deflate: bool,
}

impl EigenWorkspace {
    pub fn new() -> Self {
        Self { deflate: true, ..Self::default() }
    }

    /// Workspace that always runs the full dense reduction (for benchmarking).
    pub fn without_deflation() -> Self {
        Self { deflate: false, ..Self::default() }
    }

    pub fn solve(&mut self, matrix: &DenseSymmetric, want_vectors: bool) -> Result<EigenResult> {
        let n = matrix.size();
        if n == 0 {
            return Ok(EigenResult { values: vec![], vectors: want_vectors.then(Vec::new) });
        }
        let k = if self.deflate { coupled_prefix(matrix) } else { n };

        self.load(matrix, k);
        if want_vectors {
            tred2(k, &mut self.v, &mut self.d, &mut self.e, true);
            tql2(k, &mut self.v, &mut self.d, &mut self.e, true)?;
        } else {
            tred2(k, &mut self.v, &mut self.d, &mut self.e, false);
            tql2(k, &mut self.v, &mut self.d, &mut self.e, false)?;
        }

        // Leading eigenpairs, then the decoupled diagonal tail.
        let mut pairs: Vec<(f64, usize)> = (0..n)
            .map(|i| if i < k { (self.d[i], i) } else { (matrix.get(i, i), i) })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();

        let trace = matrix.trace();
        let sum = compensated_sum(values.iter().copied());
        let scale = (0..n).map(|i| matrix.get(i, i).abs()).sum::<f64>().max(f64::MIN_POSITIVE);
        if (sum - trace).abs() > TRACE_TOLERANCE * scale {
            return Err(Error::InvalidParameter(format!("trace check failed: {sum} vs {trace}")));
        }

        let vectors = want_vectors.then(|| {
            let mut out = vec![0.0; n * n];
            for (col, &(_, src)) in pairs.iter().enumerate() {
                let dst = &mut out[col * n..(col + 1) * n];
                if src < k {
                    dst[..k].copy_from_slice(&self.v[src * k..(src + 1) * k]);
                } else {
                    dst[src] = 1.0;
                }
            }
            out
        });
        Ok(EigenResult { values, vectors })
    }

    fn load(&mut self, matrix: &DenseSymmetric, k: usize) {
        self.v.clear();
        // Symmetric, so the leading k×k block is the same in either storage order.
        for j in 0..k {
            self.v.extend((0..k).map(|i| matrix.get(i, j)));
        }
        self.d.clear();
        self.d.resize(k, 0.0);
        self.e.clear();
        self.e.resize(k, 0.0);
    }
}

/// All eigenvalues (and optionally eigenvectors) of a symmetric matrix.
pub fn eigenvalues(matrix: &DenseSymmetric, want_vectors: bool) -> Result<EigenResult> {
    EigenWorkspace::new().solve(matrix, want_vectors)
}

/// Smallest k ≥ 1 such that all off-diagonal entries touching rows ≥ k can be dropped.
fn coupled_prefix(matrix: &DenseSymmetric) -> usize {
    let n = matrix.size();
    let limit = (f64::EPSILON * matrix.max_abs()).powi(2);
    let mut tail = 0.0;
    for i in (1..n).rev() {
        let row: f64 = (0..i).map(|j| matrix.get(i, j).powi(2)).sum();
        tail += 2.0 * row;
        if tail > limit {
            return i + 1;
        }
    }
    1
}

#[inline]
fn at(n: usize, row: usize, col: usize) -> usize {
    col * n + row
}

/// Householder reduction of the column-major matrix in `v` to tridiagonal form.
/// On return `d` holds the diagonal and `e[1..]` the sub-diagonal; with
/// `accumulate`, `v` holds the orthogonal transformation.
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    if n == 0 {
        return;
    }
    for j in 0..n {
        d[j] = v[at(n, n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(n, i - 1, j)];
                v[at(n, i, j)] = 0.0;
                v[at(n, j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[at(n, j, i)] = f;
                let col = &v[j * n..j * n + i];
                g = e[j] + col[j] * f;
                for k in (j + 1)..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let col = &mut v[j * n..j * n + i];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(n, i - 1, j)];
                v[at(n, i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    if !accumulate {
        for j in 0..n {
            d[j] = v[at(n, j, j)];
        }
        e[0] = 0.0;
        return;
    }

    for i in 0..n - 1 {
        v[at(n, n - 1, i)] = v[at(n, i, i)];
        v[at(n, i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(n, k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(n, k, i + 1)] * v[at(n, k, j)];
                }
                for k in 0..=i {
                    v[at(n, k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(n, k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n, n - 1, j)];
        v[at(n, n - 1, j)] = 0.0;
    }
    v[at(n, n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL on the tridiagonal (d, e). Eigenvalues are returned in
/// ascending order; with `vectors`, the columns of `v` are rotated and sorted along.
fn tql2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64], vectors: bool) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::NoConvergence { index: l, iterations: MAX_QL_ITERATIONS });
                }

                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    if vectors {
                        let (left, right) = v.split_at_mut((i + 1) * n);
                        let col_i = &mut left[i * n..(i + 1) * n];
                        let col_next = &mut right[..n];
                        for (a, b) in col_i.iter_mut().zip(col_next.iter_mut()) {
                            let hk = *b;
                            *b = s * *a + c * hk;
                            *a = c * *a - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Selection sort, ascending.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            if vectors {
                for row in 0..n {
                    v.swap(at(n, row, i), at(n, row, k));
                }
            }
        }
    }
    Ok(())
}
