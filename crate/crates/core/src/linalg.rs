//! Small dense and banded symmetric solvers.
//!
//! Matrices are row-major `Vec<S>`. Sizes here are tiny (cluster counts) or
//! narrow-banded (path Laplacians), so nothing fancier is warranted.

use crate::scalar::Scalar;

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<S> {
    n: usize,
    l: Vec<S>,
}

impl<S: Scalar> Cholesky<S> {
    /// Factors `a` (n×n, row-major). Returns the index of the failing pivot
    /// if the matrix is not numerically positive definite.
    pub fn factor(a: &[S], n: usize) -> Result<Self, usize> {
        assert_eq!(a.len(), n * n);
        let mut l = vec![S::zero(); n * n];
        for j in 0..n {
            let mut d = a[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > S::zero()) || !d.is_finite() {
                return Err(j);
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in (j + 1)..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Ok(Self { n, l })
    }

    /// Solves `A X = B` in place for `B` of shape n×cols.
    pub fn solve_in_place(&self, b: &mut [S], cols: usize) {
        let n = self.n;
        assert_eq!(b.len(), n * cols);
        for c in 0..cols {
            // forward: L y = b
            for i in 0..n {
                let mut s = b[i * cols + c];
                for k in 0..i {
                    s -= self.l[i * n + k] * b[k * cols + c];
                }
                b[i * cols + c] = s / self.l[i * n + i];
            }
            // backward: L^T x = y
            for i in (0..n).rev() {
                let mut s = b[i * cols + c];
                for k in (i + 1)..n {
                    s -= self.l[k * n + i] * b[k * cols + c];
                }
                b[i * cols + c] = s / self.l[i * n + i];
            }
        }
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues<S: Scalar>(a: &[S], n: usize) -> Vec<S> {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let eps = S::epsilon();
    for _sweep in 0..100 {
        let mut off = S::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        let scale: S = (0..n).map(|i| m[i * n + i] * m[i * n + i]).sum::<S>() + off;
        if off <= eps * eps * scale || off == S::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == S::zero() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (S::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + S::one()).sqrt());
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<S> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

/// Symmetric positive definite band matrix stored by lower diagonals:
/// `diag[k][i]` holds entry `(i + k, i)`.
#[derive(Debug, Clone)]
pub struct SymBand<S> {
    n: usize,
    diag: Vec<Vec<S>>,
}

impl<S: Scalar> SymBand<S> {
    pub fn zeros(n: usize, half_bandwidth: usize) -> Self {
        let diag = (0..=half_bandwidth)
            .map(|k| vec![S::zero(); n.saturating_sub(k)])
            .collect();
        Self { n, diag }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn half_bandwidth(&self) -> usize {
        self.diag.len() - 1
    }

    /// Adds `v` to entry `(i, j)` (and its mirror).
    pub fn add(&mut self, i: usize, j: usize, v: S) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let k = r - c;
        assert!(k <= self.half_bandwidth(), "entry outside band");
        self.diag[k][c] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let k = r - c;
        if k > self.half_bandwidth() {
            S::zero()
        } else {
            self.diag[k][c]
        }
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        let mut y = vec![S::zero(); self.n];
        for (k, d) in self.diag.iter().enumerate() {
            for (c, &v) in d.iter().enumerate() {
                y[c + k] += v * x[c];
                if k > 0 {
                    y[c] += v * x[c + k];
                }
            }
        }
        y
    }

    /// Band Cholesky factorization. Fails when a pivot is not positive.
    pub fn cholesky(&self) -> Option<BandCholesky<S>> {
        let n = self.n;
        let p = self.half_bandwidth();
        // l[k][j] = L(j + k, j)
        let mut l: Vec<Vec<S>> = self.diag.clone();
        for j in 0..n {
            let mut d = l[0][j];
            for k in 1..=p.min(j) {
                let v = l[k][j - k];
                d -= v * v;
            }
            if !(d > S::zero()) || !d.is_finite() {
                return None;
            }
            let d = d.sqrt();
            l[0][j] = d;
            for k in 1..=p {
                let i = j + k;
                if i >= n {
                    break;
                }
                let mut s = l[k][j];
                // sum over m < j with both (i, m) and (j, m) in band
                for m in i.saturating_sub(p)..j {
                    s -= l[i - m][m] * l[j - m][m];
                }
                l[k][j] = s / d;
            }
        }
        Some(BandCholesky { n, p, l })
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky<S> {
    n: usize,
    p: usize,
    l: Vec<Vec<S>>,
}

impl<S: Scalar> BandCholesky<S> {
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let (n, p) = (self.n, self.p);
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for m in i.saturating_sub(p)..i {
                s -= self.l[i - m][m] * x[m];
            }
            x[i] = s / self.l[0][i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for m in (i + 1)..(i + p + 1).min(n) {
                s -= self.l[m - i][i] * x[m];
            }
            x[i] = s / self.l[0][i];
        }
        x
    }
}
