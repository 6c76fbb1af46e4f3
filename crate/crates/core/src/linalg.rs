//! Small dense kernels for metric-sized matrices.

use ndarray::Array2;

use crate::error::{Error, Result};

pub const PIVOT_THRESHOLD: f64 = 1e-14;

/// Gauss-Jordan inverse with partial pivoting. Returns the inverse and the determinant.
pub fn invert(a: &Array2<f64>) -> Result<(Array2<f64>, f64)> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut inv = Array2::<f64>::eye(n);
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[[r, col]].abs() > m[[piv, col]].abs() {
                piv = r;
            }
        }
        let pivot = m[[piv, col]];
        if pivot.abs() < PIVOT_THRESHOLD {
            return Err(Error::SingularMetric { pivot: pivot.abs() });
        }
        if piv != col {
            for c in 0..n {
                m.swap([piv, c], [col, c]);
                inv.swap([piv, c], [col, c]);
            }
            det = -det;
        }
        det *= pivot;
        for c in 0..n {
            m[[col, c]] /= pivot;
            inv[[col, c]] /= pivot;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[[r, col]];
            if f == 0.0 {
                continue;
            }
            for c in 0..n {
                m[[r, c]] -= f * m[[col, c]];
                inv[[r, c]] -= f * inv[[col, c]];
            }
        }
    }
    Ok((inv, det))
}

/// True when every leading principal minor is positive (Cholesky succeeds).
pub fn is_positive_definite(a: &Array2<f64>) -> bool {
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in j + 1..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / d;
        }
    }
    true
}

/// Symmetric positive-definite banded matrix stored by lower diagonals:
/// `band[[i, k]]` holds entry `(i, i - k)` for `k <= bandwidth`.
pub struct BandedSpd {
    n: usize,
    bw: usize,
    band: Array2<f64>,
}

impl BandedSpd {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        BandedSpd {
            n,
            bw: bandwidth,
            band: Array2::zeros((n, bandwidth + 1)),
        }
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Adds `v` to entry (i, j); the caller adds each unordered pair once per term
    /// with `i >= j`, since only the lower half is stored.
    pub fn add_lower(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i >= j && i - j <= self.bw, "entry ({i},{j}) outside band {}", self.bw);
        self.band[[i, i - j]] += v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.band[[i, 0]]).collect()
    }

    /// In-place banded Cholesky; returns false if a pivot is not positive.
    pub fn factor(&mut self) -> bool {
        let bw = self.bw;
        for j in 0..self.n {
            let lo = j.saturating_sub(bw);
            let mut d = self.band[[j, 0]];
            for k in lo..j {
                let l = self.band[[j, j - k]];
                d -= l * l;
            }
            if !(d > 0.0) {
                return false;
            }
            let d = d.sqrt();
            self.band[[j, 0]] = d;
            for i in j + 1..(j + bw + 1).min(self.n) {
                let lo_i = i.saturating_sub(bw).max(lo);
                let mut s = self.band[[i, i - j]];
                for k in lo_i..j {
                    s -= self.band[[i, i - k]] * self.band[[j, j - k]];
                }
                self.band[[i, i - j]] = s / d;
            }
        }
        true
    }

    /// Solves with a factored matrix.
    pub fn solve(&self, rhs: &mut [f64]) {
        let bw = self.bw;
        for i in 0..self.n {
            let mut s = rhs[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.band[[i, i - k]] * rhs[k];
            }
            rhs[i] = s / self.band[[i, 0]];
        }
        for i in (0..self.n).rev() {
            let mut s = rhs[i];
            for k in i + 1..(i + bw + 1).min(self.n) {
                s -= self.band[[k, k - i]] * rhs[k];
            }
            rhs[i] = s / self.band[[i, 0]];
        }
    }
}
