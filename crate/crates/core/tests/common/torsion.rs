//! Torsion d-tensors by finite differences; only evaluates metric entries and the field at points.

use super::{christoffel, fd4, riemann, STEP};
use jetlab_core::jetgeom::{JetPoint, SystemSpec};
use jetlab_core::linalg::invert;
use ndarray::{Array2, Array3, Array4};

pub struct Oracle<'a> {
    pub sys: &'a SystemSpec,
}

impl Oracle<'_> {
    fn h(&self) -> impl Fn(&[f64]) -> Array2<f64> + '_ {
        |t| self.sys.h().value_at(t).unwrap()
    }

    fn phi(&self) -> impl Fn(&[f64]) -> Array2<f64> + '_ {
        |x| self.sys.phi().value_at(x).unwrap()
    }

    /// `X^i_{α‖j} = ∂_j X^i_α + X^m_α γ^i_{mj}` at `[[i, α, j]]`.
    fn cov_x(&self, t: &[f64], x: &[f64]) -> Array3<f64> {
        let (p, n) = (t.len(), x.len());
        let field = self.sys.field_at(t, x).unwrap();
        let flat = |z: &[f64]| self.sys.field_at(t, z).unwrap().iter().copied().collect::<Vec<_>>();
        let dx: Vec<Vec<f64>> = (0..n).map(|j| fd4(flat, x, j, STEP)).collect();
        let gam = christoffel(&self.phi(), x);
        Array3::from_shape_fn((n, p, n), |(i, a, j)| {
            let mut s = dx[j][i * p + a];
            for m in 0..n {
                s += field[[m, a]] * gam[[i, m, j]];
            }
            s
        })
    }

    /// `[[i, α, j, β]]`
    fn cov_xt(&self, t: &[f64], x: &[f64]) -> Array4<f64> {
        let (p, n) = (t.len(), x.len());
        let cx = self.cov_x(t, x);
        let flat = |z: &[f64]| self.cov_x(z, x).iter().copied().collect::<Vec<_>>();
        let dt: Vec<Vec<f64>> = (0..p).map(|b| fd4(flat, t, b, STEP)).collect();
        let hg = christoffel(&self.h(), t);
        Array4::from_shape_fn((n, p, n, p), |(i, a, j, b)| {
            let mut s = dt[b][(i * p + a) * n + j];
            for mu in 0..p {
                s -= cx[[i, mu, j]] * hg[[mu, a, b]];
            }
            s
        })
    }

    /// `[[i, α, j, k]]`
    fn cov_xx(&self, t: &[f64], x: &[f64]) -> Array4<f64> {
        let (p, n) = (t.len(), x.len());
        let cx = self.cov_x(t, x);
        let flat = |z: &[f64]| self.cov_x(t, z).iter().copied().collect::<Vec<_>>();
        let dx: Vec<Vec<f64>> = (0..n).map(|k| fd4(flat, x, k, STEP)).collect();
        let gam = christoffel(&self.phi(), x);
        Array4::from_shape_fn((n, p, n, n), |(i, a, j, k)| {
            let mut s = dx[k][(i * p + a) * n + j];
            for m in 0..n {
                s += cx[[m, a, j]] * gam[[i, m, k]] - cx[[i, a, m]] * gam[[m, j, k]];
            }
            s
        })
    }

    /// `[Rtt, Rtj, Rjk]` in the engine's index layout.
    pub fn torsion(&self, pt: &JetPoint) -> [Array4<f64>; 3] {
        let (t, x, xdot) = (&pt.t[..], &pt.x[..], &pt.xdot);
        let (p, n) = (t.len(), x.len());
        let phi = self.phi()(x);
        let (pinv, _) = invert(&phi).unwrap();
        let hr = riemann(&self.h(), t);
        let pr = riemann(&self.phi(), x);
        let (cxt, cxx) = (self.cov_xt(t, x), self.cov_xx(t, x));
        // ½ [D_{ij} − φ^{ir} D_{sr} φ_{sj}] for a pair of free indices (i, j).
        let anti = |d: &dyn Fn(usize, usize) -> f64, i: usize, j: usize| {
            let mut s = 0.0;
            for r in 0..n {
                for q in 0..n {
                    s += pinv[[i, r]] * d(q, r) * phi[[q, j]];
                }
            }
            0.5 * (d(i, j) - s)
        };
        let rtt = Array4::from_shape_fn((n, p, p, p), |(i, a, b, c)| {
            -(0..p).map(|mu| hr[[mu, a, b, c]] * xdot[[i, mu]]).sum::<f64>()
        });
        let rtj = Array4::from_shape_fn((n, p, p, n), |(i, a, b, j)| {
            anti(&|u, v| cxt[[u, a, v, b]], i, j)
        });
        let rjk = Array4::from_shape_fn((n, p, n, n), |(i, a, j, k)| {
            let curv: f64 = (0..n).map(|m| pr[[i, j, k, m]] * xdot[[m, a]]).sum();
            curv - anti(&|u, v| cxx[[u, a, v, k]], i, j)
        });
        [rtt, rtj, rjk]
    }
}
