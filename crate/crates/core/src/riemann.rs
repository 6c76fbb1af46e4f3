//! Riemannian metric fields given by expression entries.
//!
//! Curvature convention: `R^l_{ijk} = ∂_j Γ^l_{ik} − ∂_k Γ^l_{ij} + Γ^l_{jm} Γ^m_{ik} − Γ^l_{km} Γ^m_{ij}`,
//! `Ric_{ij} = R^m_{imj}`. The unit sphere has scalar curvature +2.

use ndarray::{Array2, Array3, Array4};

use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::linalg;

#[derive(Debug, Clone)]
pub struct MetricField {
    label: String,
    names: Vec<String>,
    entries: Vec<Expr>,
    /// `∂_k g_{ab}` at `(a * dim + b) * dim + k`.
    d1: Vec<Expr>,
    /// `∂_l ∂_k g_{ab}` at `((a * dim + b) * dim + k) * dim + l`.
    d2: Vec<Expr>,
}

/// Metric data at one point: values, inverse, first derivatives and Christoffel symbols.
#[derive(Debug, Clone)]
pub struct MetricLocal {
    pub g: Array2<f64>,
    pub inv: Array2<f64>,
    pub det: f64,
    /// `dg[[a, b, k]] = ∂_k g_{ab}`
    pub dg: Array3<f64>,
    /// `gamma[[k, i, j]] = Γ^k_{ij}`
    pub gamma: Array3<f64>,
}

#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    /// `riemann[[l, i, j, k]] = R^l_{ijk}`
    pub riemann: Array4<f64>,
    pub ricci: Array2<f64>,
    pub scalar: f64,
}

impl MetricField {
    /// Builds a metric from expression entries over `names`.
    pub fn new(label: &str, names: Vec<String>, entries: Vec<Vec<Expr>>) -> Result<Self> {
        let dim = names.len();
        if dim == 0 {
            return Err(Error::Shape(format!("metric `{label}` has no coordinates")));
        }
        if entries.len() != dim || entries.iter().any(|row| row.len() != dim) {
            return Err(Error::Shape(format!(
                "metric `{label}` must be {dim}x{dim}"
            )));
        }
        let entries: Vec<Expr> = entries.into_iter().flatten().collect();
        for e in &entries {
            for v in e.variables() {
                if names.get(v.index).map(String::as_str) != Some(v.name.as_ref()) {
                    return Err(crate::expr::ExprError::UnknownVariable(v.name.to_string()).into());
                }
            }
        }
        let mut d1 = Vec::with_capacity(dim * dim * dim);
        for e in &entries {
            for k in 0..dim {
                d1.push(e.derivative(k));
            }
        }
        let mut d2 = Vec::with_capacity(d1.len() * dim);
        for e in &d1 {
            for l in 0..dim {
                d2.push(e.derivative(l));
            }
        }
        Ok(MetricField {
            label: label.to_string(),
            names,
            entries,
            d1,
            d2,
        })
    }

    /// Parses a metric from a square table of expression strings.
    pub fn parse<S: AsRef<str>>(label: &str, names: &[S], rows: &[Vec<String>]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let entries = rows
            .iter()
            .map(|row| row.iter().map(|src| parse(src, &names)).collect())
            .collect::<std::result::Result<Vec<Vec<Expr>>, _>>()?;
        Self::new(label, names, entries)
    }

    pub fn identity(label: &str, names: Vec<String>) -> Self {
        let dim = names.len();
        let entries = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| Expr::constant(if i == j { 1.0 } else { 0.0 }))
                    .collect()
            })
            .collect();
        Self::new(label, names, entries).expect("identity metric is well formed")
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.dim() + j]
    }

    /// True when every first derivative folded to zero.
    pub fn is_constant(&self) -> bool {
        self.d1.iter().all(Expr::is_zero)
    }

    pub fn value_at(&self, point: &[f64]) -> Result<Array2<f64>> {
        let dim = self.dim();
        let mut g = Array2::zeros((dim, dim));
        for a in 0..dim {
            for b in 0..dim {
                g[[a, b]] = self.entries[a * dim + b].eval(point)?;
            }
        }
        Ok(g)
    }

    /// Checks symmetry at the given points; errors name the first offending pair (1-based).
    pub fn check_symmetric(&self, points: &[Vec<f64>]) -> Result<()> {
        let dim = self.dim();
        for a in 0..dim {
            for b in a + 1..dim {
                let (u, v) = (self.entry(a, b), self.entry(b, a));
                if u == v {
                    continue;
                }
                for pt in points {
                    let (x, y) = (u.eval(pt)?, v.eval(pt)?);
                    if (x - y).abs() > 1e-12 * (1.0 + x.abs().max(y.abs())) {
                        return Err(Error::AsymmetricMetric {
                            metric: self.label.clone(),
                            row: a + 1,
                            col: b + 1,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn check_positive_definite(&self, points: &[Vec<f64>]) -> Result<()> {
        for pt in points {
            if !linalg::is_positive_definite(&self.value_at(pt)?) {
                return Err(Error::NotPositiveDefinite {
                    metric: self.label.clone(),
                    point: pt.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn inverse_at(&self, point: &[f64]) -> Result<Array2<f64>> {
        Ok(linalg::invert(&self.value_at(point)?)?.0)
    }

    /// `∂_k g_{ab}` at `[[a, b, k]]`.
    pub fn first_derivatives(&self, point: &[f64]) -> Result<Array3<f64>> {
        let dim = self.dim();
        let mut dg = Array3::zeros((dim, dim, dim));
        for (idx, e) in self.d1.iter().enumerate() {
            if !e.is_zero() {
                dg[[idx / (dim * dim), (idx / dim) % dim, idx % dim]] = e.eval(point)?;
            }
        }
        Ok(dg)
    }

    fn second_derivatives(&self, point: &[f64]) -> Result<Array4<f64>> {
        let dim = self.dim();
        let mut d = Array4::zeros((dim, dim, dim, dim));
        for (idx, e) in self.d2.iter().enumerate() {
            if !e.is_zero() {
                let l = idx % dim;
                let k = (idx / dim) % dim;
                let b = (idx / (dim * dim)) % dim;
                let a = idx / (dim * dim * dim);
                d[[a, b, k, l]] = e.eval(point)?;
            }
        }
        Ok(d)
    }

    /// Christoffel symbols of the first kind, `C_{lij} = ½(∂_i g_{lj} + ∂_j g_{li} − ∂_l g_{ij})`,
    /// filled for `i <= j` and mirrored so the lower-index symmetry is exact.
    fn first_kind(dg: &Array3<f64>) -> Array3<f64> {
        let dim = dg.shape()[0];
        let mut c = Array3::zeros((dim, dim, dim));
        for l in 0..dim {
            for i in 0..dim {
                for j in i..dim {
                    let v = 0.5 * (dg[[l, j, i]] + dg[[l, i, j]] - dg[[i, j, l]]);
                    c[[l, i, j]] = v;
                    c[[l, j, i]] = v;
                }
            }
        }
        c
    }

    pub fn local(&self, point: &[f64]) -> Result<MetricLocal> {
        let dim = self.dim();
        let g = self.value_at(point)?;
        let (inv, det) = linalg::invert(&g)?;
        let dg = self.first_derivatives(point)?;
        let c = Self::first_kind(&dg);
        let mut gamma = Array3::zeros((dim, dim, dim));
        for k in 0..dim {
            for i in 0..dim {
                for j in i..dim {
                    let mut s = 0.0;
                    for l in 0..dim {
                        s += inv[[k, l]] * c[[l, i, j]];
                    }
                    gamma[[k, i, j]] = s;
                    gamma[[k, j, i]] = s;
                }
            }
        }
        Ok(MetricLocal {
            g,
            inv,
            det,
            dg,
            gamma,
        })
    }

    pub fn christoffel(&self, point: &[f64]) -> Result<Array3<f64>> {
        Ok(self.local(point)?.gamma)
    }

    /// `∂_m Γ^k_{ij}` at `[[k, i, j, m]]`, from exact second derivatives of the entries:
    /// `∂_m Γ^k_{ij} = −g^{ka} ∂_m g_{ab} Γ^b_{ij} + g^{kl} ∂_m C_{lij}`.
    pub fn christoffel_derivative(&self, point: &[f64], local: &MetricLocal) -> Result<Array4<f64>> {
        let dim = self.dim();
        let d2 = self.second_derivatives(point)?;
        let mut dc = Array4::zeros((dim, dim, dim, dim));
        for l in 0..dim {
            for i in 0..dim {
                for j in i..dim {
                    for m in 0..dim {
                        let v = 0.5 * (d2[[l, j, i, m]] + d2[[l, i, j, m]] - d2[[i, j, l, m]]);
                        dc[[l, i, j, m]] = v;
                        dc[[l, j, i, m]] = v;
                    }
                }
            }
        }
        let (inv, dg, gamma) = (&local.inv, &local.dg, &local.gamma);
        let mut out = Array4::zeros((dim, dim, dim, dim));
        for k in 0..dim {
            for i in 0..dim {
                for j in i..dim {
                    for m in 0..dim {
                        let mut s = 0.0;
                        for a in 0..dim {
                            for b in 0..dim {
                                s -= inv[[k, a]] * dg[[a, b, m]] * gamma[[b, i, j]];
                            }
                        }
                        for l in 0..dim {
                            s += inv[[k, l]] * dc[[l, i, j, m]];
                        }
                        out[[k, i, j, m]] = s;
                        out[[k, j, i, m]] = s;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn curvature_from(local: &MetricLocal, dgamma: &Array4<f64>) -> CurvatureBundle {
        let dim = local.g.nrows();
        let gamma = &local.gamma;
        let mut riemann = Array4::zeros((dim, dim, dim, dim));
        for l in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    for k in 0..dim {
                        let mut s = dgamma[[l, i, k, j]] - dgamma[[l, i, j, k]];
                        for m in 0..dim {
                            s += gamma[[l, j, m]] * gamma[[m, i, k]] - gamma[[l, k, m]] * gamma[[m, i, j]];
                        }
                        riemann[[l, i, j, k]] = s;
                    }
                }
            }
        }
        let mut ricci = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                let mut s = 0.0;
                for m in 0..dim {
                    s += riemann[[m, i, m, j]];
                }
                ricci[[i, j]] = s;
            }
        }
        let mut scalar = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                scalar += local.inv[[i, j]] * ricci[[i, j]];
            }
        }
        CurvatureBundle {
            riemann,
            ricci,
            scalar,
        }
    }

    pub fn curvature(&self, point: &[f64]) -> Result<CurvatureBundle> {
        let local = self.local(point)?;
        let dgamma = self.christoffel_derivative(point, &local)?;
        Ok(Self::curvature_from(&local, &dgamma))
    }
}
