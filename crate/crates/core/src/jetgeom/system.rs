use ndarray::{Array2, Array3, Array4};

use crate::error::{Error, Result};
use crate::expr::{parse, Expr, ExprError};
use crate::riemann::{CurvatureBundle, MetricField, MetricLocal};

/// A first-order system `x^i_α = X^i_α(t, x)` together with metrics `h` on T and `φ` on M.
///
/// Field entries are expressions over the concatenated list `t1..tp, x1..xn`.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    p: usize,
    n: usize,
    t_names: Vec<String>,
    x_names: Vec<String>,
    h: MetricField,
    phi: MetricField,
    /// `X^i_α` at `i * p + α`.
    field: Vec<Expr>,
    /// `∂X^i_α/∂v` at `(i * p + α) * (p + n) + v` for `v` over all variables.
    dfield: Vec<Expr>,
    /// `∂²X^i_α/∂v∂w` at `((i * p + α) * (p + n) + v) * (p + n) + w`.
    ddfield: Vec<Expr>,
}

/// A point `(t, x, ẋ)` of the first jet space; `xdot[[i, α]] = x^i_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub xdot: Array2<f64>,
}

impl JetPoint {
    pub fn new(t: Vec<f64>, x: Vec<f64>, xdot: Array2<f64>) -> Self {
        JetPoint { t, x, xdot }
    }

    /// A point with zero partial directions.
    pub fn at_rest(t: Vec<f64>, x: Vec<f64>) -> Self {
        let (n, p) = (x.len(), t.len());
        JetPoint {
            t,
            x,
            xdot: Array2::zeros((n, p)),
        }
    }
}

/// First-order data at `(t, x)`: metric kernels, field values and covariant derivatives.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub p: usize,
    pub n: usize,
    pub h: MetricLocal,
    pub phi: MetricLocal,
    /// `field[[i, α]] = X^i_α`
    pub field: Array2<f64>,
    /// `field_t[[i, α, β]] = ∂X^i_α/∂t^β`
    pub field_t: Array3<f64>,
    /// `field_x[[i, α, j]] = ∂X^i_α/∂x^j`
    pub field_x: Array3<f64>,
    /// `cov_t[[i, α, β]] = X^i_{α//β}`
    pub cov_t: Array3<f64>,
    /// `cov_x[[i, α, j]] = X^i_{α‖j}`
    pub cov_x: Array3<f64>,
}

/// Second-order data: curvature and second covariant derivatives of the field.
#[derive(Debug, Clone)]
pub struct Geometry2 {
    pub first: Geometry,
    /// `h_dgamma[[μ, α, β, γ]] = ∂_γ H^μ_{αβ}`
    pub h_dgamma: Array4<f64>,
    /// `phi_dgamma[[i, j, k, l]] = ∂_l γ^i_{jk}`
    pub phi_dgamma: Array4<f64>,
    pub h_curvature: CurvatureBundle,
    pub phi_curvature: CurvatureBundle,
    /// `cov_xt[[i, α, j, β]] = X^i_{α‖j//β}`
    pub cov_xt: Array4<f64>,
    /// `cov_xx[[i, α, j, k]] = X^i_{α‖j‖k}`
    pub cov_xx: Array4<f64>,
}

impl SystemSpec {
    pub fn new(
        t_names: Vec<String>,
        x_names: Vec<String>,
        h: MetricField,
        phi: MetricField,
        field: Vec<Vec<Expr>>,
    ) -> Result<Self> {
        let (p, n) = (t_names.len(), x_names.len());
        if p == 0 || n == 0 {
            return Err(Error::Shape("p and n must be positive".into()));
        }
        if h.names() != t_names.as_slice() {
            return Err(Error::Shape("metric h must be declared over t1..tp".into()));
        }
        if phi.names() != x_names.as_slice() {
            return Err(Error::Shape("metric phi must be declared over x1..xn".into()));
        }
        let all: Vec<String> = t_names.iter().chain(&x_names).cloned().collect();
        for (k, name) in all.iter().enumerate() {
            if all[..k].contains(name) {
                return Err(Error::InvalidArgument(format!("duplicate variable `{name}`")));
            }
        }
        if field.len() != n || field.iter().any(|row| row.len() != p) {
            return Err(Error::Shape(format!("field X must be {n}x{p}")));
        }
        let field: Vec<Expr> = field.into_iter().flatten().collect();
        for e in &field {
            for v in e.variables() {
                if all.get(v.index).map(String::as_str) != Some(v.name.as_ref()) {
                    return Err(ExprError::UnknownVariable(v.name.to_string()).into());
                }
            }
        }
        let nv = p + n;
        let mut dfield = Vec::with_capacity(field.len() * nv);
        for e in &field {
            for v in 0..nv {
                dfield.push(e.derivative(v));
            }
        }
        let mut ddfield = Vec::with_capacity(dfield.len() * nv);
        for e in &dfield {
            for w in 0..nv {
                ddfield.push(e.derivative(w));
            }
        }
        Ok(SystemSpec {
            p,
            n,
            t_names,
            x_names,
            h,
            phi,
            field,
            dfield,
            ddfield,
        })
    }

    /// Parses field entries (`rows[i][α]`) over `t_names ++ x_names`.
    pub fn parse(
        t_names: Vec<String>,
        x_names: Vec<String>,
        h: MetricField,
        phi: MetricField,
        rows: &[Vec<String>],
    ) -> Result<Self> {
        let all: Vec<String> = t_names.iter().chain(&x_names).cloned().collect();
        let field = rows
            .iter()
            .map(|row| row.iter().map(|src| parse(src, &all)).collect())
            .collect::<std::result::Result<Vec<Vec<Expr>>, _>>()?;
        Self::new(t_names, x_names, h, phi, field)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_names(&self) -> &[String] {
        &self.t_names
    }

    pub fn x_names(&self) -> &[String] {
        &self.x_names
    }

    /// `t1..tp, x1..xn` in evaluation order.
    pub fn variable_names(&self) -> Vec<String> {
        self.t_names.iter().chain(&self.x_names).cloned().collect()
    }

    pub fn h(&self) -> &MetricField {
        &self.h
    }

    pub fn phi(&self) -> &MetricField {
        &self.phi
    }

    pub fn field_entry(&self, i: usize, alpha: usize) -> &Expr {
        &self.field[i * self.p + alpha]
    }

    fn vars(&self, t: &[f64], x: &[f64]) -> Vec<f64> {
        t.iter().chain(x).copied().collect()
    }

    pub fn field_at(&self, t: &[f64], x: &[f64]) -> Result<Array2<f64>> {
        let v = self.vars(t, x);
        let mut out = Array2::zeros((self.n, self.p));
        for i in 0..self.n {
            for a in 0..self.p {
                out[[i, a]] = self.field[i * self.p + a].eval(&v)?;
            }
        }
        Ok(out)
    }

    /// Field values and their first partials: `(X, ∂X/∂t, ∂X/∂x)`.
    pub fn field_jet(&self, t: &[f64], x: &[f64]) -> Result<(Array2<f64>, Array3<f64>, Array3<f64>)> {
        let (p, n) = (self.p, self.n);
        let nv = p + n;
        let v = self.vars(t, x);
        let field = self.field_at(t, x)?;
        let mut ft = Array3::zeros((n, p, p));
        let mut fx = Array3::zeros((n, p, n));
        for i in 0..n {
            for a in 0..p {
                let base = (i * p + a) * nv;
                for w in 0..nv {
                    let e = &self.dfield[base + w];
                    if e.is_zero() {
                        continue;
                    }
                    let val = e.eval(&v)?;
                    if w < p {
                        ft[[i, a, w]] = val;
                    } else {
                        fx[[i, a, w - p]] = val;
                    }
                }
            }
        }
        Ok((field, ft, fx))
    }

    /// `(∂²X/∂t^β∂x^j at [[i, α, β, j]], ∂²X/∂x^j∂x^k at [[i, α, j, k]])`.
    pub(crate) fn field_second(&self, t: &[f64], x: &[f64]) -> Result<(Array4<f64>, Array4<f64>)> {
        let (p, n) = (self.p, self.n);
        let nv = p + n;
        let v = self.vars(t, x);
        let mut ftx = Array4::zeros((n, p, p, n));
        let mut fxx = Array4::zeros((n, p, n, n));
        for i in 0..n {
            for a in 0..p {
                for j in 0..n {
                    let base = ((i * p + a) * nv + p + j) * nv;
                    for w in 0..nv {
                        let e = &self.ddfield[base + w];
                        if e.is_zero() {
                            continue;
                        }
                        let val = e.eval(&v)?;
                        if w < p {
                            ftx[[i, a, w, j]] = val;
                        } else {
                            fxx[[i, a, j, w - p]] = val;
                        }
                    }
                }
            }
        }
        Ok((ftx, fxx))
    }

    pub fn geometry(&self, t: &[f64], x: &[f64]) -> Result<Geometry> {
        let (p, n) = (self.p, self.n);
        let h = self.h.local(t)?;
        let phi = self.phi.local(x)?;
        let (field, field_t, field_x) = self.field_jet(t, x)?;
        let mut cov_t = Array3::zeros((n, p, p));
        let mut cov_x = Array3::zeros((n, p, n));
        for i in 0..n {
            for a in 0..p {
                for b in 0..p {
                    let mut s = field_t[[i, a, b]];
                    for mu in 0..p {
                        s -= field[[i, mu]] * h.gamma[[mu, a, b]];
                    }
                    cov_t[[i, a, b]] = s;
                }
                for j in 0..n {
                    let mut s = field_x[[i, a, j]];
                    for m in 0..n {
                        s += field[[m, a]] * phi.gamma[[i, m, j]];
                    }
                    cov_x[[i, a, j]] = s;
                }
            }
        }
        Ok(Geometry {
            p,
            n,
            h,
            phi,
            field,
            field_t,
            field_x,
            cov_t,
            cov_x,
        })
    }

    pub fn geometry2(&self, t: &[f64], x: &[f64]) -> Result<Geometry2> {
        let g = self.geometry(t, x)?;
        let (p, n) = (self.p, self.n);
        let h_dgamma = self.h.christoffel_derivative(t, &g.h)?;
        let phi_dgamma = self.phi.christoffel_derivative(x, &g.phi)?;
        let h_curvature = MetricField::curvature_from(&g.h, &h_dgamma);
        let phi_curvature = MetricField::curvature_from(&g.phi, &phi_dgamma);
        let (ftx, fxx) = self.field_second(t, x)?;
        let gam = &g.phi.gamma;
        let hg = &g.h.gamma;

        // ∂_β X^i_{α‖j} = ∂²X^i_α/∂t^β∂x^j + ∂_β X^m_α γ^i_{mj}
        let mut cov_xt = Array4::zeros((n, p, n, p));
        for i in 0..n {
            for a in 0..p {
                for j in 0..n {
                    for b in 0..p {
                        let mut d = ftx[[i, a, b, j]];
                        for m in 0..n {
                            d += g.field_t[[m, a, b]] * gam[[i, m, j]];
                        }
                        for mu in 0..p {
                            d -= g.cov_x[[i, mu, j]] * hg[[mu, a, b]];
                        }
                        cov_xt[[i, a, j, b]] = d;
                    }
                }
            }
        }
        // ∂_k X^i_{α‖j} = ∂²X^i_α/∂x^j∂x^k + ∂_k X^m_α γ^i_{mj} + X^m_α ∂_k γ^i_{mj}
        let mut cov_xx = Array4::zeros((n, p, n, n));
        for i in 0..n {
            for a in 0..p {
                for j in 0..n {
                    for k in 0..n {
                        let mut d = fxx[[i, a, j, k]];
                        for m in 0..n {
                            d += g.field_x[[m, a, k]] * gam[[i, m, j]];
                            d += g.field[[m, a]] * phi_dgamma[[i, m, j, k]];
                        }
                        for m in 0..n {
                            d += g.cov_x[[m, a, j]] * gam[[i, m, k]];
                            d -= g.cov_x[[i, a, m]] * gam[[m, j, k]];
                        }
                        cov_xx[[i, a, j, k]] = d;
                    }
                }
            }
        }
        Ok(Geometry2 {
            first: g,
            h_dgamma,
            phi_dgamma,
            h_curvature,
            phi_curvature,
            cov_xt,
            cov_xx,
        })
    }

    /// Checks metric symmetry and positive definiteness at the given `(t, x)` samples.
    pub fn validate_metrics(&self, t_samples: &[Vec<f64>], x_samples: &[Vec<f64>]) -> Result<()> {
        self.h.check_symmetric(t_samples)?;
        self.phi.check_symmetric(x_samples)?;
        self.h.check_positive_definite(t_samples)?;
        self.phi.check_positive_definite(x_samples)?;
        Ok(())
    }
}
