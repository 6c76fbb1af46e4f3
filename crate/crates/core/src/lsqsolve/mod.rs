//! Least-squares formulation of a first-order system.
//!
//! A map `x: T → M` solves the system exactly when the Lagrangian
//! `L = h^{αβ} φ_{ij} (x^i_α − X^i_α)(x^j_β − X^j_β)` vanishes everywhere, so the
//! system is solved by minimizing `E = ∫ L √h dt`. Maps are sampled on a
//! [`UniformGrid`]; partial directions come from second-order stencils and the
//! integral from the trapezoid rule.

mod minimize;
mod prolong;
mod smooth;

use ndarray::{Array2, Array3};

pub use minimize::{minimize, DescentMetric, MinimizeOptions, MinimizeOutcome, Termination};
pub use prolong::{prolong, DimensionReport, HigherOrderSpec, Prolongation};
pub use smooth::{el_oracle_at, smooth_coherence, SmoothMap};

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::jetgeom::{electrodynamics_from, spray_from, Geometry, JetPoint, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Values pinned on the face where `t^1` is minimal.
    FixedInitial,
    /// Values pinned on the whole boundary of the box.
    FixedAll,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    grid: UniformGrid,
    n: usize,
    /// `values[node * n + i] = x^i(node)`
    values: Vec<f64>,
    boundary: Boundary,
}

impl GridMap {
    pub fn new(grid: UniformGrid, n: usize, values: Vec<f64>, boundary: Boundary) -> Result<Self> {
        if values.len() != grid.len() * n {
            return Err(Error::Shape(format!(
                "grid map needs {} values, got {}",
                grid.len() * n,
                values.len()
            )));
        }
        Ok(GridMap {
            grid,
            n,
            values,
            boundary,
        })
    }

    /// Samples `f(t)` at every node.
    pub fn from_fn<F>(grid: UniformGrid, n: usize, boundary: Boundary, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        let mut values = Vec::with_capacity(grid.len() * n);
        for node in 0..grid.len() {
            let v = f(&grid.coords(node));
            if v.len() != n {
                return Err(Error::Shape(format!("map value must have {n} entries")));
            }
            values.extend(v);
        }
        Self::new(grid, n, values, boundary)
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, node: usize) -> &[f64] {
        &self.values[node * self.n..(node + 1) * self.n]
    }

    pub fn is_pinned(&self, node: usize) -> bool {
        match self.boundary {
            Boundary::FixedInitial => self.grid.index_along(node, 0) == 0,
            Boundary::FixedAll => self.grid.is_boundary(node),
        }
    }

    /// Stencil partial directions `xdot[[i, α]]` at a node.
    pub fn partials(&self, node: usize) -> Array2<f64> {
        let (n, p) = (self.n, self.grid.dim());
        let mut xdot = Array2::zeros((n, p));
        for a in 0..p {
            let s = self.grid.first_derivative(node, a);
            for q in 0..3 {
                let c = s.coeffs[q];
                if c == 0.0 {
                    continue;
                }
                let v = self.value(s.nodes[q]);
                for i in 0..n {
                    xdot[[i, a]] += c * v[i];
                }
            }
        }
        xdot
    }

    pub fn jet_at(&self, node: usize) -> JetPoint {
        JetPoint::new(self.grid.coords(node), self.value(node).to_vec(), self.partials(node))
    }

    /// Central second differences `x^i_{αβ}` at an interior node, `[[i, α, β]]`.
    pub fn second_partials(&self, node: usize) -> Array3<f64> {
        let (n, p) = (self.n, self.grid.dim());
        let mut out = Array3::zeros((n, p, p));
        for a in 0..p {
            for b in a..p {
                for (m, c) in self.grid.second_derivative(node, a, b) {
                    let v = self.value(m);
                    for i in 0..n {
                        out[[i, a, b]] += c * v[i];
                    }
                }
                if a != b {
                    for i in 0..n {
                        out[[i, b, a]] = out[[i, a, b]];
                    }
                }
            }
        }
        out
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    fn check(&self, sys: &SystemSpec) -> Result<()> {
        if self.grid.dim() != sys.p() || self.n != sys.n() {
            return Err(Error::Shape(format!(
                "map is {}→{} dimensional, system is {}→{}",
                self.grid.dim(),
                self.n,
                sys.p(),
                sys.n()
            )));
        }
        Ok(())
    }
}

/// One value per listed node, e.g. residuals on the interior of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeField {
    pub nodes: Vec<usize>,
    /// Row `r` belongs to `nodes[r]`.
    pub values: Array2<f64>,
}

impl NodeField {
    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Both expansions of the Lagrangian at one jet point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianForms {
    /// `h^{αβ} φ_{ij} (x^i_α − X^i_α)(x^j_β − X^j_β)`
    pub least_squares: f64,
    /// `h^{αβ} φ_{ij} x^i_α x^j_β + U^α_i x^i_α + Φ`
    pub expanded: f64,
}

pub fn lagrangian_forms(sys: &SystemSpec, pt: &JetPoint) -> Result<LagrangianForms> {
    let g = sys.geometry(&pt.t, &pt.x)?;
    let (p, n) = (g.p, g.n);
    let (hi, phi) = (&g.h.inv, &g.phi.g);
    let mut ls = 0.0;
    let mut kinetic = 0.0;
    for a in 0..p {
        for b in 0..p {
            for i in 0..n {
                for j in 0..n {
                    let c = hi[[a, b]] * phi[[i, j]];
                    ls += c * (pt.xdot[[i, a]] - g.field[[i, a]]) * (pt.xdot[[j, b]] - g.field[[j, b]]);
                    kinetic += c * pt.xdot[[i, a]] * pt.xdot[[j, b]];
                }
            }
        }
    }
    let ed = electrodynamics_from(&g);
    let mut linear = 0.0;
    for a in 0..p {
        for i in 0..n {
            linear += ed.u[[a, i]] * pt.xdot[[i, a]];
        }
    }
    Ok(LagrangianForms {
        least_squares: ls,
        expanded: kinetic + linear + ed.phi,
    })
}

/// The least-squares Lagrangian `‖dx − X‖²` at a jet point.
pub fn lagrangian_at(sys: &SystemSpec, pt: &JetPoint) -> Result<f64> {
    Ok(lagrangian_forms(sys, pt)?.least_squares)
}

/// Per-node `t` data: `h^{-1}`, `√det h` and the quadrature weight.
pub(crate) struct BaseNode {
    pub h_inv: Array2<f64>,
    pub sqrt_h: f64,
    pub weight: f64,
}

pub(crate) fn base_nodes(sys: &SystemSpec, grid: &UniformGrid) -> Result<Vec<BaseNode>> {
    (0..grid.len())
        .map(|node| {
            let t = grid.coords(node);
            let (h_inv, det) = crate::linalg::invert(&sys.h().value_at(&t)?)?;
            Ok(BaseNode {
                h_inv,
                sqrt_h: det.sqrt(),
                weight: grid.weight(node),
            })
        })
        .collect()
}

/// `L` and its partials `∂L/∂x^k`, `∂L/∂x^k_α` at one node.
pub(crate) struct LagrangianPartials {
    pub value: f64,
    pub dx: Vec<f64>,
    /// `[[k, α]]`
    pub dxdot: Array2<f64>,
    /// `∂X^i_α/∂x^j` at `[[i, α, j]]`, reused by the preconditioner.
    pub field_x: Array3<f64>,
    pub phi: Array2<f64>,
}

pub(crate) fn lagrangian_partials(
    sys: &SystemSpec,
    base: &BaseNode,
    t: &[f64],
    x: &[f64],
    xdot: &Array2<f64>,
) -> Result<LagrangianPartials> {
    let (p, n) = (sys.p(), sys.n());
    let phi = sys.phi().value_at(x)?;
    let dphi = sys.phi().first_derivatives(x)?;
    let (field, _, field_x) = sys.field_jet(t, x)?;
    let hi = &base.h_inv;
    let mut r = Array2::zeros((n, p));
    for i in 0..n {
        for a in 0..p {
            r[[i, a]] = xdot[[i, a]] - field[[i, a]];
        }
    }
    let mut value = 0.0;
    let mut dx = vec![0.0; n];
    let mut dxdot = Array2::zeros((n, p));
    for a in 0..p {
        for b in 0..p {
            let hab = hi[[a, b]];
            if hab == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    let c = hab * phi[[i, j]];
                    let rr = r[[i, a]] * r[[j, b]];
                    value += c * rr;
                    for k in 0..n {
                        dx[k] += hab
                            * (dphi[[i, j, k]] * rr
                                - phi[[i, j]] * (field_x[[i, a, k]] * r[[j, b]] + r[[i, a]] * field_x[[j, b, k]]));
                    }
                    dxdot[[i, a]] += c * r[[j, b]];
                    dxdot[[j, b]] += c * r[[i, a]];
                }
            }
        }
    }
    Ok(LagrangianPartials {
        value,
        dx,
        dxdot,
        field_x,
        phi,
    })
}

/// `E = Σ_nodes w · L · √h` (trapezoid rule).
pub fn energy(sys: &SystemSpec, m: &GridMap) -> Result<f64> {
    m.check(sys)?;
    let base = base_nodes(sys, m.grid())?;
    energy_with(sys, m, &base)
}

pub(crate) fn energy_with(sys: &SystemSpec, m: &GridMap, base: &[BaseNode]) -> Result<f64> {
    let grid = m.grid();
    let mut e = 0.0;
    for node in 0..grid.len() {
        let b = &base[node];
        let lp = lagrangian_partials(sys, b, &grid.coords(node), m.value(node), &m.partials(node))?;
        e += b.weight * b.sqrt_h * lp.value;
    }
    Ok(e)
}

/// Pointwise Lagrangian `L` at every node, in node order.
pub fn node_lagrangians(sys: &SystemSpec, m: &GridMap) -> Result<Vec<f64>> {
    m.check(sys)?;
    let base = base_nodes(sys, m.grid())?;
    (0..m.grid().len())
        .map(|node| {
            lagrangian_partials(sys, &base[node], &m.grid().coords(node), m.value(node), &m.partials(node))
                .map(|lp| lp.value)
        })
        .collect()
}

/// Harmonic-form residual `h^{αβ}(x^i_{αβ} + 2H^i_{αβ} + 2G^i_{αβ})` at interior nodes.
pub fn el_residual(sys: &SystemSpec, m: &GridMap) -> Result<NodeField> {
    m.check(sys)?;
    let (p, n) = (sys.p(), sys.n());
    let nodes = m.grid().interior_nodes();
    let mut values = Array2::zeros((nodes.len(), n));
    for (row, &node) in nodes.iter().enumerate() {
        let pt = m.jet_at(node);
        let g = sys.geometry(&pt.t, &pt.x)?;
        let sp = spray_from(&g, &pt.xdot);
        let xx = m.second_partials(node);
        for i in 0..n {
            let mut s = 0.0;
            for a in 0..p {
                for b in 0..p {
                    s += g.h.inv[[a, b]] * (xx[[i, a, b]] + 2.0 * sp.h[[i, a, b]] + 2.0 * sp.g[[i, a, b]]);
                }
            }
            values[[row, i]] = s;
        }
    }
    Ok(NodeField { nodes, values })
}

/// Direct Euler-Lagrange residual `∂𝓛/∂x^k − ∂_α(∂𝓛/∂x^k_α)` of `𝓛 = L√h` at interior nodes.
///
/// The `x`- and `ẋ`-partials are exact; the `t`-divergence of the momentum is a
/// second-order difference of interior node momenta (central, or one-sided next
/// to the boundary). No spray objects are used.
/// On smooth maps it equals `−2√h φ_{kj} · el_residual^j` up to `O(Δt²)`.
pub fn el_oracle_residual(sys: &SystemSpec, m: &GridMap) -> Result<NodeField> {
    m.check(sys)?;
    let (p, n) = (sys.p(), sys.n());
    let grid = m.grid();
    let base = base_nodes(sys, grid)?;
    let momentum = |node: usize| -> Result<(Vec<f64>, Array2<f64>)> {
        let b = &base[node];
        let lp = lagrangian_partials(sys, b, &grid.coords(node), m.value(node), &m.partials(node))?;
        let dx = lp.dx.iter().map(|v| v * b.sqrt_h).collect();
        Ok((dx, lp.dxdot * b.sqrt_h))
    };
    let nodes = grid.interior_nodes();
    let mut values = Array2::zeros((nodes.len(), n));
    for (row, &node) in nodes.iter().enumerate() {
        let (dx, _) = momentum(node)?;
        for k in 0..n {
            values[[row, k]] = dx[k];
        }
        for a in 0..p {
            let s = grid.strides()[a] as isize;
            let k_a = grid.index_along(node, a);
            let inv = 1.0 / (2.0 * grid.spacing(a));
            // Only momenta of interior nodes enter, so every ẋ in the stencil is central.
            let stencil: [(isize, f64); 3] = if k_a == 1 {
                [(0, -3.0), (s, 4.0), (2 * s, -1.0)]
            } else if k_a + 2 == grid.shape()[a] {
                [(0, 3.0), (-s, -4.0), (-2 * s, 1.0)]
            } else {
                [(s, 1.0), (-s, -1.0), (0, 0.0)]
            };
            for (offset, c) in stencil {
                if c == 0.0 {
                    continue;
                }
                let (_, mom) = momentum((node as isize + offset) as usize)?;
                for k in 0..n {
                    values[[row, k]] -= c * mom[[k, a]] * inv;
                }
            }
        }
    }
    Ok(NodeField { nodes, values })
}

/// Agreement between the oracle and the normalized harmonic-form residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coherence {
    /// `max |oracle − (−2√h φ · harmonic)|`
    pub max_abs_diff: f64,
    pub oracle_norm: f64,
    /// `max_abs_diff / max(oracle_norm, 1)`
    pub relative: f64,
}

/// Compares [`el_oracle_residual`] against `−2√h φ · el_residual`.
pub fn el_coherence(sys: &SystemSpec, m: &GridMap) -> Result<Coherence> {
    Ok(el_coherence_signed(sys, m, 1.0)?.0)
}

/// `−2√h φ_{kj} · harmonic^j` for the bracket drift and for the closed-form drift, both scaled by `sign`.
pub(crate) fn normalized_harmonic(
    g: &Geometry,
    xdot: &Array2<f64>,
    xx: &Array3<f64>,
    sign: f64,
) -> (Vec<f64>, Vec<f64>) {
    let (p, n) = (g.p, g.n);
    let sp = spray_from(g, xdot);
    let closed = crate::jetgeom::closed_form_drift(g, xdot);
    let trace: f64 = (0..p)
        .flat_map(|a| (0..p).map(move |b| (a, b)))
        .map(|(a, b)| g.h.inv[[a, b]] * g.h.g[[a, b]])
        .sum();
    let mut harm_bracket = vec![0.0; n];
    let mut harm_closed = vec![0.0; n];
    for i in 0..n {
        let mut s = 0.0;
        for a in 0..p {
            for b in 0..p {
                // spatial spray without its drift part
                let geo = sp.g[[i, a, b]] - g.h.g[[a, b]] * sp.f[i];
                s += g.h.inv[[a, b]] * (xx[[i, a, b]] + 2.0 * sp.h[[i, a, b]] + 2.0 * geo);
            }
        }
        harm_bracket[i] = s + 2.0 * trace * sign * sp.f[i];
        harm_closed[i] = s + 2.0 * trace * sign * closed[i];
    }
    let scale = -2.0 * g.h.det.sqrt();
    let lower = |v: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|k| scale * (0..n).map(|j| g.phi.g[[k, j]] * v[j]).sum::<f64>())
            .collect()
    };
    (lower(&harm_bracket), lower(&harm_closed))
}

/// Like [`el_coherence`], with the drift term replaced by `sign · F`.
/// Also returns the same comparison for the closed-form drift with `sign`.
pub fn el_coherence_signed(sys: &SystemSpec, m: &GridMap, sign: f64) -> Result<(Coherence, Coherence)> {
    m.check(sys)?;
    let oracle = el_oracle_residual(sys, m)?;
    let mut worst_bracket = 0.0f64;
    let mut worst_closed = 0.0f64;
    for (row, &node) in oracle.nodes.iter().enumerate() {
        let pt = m.jet_at(node);
        let g = sys.geometry(&pt.t, &pt.x)?;
        let (nb, nc) = normalized_harmonic(&g, &pt.xdot, &m.second_partials(node), sign);
        for k in 0..sys.n() {
            let o = oracle.values[[row, k]];
            worst_bracket = worst_bracket.max((o - nb[k]).abs());
            worst_closed = worst_closed.max((o - nc[k]).abs());
        }
    }
    let norm = oracle.max_norm();
    Ok((Coherence::new(worst_bracket, norm), Coherence::new(worst_closed, norm)))
}

impl Coherence {
    pub fn new(max_abs_diff: f64, oracle_norm: f64) -> Self {
        Coherence {
            max_abs_diff,
            oracle_norm,
            relative: max_abs_diff / oracle_norm.max(1.0),
        }
    }
}

#[cfg(test)]
mod tests;
