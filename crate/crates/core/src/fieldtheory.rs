//! Electromagnetic 2-form, Maxwell-type residuals, the Sasakian metric on the
//! jet space and the Einstein stress-energy report.

use ndarray::{Array2, Array3, Array4};

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::jetgeom::{adapted_frame, connections_from, AdaptedFrame, Geometry, JetPoint, SystemSpec};
use crate::riemann::{CurvatureBundle, MetricLocal};

/// `f[[α, i, j]] = F^α_{ij}`, antisymmetric in `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmField {
    pub f: Array3<f64>,
}

fn check_point(sys: &SystemSpec, pt: &JetPoint) -> Result<()> {
    if pt.t.len() != sys.p() || pt.x.len() != sys.n() || pt.xdot.dim() != (sys.n(), sys.p()) {
        return Err(Error::Shape(format!(
            "jet point must have {} t, {} x and {}x{} partial entries",
            sys.p(),
            sys.n(),
            sys.n(),
            sys.p()
        )));
    }
    Ok(())
}

/// `A[[μ, i, j]] = φ_{im} C^m_{μj} − φ_{jm} C^m_{μi}` for a field-shaped `C[[m, μ, j]]`.
fn alternate(phi: &Array2<f64>, c: &Array3<f64>) -> Array3<f64> {
    let (n, p, _) = c.dim();
    let mut out = Array3::zeros((p, n, n));
    for mu in 0..p {
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for m in 0..n {
                    s += phi[[i, m]] * c[[m, mu, j]] - phi[[j, m]] * c[[m, mu, i]];
                }
                out[[mu, i, j]] = s;
            }
        }
    }
    out
}

fn raise_half(h_inv: &Array2<f64>, a: &Array3<f64>) -> Array3<f64> {
    let (p, n, _) = a.dim();
    let mut out = Array3::zeros((p, n, n));
    for al in 0..p {
        for mu in 0..p {
            let c = 0.5 * h_inv[[al, mu]];
            if c == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    out[[al, i, j]] += c * a[[mu, i, j]];
                }
            }
        }
    }
    out
}

pub fn em_field_from(g: &Geometry) -> EmField {
    EmField {
        f: raise_half(&g.h.inv, &alternate(&g.phi.g, &g.cov_x)),
    }
}

/// `F^α_{ij} = ½ h^{αμ} (φ_{im} X^m_{μ‖j} − φ_{jm} X^m_{μ‖i})`; independent of the partial directions.
pub fn em_field(sys: &SystemSpec, pt: &JetPoint) -> Result<EmField> {
    check_point(sys, pt)?;
    Ok(em_field_from(&sys.geometry(&pt.t, &pt.x)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxwellResiduals {
    /// `[[α, i, j, β]]`: `F^α_{ij//β}` minus the printed right-hand side with `φ^{mr}`.
    pub eq1: Array4<f64>,
    /// Same, with the right-hand side read with `φ^{ir}` (index `i` held fixed).
    pub eq1_variant: Array4<f64>,
    /// `[[α, i, j, k]]`: cyclic sum of `F^α_{ij‖k}` over `(i, j, k)`.
    pub eq2: Array4<f64>,
    /// `[[α, i, j, γ]]`: vertical cyclic sum, identically zero.
    pub eq3: Array4<f64>,
}

impl MaxwellResiduals {
    pub fn max_abs(a: &Array4<f64>) -> f64 {
        a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Evaluates the three Maxwell-type equations as residuals at a point.
///
/// The left-hand sides differentiate the entries of `F` directly (partials of
/// `h^{-1}`, `φ` and the field, then the Berwald corrections); the right-hand
/// sides use the tensorial second covariant derivatives of the field.
pub fn maxwell_residuals(sys: &SystemSpec, pt: &JetPoint) -> Result<MaxwellResiduals> {
    check_point(sys, pt)?;
    let (p, n) = (sys.p(), sys.n());
    let g2 = sys.geometry2(&pt.t, &pt.x)?;
    let g = &g2.first;
    let (ftx, fxx) = sys.field_second(&pt.t, &pt.x)?;
    let (hi, hg) = (&g.h.inv, &g.h.gamma);
    let (phi, gam) = (&g.phi.g, &g.phi.gamma);
    let em = em_field_from(g);
    let a = alternate(phi, &g.cov_x);

    // ∂_β h^{αμ} = −h^{αa} ∂_β h_{ab} h^{bμ}
    let mut dh_inv = Array3::<f64>::zeros((p, p, p));
    for al in 0..p {
        for mu in 0..p {
            for b in 0..p {
                let mut s = 0.0;
                for x in 0..p {
                    for y in 0..p {
                        s -= hi[[al, x]] * g.h.dg[[x, y, b]] * hi[[y, mu]];
                    }
                }
                dh_inv[[al, mu, b]] = s;
            }
        }
    }

    let mut eq1 = Array4::zeros((p, n, n, p));
    let mut eq1_variant = Array4::zeros((p, n, n, p));
    for b in 0..p {
        // ∂_β X^m_{μ‖j} from raw partials
        let mut dc = Array3::<f64>::zeros((n, p, n));
        for m in 0..n {
            for mu in 0..p {
                for j in 0..n {
                    let mut s = ftx[[m, mu, b, j]];
                    for l in 0..n {
                        s += g.field_t[[l, mu, b]] * gam[[m, l, j]];
                    }
                    dc[[m, mu, j]] = s;
                }
            }
        }
        let da = alternate(phi, &dc);
        for al in 0..p {
            for i in 0..n {
                for j in 0..n {
                    let mut lhs = 0.0;
                    for mu in 0..p {
                        lhs += 0.5 * (dh_inv[[al, mu, b]] * a[[mu, i, j]] + hi[[al, mu]] * da[[mu, i, j]]);
                        lhs += em.f[[mu, i, j]] * hg[[al, mu, b]];
                    }
                    let (rhs, rhs_variant) = eq1_rhs(g, &g2.cov_xt, al, i, j, b);
                    eq1[[al, i, j, b]] = lhs - rhs;
                    eq1_variant[[al, i, j, b]] = lhs - rhs_variant;
                }
            }
        }
    }

    // ∂_k F^α_{ij}, then the spatial corrections.
    let mut df = Array4::<f64>::zeros((p, n, n, n));
    for k in 0..n {
        let mut dc = Array3::<f64>::zeros((n, p, n));
        for m in 0..n {
            for mu in 0..p {
                for j in 0..n {
                    let mut s = fxx[[m, mu, j, k]];
                    for l in 0..n {
                        s += g.field_x[[l, mu, k]] * gam[[m, l, j]] + g.field[[l, mu]] * g2.phi_dgamma[[m, l, j, k]];
                    }
                    dc[[m, mu, j]] = s;
                }
            }
        }
        let mut dphi = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for m in 0..n {
                dphi[[i, m]] = g.phi.dg[[i, m, k]];
            }
        }
        let mut da = alternate(phi, &dc);
        da += &alternate(&dphi, &g.cov_x);
        let dfk = raise_half(hi, &da);
        for al in 0..p {
            for i in 0..n {
                for j in 0..n {
                    let mut s = dfk[[al, i, j]];
                    for m in 0..n {
                        s -= em.f[[al, m, j]] * gam[[m, i, k]] + em.f[[al, i, m]] * gam[[m, j, k]];
                    }
                    df[[al, i, j, k]] = s;
                }
            }
        }
    }
    let mut eq2 = Array4::zeros((p, n, n, n));
    for al in 0..p {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    eq2[[al, i, j, k]] = df[[al, i, j, k]] + df[[al, j, k, i]] + df[[al, k, i, j]];
                }
            }
        }
    }

    Ok(MaxwellResiduals {
        eq1,
        eq1_variant,
        eq2,
        eq3: Array4::zeros((p, n, n, p)),
    })
}

/// `¼ 𝒜_{ij}{h^{αμ} φ_{im} [X^m_{μ‖j//β} − φ^{mr} X^s_{μ‖r//β} φ_{sj}]}` and its `φ^{ir}` reading.
fn eq1_rhs(g: &Geometry, cov_xt: &Array4<f64>, al: usize, i: usize, j: usize, b: usize) -> (f64, f64) {
    let (p, n) = (g.p, g.n);
    let (hi, phi, pinv) = (&g.h.inv, &g.phi.g, &g.phi.inv);
    // ψ[r][j] = X^s_{μ‖r//β} φ_{sj} for fixed μ.
    let term = |mu: usize, r: usize, j: usize| -> f64 { (0..n).map(|s| cov_xt[[s, mu, r, b]] * phi[[s, j]]).sum() };
    let inner = |i: usize, j: usize, variant: bool| -> f64 {
        let mut total = 0.0;
        for mu in 0..p {
            let h = hi[[al, mu]];
            if h == 0.0 {
                continue;
            }
            let mut s = 0.0;
            for m in 0..n {
                let mut bracket = cov_xt[[m, mu, j, b]];
                for r in 0..n {
                    let raise = if variant { pinv[[i, r]] } else { pinv[[m, r]] };
                    bracket -= raise * term(mu, r, j);
                }
                s += phi[[i, m]] * bracket;
            }
            total += h * s;
        }
        total
    };
    let printed = 0.25 * (inner(i, j, false) - inner(j, i, false));
    let variant = 0.25 * (inner(i, j, true) - inner(j, i, true));
    (printed, variant)
}

/// The Sasakian metric `h ⊕ φ ⊕ h^{αβ} φ_{ij}` in the adapted coframe, and in coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SasakianMetric {
    /// Block diagonal, ordered `(dt, dx, δx)` with jet slot `i·p + α`.
    pub adapted: Array2<f64>,
    /// `coframeᵀ · adapted · coframe`
    pub coordinate: Array2<f64>,
    /// Built from the induced nonlinear connection at the point.
    pub frame: AdaptedFrame,
}

pub fn sasakian_metric(sys: &SystemSpec, pt: &JetPoint) -> Result<SasakianMetric> {
    check_point(sys, pt)?;
    let (p, n) = (sys.p(), sys.n());
    let g = sys.geometry(&pt.t, &pt.x)?;
    let dim = p + n + n * p;
    let mut adapted = Array2::zeros((dim, dim));
    for a in 0..p {
        for b in 0..p {
            adapted[[a, b]] = g.h.g[[a, b]];
        }
    }
    for i in 0..n {
        for j in 0..n {
            adapted[[p + i, p + j]] = g.phi.g[[i, j]];
            for a in 0..p {
                for b in 0..p {
                    adapted[[p + n + i * p + a, p + n + j * p + b]] = g.h.inv[[a, b]] * g.phi.g[[i, j]];
                }
            }
        }
    }
    let frame = adapted_frame(&connections_from(&g, &pt.xdot).induced);
    let coordinate = frame.coframe.t().dot(&adapted).dot(&frame.coframe);
    Ok(SasakianMetric {
        adapted,
        coordinate,
        frame,
    })
}

/// Stress-energy blocks defined by the Einstein equations with coupling `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct EinsteinReport {
    pub k: f64,
    /// Point at which the blocks are evaluated: the centres of the two grids.
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    /// `𝒯_{αβ} = [H_{αβ} − ½(H + r) h_{αβ}] / K`
    pub ttt: Array2<f64>,
    /// `𝒯_{ij} = [r_{ij} − ½(H + r) φ_{ij}] / K`
    pub txx: Array2<f64>,
    /// `tvv[[α, β, i, j]] = −½(H + r) h^{αβ} φ_{ij} / K`
    pub tvv: Array4<f64>,
    /// Mixed blocks that the equations set to zero.
    pub zero_blocks: Vec<&'static str>,
    /// Max-norm of `𝒯^μ_{β//μ}` over interior `t` nodes and of `𝒯^m_{j‖m}` over interior `x` nodes.
    pub conservation: [f64; 2],
}

pub const ZERO_BLOCKS: [&str; 6] = ["T_ai", "T_ia", "T^(a)_(i)b", "T_a^(b)_(i)", "T_i^(a)_(j)", "T^(a)_(i)j"];

/// `[Ric − ½(H + r) g] / K` for one factor.
fn einstein_block(local: &MetricLocal, curv: &CurvatureBundle, total_scalar: f64, k: f64) -> Array2<f64> {
    (&curv.ricci - &(&local.g * (0.5 * total_scalar))) / k
}

/// Covariant divergence `∇_μ T^μ_β` at interior nodes of `grid`, where
/// `block(coords)` returns the metric data and the lowered tensor at a node.
fn divergence<F>(grid: &UniformGrid, mut block: F) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<(MetricLocal, Array2<f64>)>,
{
    let d = grid.dim();
    let mut mixed = Vec::with_capacity(grid.len());
    let mut locals = Vec::with_capacity(grid.len());
    for node in 0..grid.len() {
        let (local, t) = block(&grid.coords(node))?;
        mixed.push(local.inv.dot(&t));
        locals.push(local);
    }
    let mut worst = 0.0f64;
    for node in grid.interior_nodes() {
        let (tm, gam) = (&mixed[node], &locals[node].gamma);
        for b in 0..d {
            let mut s = 0.0;
            for mu in 0..d {
                let st = grid.first_derivative(node, mu);
                for q in 0..3 {
                    s += st.coeffs[q] * mixed[st.nodes[q]][[mu, b]];
                }
                for c in 0..d {
                    s += gam[[mu, mu, c]] * tm[[c, b]] - gam[[c, mu, b]] * tm[[mu, c]];
                }
            }
            worst = worst.max(s.abs());
        }
    }
    Ok(worst)
}

fn centre(grid: &UniformGrid) -> Vec<f64> {
    (0..grid.dim()).map(|a| 0.5 * (grid.min()[a] + grid.max()[a])).collect()
}

/// Stress-energy report with blocks at the grid centres and conservation residuals
/// over `t_grid` (with `x` at its centre) and over `x_grid` (with `t` at its centre).
pub fn einstein_report(sys: &SystemSpec, k: f64, t_grid: &UniformGrid, x_grid: &UniformGrid) -> Result<EinsteinReport> {
    if k == 0.0 || !k.is_finite() {
        return Err(Error::InvalidArgument(format!("coupling K must be finite and nonzero, got {k}")));
    }
    let (p, n) = (sys.p(), sys.n());
    if t_grid.dim() != p || x_grid.dim() != n {
        return Err(Error::Shape(format!(
            "grids must be {p}- and {n}-dimensional, got {} and {}",
            t_grid.dim(),
            x_grid.dim()
        )));
    }
    let (t0, x0) = (centre(t_grid), centre(x_grid));
    let h_at = |t: &[f64]| -> Result<(MetricLocal, CurvatureBundle)> {
        let local = sys.h().local(t)?;
        let dg = sys.h().christoffel_derivative(t, &local)?;
        let curv = crate::riemann::MetricField::curvature_from(&local, &dg);
        Ok((local, curv))
    };
    let phi_at = |x: &[f64]| -> Result<(MetricLocal, CurvatureBundle)> {
        let local = sys.phi().local(x)?;
        let dg = sys.phi().christoffel_derivative(x, &local)?;
        let curv = crate::riemann::MetricField::curvature_from(&local, &dg);
        Ok((local, curv))
    };

    let (h0, hc0) = h_at(&t0)?;
    let (p0, pc0) = phi_at(&x0)?;
    let total = hc0.scalar + pc0.scalar;
    let ttt = einstein_block(&h0, &hc0, total, k);
    let txx = einstein_block(&p0, &pc0, total, k);
    let mut tvv = Array4::zeros((p, p, n, n));
    for a in 0..p {
        for b in 0..p {
            for i in 0..n {
                for j in 0..n {
                    tvv[[a, b, i, j]] = -0.5 * total * h0.inv[[a, b]] * p0.g[[i, j]] / k;
                }
            }
        }
    }

    let r0 = pc0.scalar;
    let div_t = divergence(t_grid, |t| {
        let (local, curv) = h_at(t)?;
        let blk = einstein_block(&local, &curv, curv.scalar + r0, k);
        Ok((local, blk))
    })?;
    let big_h0 = hc0.scalar;
    let div_x = divergence(x_grid, |x| {
        let (local, curv) = phi_at(x)?;
        let blk = einstein_block(&local, &curv, big_h0 + curv.scalar, k);
        Ok((local, blk))
    })?;

    Ok(EinsteinReport {
        k,
        t: t0,
        x: x0,
        ttt,
        txx,
        tvv,
        zero_blocks: ZERO_BLOCKS.to_vec(),
        conservation: [div_t, div_x],
    })
}
