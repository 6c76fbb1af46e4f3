//! Geometric objects attached to a first-order system on the first jet space:
//! covariant derivatives of the field, helicity, the least-squares spray,
//! nonlinear connections, torsion, adapted frames and integrability.
//!
//! Index layout of returned arrays follows the mathematical order of indices,
//! with the upper spatial index first: `cov_x[[i, α, j]] = X^i_{α‖j}`.
//! Partial directions `x^i_α` are stored as `xdot[[i, α]]`.

mod dual;
mod system;

use ndarray::{Array2, Array3, Array4};

pub use dual::{Dual, Scalar};
pub use system::{Geometry, Geometry2, JetPoint, SystemSpec};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ElectrodynamicsData {
    /// `u[[α, i]] = U^α_i = −2 h^{αμ} φ_{im} X^m_μ`
    pub u: Array2<f64>,
    /// `Φ = h^{μν} φ_{rs} X^r_μ X^s_ν`
    pub phi: f64,
    /// `uskew[[α, i, j]] = −2 h^{αμ} (φ_{im} X^m_{μ‖j} − φ_{jm} X^m_{μ‖i})`
    pub uskew: Array3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SprayData {
    /// Temporal coefficients `h[[i, α, β]] = −½ H^γ_{αβ} x^i_γ`.
    pub h: Array3<f64>,
    /// Spatial coefficients `g[[i, α, β]] = ½ γ^i_{jk} x^j_α x^k_β + h_{αβ} F^i`.
    pub g: Array3<f64>,
    /// `gsum[i] = h^{αβ} G^i_{αβ}`
    pub gsum: Vec<f64>,
    /// Drift `F^i = φ^{il} B_l / (4p)`.
    pub f: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Canonical,
    Induced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionPair {
    /// `m[[i, α, β]] = M^i_{αβ}`
    pub m: Array3<f64>,
    /// `n[[i, α, j]] = N^i_{αj}`
    pub n: Array3<f64>,
    pub flavor: Flavor,
}

/// Comparison of the induced `N` with the closed forms `N⁰ ∓ F^i_{jα}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionConsistency {
    /// `max |N − (N⁰ − F)|`
    pub minus: f64,
    /// `max |N − (N⁰ + F)|`
    pub plus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Connections {
    pub canonical: ConnectionPair,
    pub induced: ConnectionPair,
    pub consistency: ConnectionConsistency,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorsionData {
    /// `rtt[[i, α, β, γ]] = R^i_{αβγ}`
    pub rtt: Array4<f64>,
    /// `rtj[[i, α, β, j]] = R^i_{αβj}`
    pub rtj: Array4<f64>,
    /// `rjk[[i, α, j, k]] = R^i_{αjk}`
    pub rjk: Array4<f64>,
}

/// Change of basis between the coordinate frame `(∂_t, ∂_x, ∂_{x_α})` and the
/// adapted frame `(δ/δt, δ/δx, ∂_{x_α})` with its dual `(dt, dx, δx_α)`.
///
/// Row `r` of `frame` holds the coordinate components of the `r`-th adapted
/// vector; row `r` of `coframe` holds the coordinate components of the `r`-th
/// adapted covector. Jet coordinate `x^i_α` sits at column `p + n + i·p + α`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedFrame {
    pub frame: Array2<f64>,
    pub coframe: Array2<f64>,
}

impl AdaptedFrame {
    /// `coframe · frameᵀ`, the duality pairing; the identity for a consistent pair.
    pub fn pairing(&self) -> Array2<f64> {
        self.coframe.dot(&self.frame.t())
    }
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

/// `(X^i_{α//β}, X^i_{α‖j})`.
pub fn cov_derivatives(sys: &SystemSpec, pt: &JetPoint) -> Result<(Array3<f64>, Array3<f64>)> {
    check_point(sys, pt)?;
    let g = sys.geometry(&pt.t, &pt.x)?;
    Ok((g.cov_t, g.cov_x))
}

/// `(X^i_{α‖j//β}` at `[[i, α, j, β]]`, `X^i_{α‖j‖k}` at `[[i, α, j, k]])`.
pub fn second_cov_derivatives(sys: &SystemSpec, pt: &JetPoint) -> Result<(Array4<f64>, Array4<f64>)> {
    check_point(sys, pt)?;
    let g = sys.geometry2(&pt.t, &pt.x)?;
    Ok((g.cov_xt, g.cov_xx))
}

/// `F^i_{jα} = ½ (X^i_{α‖j} − φ^{ir} X^s_{α‖r} φ_{sj})` at `[[i, j, α]]`.
pub fn helicity_from(g: &Geometry) -> Array3<f64> {
    let (p, n) = (g.p, g.n);
    let (phi, inv) = (&g.phi.g, &g.phi.inv);
    let mut out = Array3::zeros((n, n, p));
    for i in 0..n {
        for j in 0..n {
            for a in 0..p {
                let mut s = 0.0;
                for r in 0..n {
                    for q in 0..n {
                        s += inv[[i, r]] * g.cov_x[[q, a, r]] * phi[[q, j]];
                    }
                }
                out[[i, j, a]] = 0.5 * (g.cov_x[[i, a, j]] - s);
            }
        }
    }
    out
}

pub fn helicity(sys: &SystemSpec, pt: &JetPoint) -> Result<Array3<f64>> {
    check_point(sys, pt)?;
    Ok(helicity_from(&sys.geometry(&pt.t, &pt.x)?))
}

pub fn electrodynamics_from(g: &Geometry) -> ElectrodynamicsData {
    let (p, n) = (g.p, g.n);
    let (hi, phi) = (&g.h.inv, &g.phi.g);
    let mut u = Array2::zeros((p, n));
    for a in 0..p {
        for i in 0..n {
            let mut s = 0.0;
            for mu in 0..p {
                for m in 0..n {
                    s += hi[[a, mu]] * phi[[i, m]] * g.field[[m, mu]];
                }
            }
            u[[a, i]] = -2.0 * s;
        }
    }
    let mut big_phi = 0.0;
    for mu in 0..p {
        for nu in 0..p {
            for r in 0..n {
                for s in 0..n {
                    big_phi += hi[[mu, nu]] * phi[[r, s]] * g.field[[r, mu]] * g.field[[s, nu]];
                }
            }
        }
    }
    let mut uskew = Array3::zeros((p, n, n));
    for a in 0..p {
        for i in 0..n {
            for j in i + 1..n {
                let mut s = 0.0;
                for mu in 0..p {
                    for m in 0..n {
                        s += hi[[a, mu]] * (phi[[i, m]] * g.cov_x[[m, mu, j]] - phi[[j, m]] * g.cov_x[[m, mu, i]]);
                    }
                }
                uskew[[a, i, j]] = -2.0 * s;
                uskew[[a, j, i]] = 2.0 * s;
            }
        }
    }
    ElectrodynamicsData {
        u,
        phi: big_phi,
        uskew,
    }
}

pub fn electrodynamics_data(sys: &SystemSpec, pt: &JetPoint) -> Result<ElectrodynamicsData> {
    check_point(sys, pt)?;
    Ok(electrodynamics_from(&sys.geometry(&pt.t, &pt.x)?))
}

/// The partial-direction-free pieces of the spray bracket at `(t, x)`.
struct SprayBracket<'a> {
    geo: &'a Geometry,
    uskew: Array3<f64>,
    /// `∂_μ U^μ_l + U^μ_l H^γ_{μγ} − ∂Φ/∂x^l`
    constant: Vec<f64>,
}

impl<'a> SprayBracket<'a> {
    fn new(g: &'a Geometry) -> Self {
        let (p, n) = (g.p, g.n);
        let ed = electrodynamics_from(g);
        let (hi, hd, hg) = (&g.h.inv, &g.h.dg, &g.h.gamma);
        let (phi, pd) = (&g.phi.g, &g.phi.dg);
        // ∂_μ h^{μa} = −h^{μc} ∂_μ h_{cd} h^{da}
        let mut div_hinv = vec![0.0; p];
        for a in 0..p {
            let mut s = 0.0;
            for mu in 0..p {
                for c in 0..p {
                    for d in 0..p {
                        s -= hi[[mu, c]] * hd[[c, d, mu]] * hi[[d, a]];
                    }
                }
            }
            div_hinv[a] = s;
        }
        let mut constant = vec![0.0; n];
        for l in 0..n {
            // ∂_μ U^μ_l = −2 φ_{lm} (∂_μ h^{μa} X^m_a + h^{μa} ∂_μ X^m_a)
            let mut div_u = 0.0;
            for a in 0..p {
                for m in 0..n {
                    let mut inner = div_hinv[a] * g.field[[m, a]];
                    for mu in 0..p {
                        inner += hi[[mu, a]] * g.field_t[[m, a, mu]];
                    }
                    div_u += -2.0 * phi[[l, m]] * inner;
                }
            }
            let mut trace_term = 0.0;
            for mu in 0..p {
                for gam in 0..p {
                    trace_term += ed.u[[mu, l]] * hg[[gam, mu, gam]];
                }
            }
            // ∂Φ/∂x^l = h^{μν} (∂_l φ_{rs} X^r_μ X^s_ν + φ_{rs} ∂_l X^r_μ X^s_ν + φ_{rs} X^r_μ ∂_l X^s_ν)
            let mut d_phi = 0.0;
            for mu in 0..p {
                for nu in 0..p {
                    for r in 0..n {
                        for s in 0..n {
                            d_phi += hi[[mu, nu]]
                                * (pd[[r, s, l]] * g.field[[r, mu]] * g.field[[s, nu]]
                                    + phi[[r, s]] * g.field_x[[r, mu, l]] * g.field[[s, nu]]
                                    + phi[[r, s]] * g.field[[r, mu]] * g.field_x[[s, nu, l]]);
                        }
                    }
                }
            }
            constant[l] = div_u + trace_term - d_phi;
        }
        SprayBracket {
            geo: g,
            uskew: ed.uskew,
            constant,
        }
    }

    /// Spatial spray coefficients and drift as functions of the partial
    /// directions `xdot[i * p + α]`; returns `(G at (i·p + α)·p + β, F)`.
    fn spatial<S: Scalar>(&self, xdot: &[S]) -> (Vec<S>, Vec<S>) {
        let g = self.geo;
        let (p, n) = (g.p, g.n);
        let mut bracket = Vec::with_capacity(n);
        for l in 0..n {
            let mut b = S::from_f64(self.constant[l]);
            for mu in 0..p {
                for m in 0..n {
                    b = b + xdot[m * p + mu] * self.uskew[[mu, l, m]];
                }
            }
            bracket.push(b);
        }
        let scale = 1.0 / (4.0 * p as f64);
        let mut f = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = S::from_f64(0.0);
            for l in 0..n {
                s = s + bracket[l] * g.phi.inv[[i, l]];
            }
            f.push(s * scale);
        }
        let mut out = Vec::with_capacity(n * p * p);
        for i in 0..n {
            for a in 0..p {
                for b in 0..p {
                    let mut s = S::from_f64(0.0);
                    for j in 0..n {
                        for k in 0..n {
                            let c = g.phi.gamma[[i, j, k]];
                            if c != 0.0 {
                                s = s + xdot[j * p + a] * xdot[k * p + b] * c;
                            }
                        }
                    }
                    out.push(s * 0.5 + f[i] * g.h.g[[a, b]]);
                }
            }
        }
        (out, f)
    }

    fn gsum<S: Scalar>(&self, spatial: &[S]) -> Vec<S> {
        let (p, n) = (self.geo.p, self.geo.n);
        (0..n)
            .map(|i| {
                let mut s = S::from_f64(0.0);
                for a in 0..p {
                    for b in 0..p {
                        s = s + spatial[(i * p + a) * p + b] * self.geo.h.inv[[a, b]];
                    }
                }
                s
            })
            .collect()
    }
}

pub fn spray_from(g: &Geometry, xdot: &Array2<f64>) -> SprayData {
    let (p, n) = (g.p, g.n);
    let mut h = Array3::zeros((n, p, p));
    for i in 0..n {
        for a in 0..p {
            for b in 0..p {
                let mut s = 0.0;
                for c in 0..p {
                    s += g.h.gamma[[c, a, b]] * xdot[[i, c]];
                }
                h[[i, a, b]] = -0.5 * s;
            }
        }
    }
    let bracket = SprayBracket::new(g);
    let flat: Vec<f64> = xdot.iter().copied().collect();
    let (spatial, f) = bracket.spatial(&flat);
    let gsum = bracket.gsum(&spatial);
    let g_arr = Array3::from_shape_vec((n, p, p), spatial).expect("spray shape");
    SprayData {
        h,
        g: g_arr,
        gsum,
        f,
    }
}

pub fn spray(sys: &SystemSpec, pt: &JetPoint) -> Result<SprayData> {
    check_point(sys, pt)?;
    Ok(spray_from(&sys.geometry(&pt.t, &pt.x)?, &pt.xdot))
}

/// The closed-form drift
/// `(h^{μν}/2p) [φ^{il} X^s_{ν‖l} φ_{sr} (X^r_μ − x^r_μ) + X^i_{ν‖m} x^m_μ + X^i_{ν//μ}]`,
/// kept for comparison with the bracket-derived [`SprayData::f`].
pub fn closed_form_drift(g: &Geometry, xdot: &Array2<f64>) -> Vec<f64> {
    let (p, n) = (g.p, g.n);
    let (hi, phi, pinv) = (&g.h.inv, &g.phi.g, &g.phi.inv);
    let scale = 1.0 / (2.0 * p as f64);
    (0..n)
        .map(|i| {
            let mut total = 0.0;
            for mu in 0..p {
                for nu in 0..p {
                    let mut s = g.cov_t[[i, nu, mu]];
                    for m in 0..n {
                        s += g.cov_x[[i, nu, m]] * xdot[[m, mu]];
                    }
                    for l in 0..n {
                        for q in 0..n {
                            for r in 0..n {
                                s += pinv[[i, l]] * g.cov_x[[q, nu, l]] * phi[[q, r]]
                                    * (g.field[[r, mu]] - xdot[[r, mu]]);
                            }
                        }
                    }
                    total += hi[[mu, nu]] * s;
                }
            }
            scale * total
        })
        .collect()
}

pub fn connections_from(g: &Geometry, xdot: &Array2<f64>) -> Connections {
    let (p, n) = (g.p, g.n);
    let mut m0 = Array3::zeros((n, p, p));
    let mut n0 = Array3::zeros((n, p, n));
    for i in 0..n {
        for a in 0..p {
            for b in 0..p {
                let mut s = 0.0;
                for mu in 0..p {
                    s += g.h.gamma[[mu, a, b]] * xdot[[i, mu]];
                }
                m0[[i, a, b]] = -s;
            }
            for j in 0..n {
                let mut s = 0.0;
                for m in 0..n {
                    s += g.phi.gamma[[i, j, m]] * xdot[[m, a]];
                }
                n0[[i, a, j]] = s;
            }
        }
    }
    let sp = spray_from(g, xdot);
    let m_ind = &sp.h * 2.0;

    // ∂𝒢^i/∂x^j_γ by seeding one dual direction at a time.
    let bracket = SprayBracket::new(g);
    let base: Vec<Dual> = xdot.iter().map(|&v| Dual::from_f64(v)).collect();
    let mut dgsum = Array3::zeros((n, n, p));
    for j in 0..n {
        for gam in 0..p {
            let mut seeded = base.clone();
            seeded[j * p + gam] = Dual::variable(xdot[[j, gam]]);
            let (spatial, _) = bracket.spatial(&seeded);
            let gs = bracket.gsum(&spatial);
            for i in 0..n {
                dgsum[[i, j, gam]] = gs[i].eps;
            }
        }
    }
    let mut n_ind = Array3::zeros((n, p, n));
    for i in 0..n {
        for a in 0..p {
            for j in 0..n {
                let mut s = 0.0;
                for gam in 0..p {
                    s += dgsum[[i, j, gam]] * g.h.g[[a, gam]];
                }
                n_ind[[i, a, j]] = s;
            }
        }
    }

    let hel = helicity_from(g);
    let (mut minus, mut plus) = (0.0f64, 0.0f64);
    for i in 0..n {
        for a in 0..p {
            for j in 0..n {
                let v = n_ind[[i, a, j]];
                minus = minus.max((v - (n0[[i, a, j]] - hel[[i, j, a]])).abs());
                plus = plus.max((v - (n0[[i, a, j]] + hel[[i, j, a]])).abs());
            }
        }
    }
    Connections {
        canonical: ConnectionPair {
            m: m0,
            n: n0,
            flavor: Flavor::Canonical,
        },
        induced: ConnectionPair {
            m: m_ind,
            n: n_ind,
            flavor: Flavor::Induced,
        },
        consistency: ConnectionConsistency { minus, plus },
    }
}

pub fn nonlinear_connection(sys: &SystemSpec, pt: &JetPoint) -> Result<Connections> {
    check_point(sys, pt)?;
    Ok(connections_from(&sys.geometry(&pt.t, &pt.x)?, &pt.xdot))
}

/// Adapted components of the Cartan connection: `(H^γ_{αβ}, γ^i_{jk})`.
pub fn cartan_connection(sys: &SystemSpec, pt: &JetPoint) -> Result<(Array3<f64>, Array3<f64>)> {
    check_point(sys, pt)?;
    Ok((sys.h().christoffel(&pt.t)?, sys.phi().christoffel(&pt.x)?))
}

pub fn torsion_from(g2: &Geometry2, xdot: &Array2<f64>) -> TorsionData {
    let g = &g2.first;
    let (p, n) = (g.p, g.n);
    let (phi, pinv) = (&g.phi.g, &g.phi.inv);
    let hr = &g2.h_curvature.riemann;
    let pr = &g2.phi_curvature.riemann;
    let mut rtt = Array4::zeros((n, p, p, p));
    for i in 0..n {
        for a in 0..p {
            for b in 0..p {
                for c in 0..p {
                    let mut s = 0.0;
                    for mu in 0..p {
                        s += hr[[mu, a, b, c]] * xdot[[i, mu]];
                    }
                    rtt[[i, a, b, c]] = -s;
                }
            }
        }
    }
    let mut rtj = Array4::zeros((n, p, p, n));
    for i in 0..n {
        for a in 0..p {
            for b in 0..p {
                for j in 0..n {
                    let mut s = 0.0;
                    for r in 0..n {
                        for q in 0..n {
                            s += pinv[[i, r]] * g2.cov_xt[[q, a, r, b]] * phi[[q, j]];
                        }
                    }
                    rtj[[i, a, b, j]] = 0.5 * (g2.cov_xt[[i, a, j, b]] - s);
                }
            }
        }
    }
    let mut rjk = Array4::zeros((n, p, n, n));
    for i in 0..n {
        for a in 0..p {
            for j in 0..n {
                for k in 0..n {
                    let mut curv = 0.0;
                    for m in 0..n {
                        curv += pr[[i, j, k, m]] * xdot[[m, a]];
                    }
                    let mut s = 0.0;
                    for r in 0..n {
                        for q in 0..n {
                            s += pinv[[i, r]] * g2.cov_xx[[q, a, r, k]] * phi[[q, j]];
                        }
                    }
                    rjk[[i, a, j, k]] = curv - 0.5 * (g2.cov_xx[[i, a, j, k]] - s);
                }
            }
        }
    }
    TorsionData { rtt, rtj, rjk }
}

pub fn torsion(sys: &SystemSpec, pt: &JetPoint) -> Result<TorsionData> {
    check_point(sys, pt)?;
    Ok(torsion_from(&sys.geometry2(&pt.t, &pt.x)?, &pt.xdot))
}

pub fn adapted_frame(conn: &ConnectionPair) -> AdaptedFrame {
    let (n, p, _) = conn.m.dim();
    let dim = p + n + n * p;
    let jet = |i: usize, a: usize| p + n + i * p + a;
    let mut frame = Array2::<f64>::eye(dim);
    let mut coframe = Array2::<f64>::eye(dim);
    for i in 0..n {
        for a in 0..p {
            let r = jet(i, a);
            for b in 0..p {
                frame[[b, r]] = -conn.m[[i, a, b]];
                coframe[[r, b]] = conn.m[[i, a, b]];
            }
            for j in 0..n {
                frame[[p + j, r]] = -conn.n[[i, a, j]];
                coframe[[r, p + j]] = conn.n[[i, a, j]];
            }
        }
    }
    AdaptedFrame { frame, coframe }
}

/// `∂_β X^i_α + ∂_m X^i_α X^m_β − (α ↔ β)` at `[[i, α, β]]`.
pub fn integrability_residual(sys: &SystemSpec, pt: &JetPoint) -> Result<Array3<f64>> {
    check_point(sys, pt)?;
    let (p, n) = (sys.p(), sys.n());
    let (field, ft, fx) = sys.field_jet(&pt.t, &pt.x)?;
    let total = |i: usize, a: usize, b: usize| {
        let mut s = ft[[i, a, b]];
        for m in 0..n {
            s += fx[[i, a, m]] * field[[m, b]];
        }
        s
    };
    let mut out = Array3::zeros((n, p, p));
    for i in 0..n {
        for a in 0..p {
            for b in a + 1..p {
                let v = total(i, a, b) - total(i, b, a);
                out[[i, a, b]] = v;
                out[[i, b, a]] = -v;
            }
        }
    }
    Ok(out)
}
