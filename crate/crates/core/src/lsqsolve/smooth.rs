//! Analytic test maps and a pointwise Euler-Lagrange oracle.
//!
//! On a [`SmoothMap`] every derivative is known in closed form, so the
//! harmonic-form residual can be evaluated exactly at any point. The oracle
//! keeps the exact `x`- and `ẋ`-partials of `𝓛` and differentiates the momentum
//! along the map with a fourth-order central difference.

use ndarray::{Array2, Array3};

use crate::error::Result;
use crate::jetgeom::SystemSpec;
use crate::rng::Sampler;

use super::{lagrangian_partials, normalized_harmonic, BaseNode, Coherence};

#[derive(Debug, Clone, PartialEq)]
struct Wave {
    amp: f64,
    /// Angular frequency per normalized base coordinate.
    freq: Vec<f64>,
    phase: f64,
}

/// `x^i(t) = c^i + r^i Σ_k a_k sin(ω_k·s + θ_k)` with `s` the base point rescaled to `[0, 1]^p`
/// and `Σ |a_k| ≤ 1`, so the map stays in the box `c ± r`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothMap {
    t_min: Vec<f64>,
    t_len: Vec<f64>,
    centre: Vec<f64>,
    radius: Vec<f64>,
    waves: Vec<Vec<Wave>>,
}

const WAVES: usize = 3;

impl SmoothMap {
    /// A random map over the base box `[t_min, t_max]` whose values stay in the
    /// inner 40 % of `[x_min, x_max]` around its centre.
    pub fn random(sampler: &mut Sampler, t_min: &[f64], t_max: &[f64], x_min: &[f64], x_max: &[f64]) -> Self {
        let p = t_min.len();
        let centre: Vec<f64> = x_min.iter().zip(x_max).map(|(a, b)| 0.5 * (a + b)).collect();
        let radius: Vec<f64> = x_min.iter().zip(x_max).map(|(a, b)| 0.2 * (b - a)).collect();
        let waves = (0..x_min.len())
            .map(|_| {
                (0..WAVES)
                    .map(|_| Wave {
                        amp: sampler.uniform(-1.0, 1.0) / WAVES as f64,
                        freq: (0..p).map(|_| sampler.uniform(-1.5, 1.5) * std::f64::consts::PI).collect(),
                        phase: sampler.uniform(0.0, 2.0 * std::f64::consts::PI),
                    })
                    .collect()
            })
            .collect();
        SmoothMap {
            t_min: t_min.to_vec(),
            t_len: t_min.iter().zip(t_max).map(|(a, b)| b - a).collect(),
            centre,
            radius,
            waves,
        }
    }

    pub fn n(&self) -> usize {
        self.centre.len()
    }

    pub fn p(&self) -> usize {
        self.t_min.len()
    }

    /// `(x, ẋ[[i, α]], ẍ[[i, α, β]])` at `t`.
    pub fn jet(&self, t: &[f64]) -> (Vec<f64>, Array2<f64>, Array3<f64>) {
        let (n, p) = (self.n(), self.p());
        let s: Vec<f64> = (0..p).map(|a| (t[a] - self.t_min[a]) / self.t_len[a]).collect();
        let mut x = self.centre.clone();
        let mut xdot = Array2::zeros((n, p));
        let mut xx = Array3::zeros((n, p, p));
        for i in 0..n {
            let r = self.radius[i];
            for w in &self.waves[i] {
                let theta = w.phase + (0..p).map(|a| w.freq[a] * s[a]).sum::<f64>();
                let (sn, cs) = theta.sin_cos();
                x[i] += r * w.amp * sn;
                for a in 0..p {
                    let ka = w.freq[a] / self.t_len[a];
                    xdot[[i, a]] += r * w.amp * cs * ka;
                    for b in 0..p {
                        xx[[i, a, b]] -= r * w.amp * sn * ka * w.freq[b] / self.t_len[b];
                    }
                }
            }
        }
        (x, xdot, xx)
    }
}

fn base_at(sys: &SystemSpec, t: &[f64]) -> Result<BaseNode> {
    let (h_inv, det) = crate::linalg::invert(&sys.h().value_at(t)?)?;
    Ok(BaseNode {
        h_inv,
        sqrt_h: det.sqrt(),
        weight: 1.0,
    })
}

/// `∂𝓛/∂x^k − ∂_α(∂𝓛/∂x^k_α)` along `map` at `t`, with momentum derivatives
/// taken by a fourth-order central difference of spacing `step`.
pub fn el_oracle_at(sys: &SystemSpec, map: &SmoothMap, t: &[f64], step: f64) -> Result<Vec<f64>> {
    let (p, n) = (sys.p(), sys.n());
    let momentum = |t: &[f64]| -> Result<(Vec<f64>, Array2<f64>)> {
        let b = base_at(sys, t)?;
        let (x, xdot, _) = map.jet(t);
        let lp = lagrangian_partials(sys, &b, t, &x, &xdot)?;
        Ok((lp.dx.iter().map(|v| v * b.sqrt_h).collect(), lp.dxdot * b.sqrt_h))
    };
    let (mut out, _) = momentum(t)?;
    for a in 0..p {
        for (shift, c) in [(2.0, -1.0), (1.0, 8.0), (-1.0, -8.0), (-2.0, 1.0)] {
            let mut ts = t.to_vec();
            ts[a] += shift * step;
            let (_, mom) = momentum(&ts)?;
            for k in 0..n {
                out[k] -= c * mom[[k, a]] / (12.0 * step);
            }
        }
    }
    Ok(out)
}

/// Pointwise version of [`super::el_coherence_signed`] on an analytic map.
pub fn smooth_coherence(
    sys: &SystemSpec,
    map: &SmoothMap,
    points: &[Vec<f64>],
    sign: f64,
) -> Result<(Coherence, Coherence)> {
    let (mut wb, mut wc, mut norm) = (0.0f64, 0.0f64, 0.0f64);
    for t in points {
        let oracle = el_oracle_at(sys, map, t, 1e-3)?;
        let (x, xdot, xx) = map.jet(t);
        let g = sys.geometry(t, &x)?;
        let (nb, nc) = normalized_harmonic(&g, &xdot, &xx, sign);
        for k in 0..sys.n() {
            norm = norm.max(oracle[k].abs());
            wb = wb.max((oracle[k] - nb[k]).abs());
            wc = wc.max((oracle[k] - nc[k]).abs());
        }
    }
    Ok((Coherence::new(wb, norm), Coherence::new(wc, norm)))
}
