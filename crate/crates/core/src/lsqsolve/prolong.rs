//! Rewriting an order-`r` system as a first-order system on jet coordinates.
//!
//! An order-`r` system `x^i_{α1…α(r−1)αr} = X^i_{α1…α(r−1)(αr)}(t, x, x_α, …)` becomes
//! first order on the manifold whose coordinates are all symmetric derivatives
//! `x^i_I` with `|I| < r`: each coordinate of order `l < r − 1` differentiates
//! into the matching coordinate of order `l + 1`, and the top order uses the
//! given right-hand sides.
//!
//! Coordinates are named `x1` (order 0) and `x1_1_2` (order 2, directions 1 and 2),
//! with direction lists sorted. They are ordered by order, then by `i`, then by
//! the multi-index in lexicographic order.

use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::jetgeom::SystemSpec;
use crate::riemann::MetricField;

/// Nondecreasing index lists of length `l` over `0..p`, in lexicographic order.
pub fn multi_indices(p: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(l);
    fn rec(p: usize, l: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == l {
            out.push(cur.clone());
            return;
        }
        for a in start..p {
            cur.push(a);
            rec(p, l, a, cur, out);
            cur.pop();
        }
    }
    rec(p, l, 0, &mut cur, &mut out);
    out
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Debug, Clone)]
pub struct HigherOrderSpec {
    r: usize,
    t_names: Vec<String>,
    x_names: Vec<String>,
    h: MetricField,
    phi: MetricField,
    /// `rhs[i][I][α]` for the sorted multi-indices `I` of length `r − 1`.
    rhs: Vec<Vec<Vec<Expr>>>,
    extended_phi: Option<MetricField>,
}

impl HigherOrderSpec {
    /// Names of the extended spatial coordinates for order `r`.
    pub fn jet_coordinate_names(r: usize, p: usize, x_names: &[String]) -> Vec<String> {
        let mut out = Vec::new();
        for l in 0..r {
            for name in x_names {
                for idx in multi_indices(p, l) {
                    let mut s = name.clone();
                    for a in idx {
                        s.push_str(&format!("_{}", a + 1));
                    }
                    out.push(s);
                }
            }
        }
        out
    }

    /// Right-hand sides are parsed over `t_names` followed by the jet coordinate names.
    pub fn parse(
        r: usize,
        t_names: Vec<String>,
        x_names: Vec<String>,
        h: MetricField,
        phi: MetricField,
        rhs: &[Vec<Vec<String>>],
    ) -> Result<Self> {
        if r < 1 {
            return Err(Error::InvalidOrder(r));
        }
        let (p, n) = (t_names.len(), x_names.len());
        let vars: Vec<String> = t_names
            .iter()
            .cloned()
            .chain(Self::jet_coordinate_names(r, p, &x_names))
            .collect();
        let top = multi_indices(p, r - 1).len();
        if rhs.len() != n || rhs.iter().any(|m| m.len() != top || m.iter().any(|row| row.len() != p)) {
            return Err(Error::Shape(format!(
                "right-hand sides must be indexed [{n}][{top}][{p}]"
            )));
        }
        let rhs = rhs
            .iter()
            .map(|per_i| {
                per_i
                    .iter()
                    .map(|row| row.iter().map(|src| parse(src, &vars)).collect())
                    .collect()
            })
            .collect::<std::result::Result<Vec<Vec<Vec<Expr>>>, _>>()?;
        Ok(HigherOrderSpec {
            r,
            t_names,
            x_names,
            h,
            phi,
            rhs,
            extended_phi: None,
        })
    }

    /// Replaces the default product metric on the extended manifold.
    pub fn with_extended_metric(mut self, phi: MetricField) -> Self {
        self.extended_phi = Some(phi);
        self
    }

    pub fn order(&self) -> usize {
        self.r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionReport {
    pub r: usize,
    pub p: usize,
    pub n: usize,
    /// `ñ = n Σ_{l<r} C(p+l−1, l)`, the number of symmetric jet coordinates.
    pub extended_n: usize,
    /// `p + (p+1) ñ`
    pub jet_dim: usize,
    /// `p + n Σ_{l<r} C(p, l)`, the binomial count for the order-r total space.
    pub binomial_total_space: usize,
    /// `p + (p+1) n Σ_{l<r} C(p, l)`, the binomial count for the first jet space.
    pub binomial_jet_dim: usize,
}

#[derive(Debug, Clone)]
pub struct Prolongation {
    pub system: SystemSpec,
    pub dims: DimensionReport,
}

pub fn prolong(spec: &HigherOrderSpec) -> Result<Prolongation> {
    let r = spec.r;
    if r < 1 {
        return Err(Error::InvalidOrder(r));
    }
    let (p, n) = (spec.t_names.len(), spec.x_names.len());
    let names = HigherOrderSpec::jet_coordinate_names(r, p, &spec.x_names);
    let nt = names.len();
    let position = |i: usize, idx: &[usize]| -> usize {
        let mut offset = 0;
        for l in 0..idx.len() {
            offset += n * multi_indices(p, l).len();
        }
        let per = multi_indices(p, idx.len());
        offset + i * per.len() + per.iter().position(|m| m == idx).expect("sorted multi-index")
    };

    let mut field = vec![Vec::new(); nt];
    for l in 0..r {
        for i in 0..n {
            for (k, idx) in multi_indices(p, l).into_iter().enumerate() {
                let row = position(i, &idx);
                field[row] = (0..p)
                    .map(|a| {
                        if l + 1 < r {
                            let mut next = idx.clone();
                            next.push(a);
                            next.sort_unstable();
                            let c = position(i, &next);
                            Expr::var(p + c, &names[c])
                        } else {
                            spec.rhs[i][k][a].clone()
                        }
                    })
                    .collect();
            }
        }
    }

    let phi = match &spec.extended_phi {
        Some(phi) => phi.clone(),
        None => {
            let entries = (0..nt)
                .map(|a| {
                    (0..nt)
                        .map(|b| {
                            if a < n && b < n {
                                spec.phi.entry(a, b).clone()
                            } else if a == b {
                                Expr::one()
                            } else {
                                Expr::zero()
                            }
                        })
                        .collect()
                })
                .collect();
            MetricField::new("phi", names.clone(), entries)?
        }
    };
    let system = SystemSpec::new(spec.t_names.clone(), names, spec.h.clone(), phi, field)?;

    let multiset: usize = (0..r).map(|l| binomial(p + l - 1, l)).sum();
    let binomial_sum: usize = (0..r).map(|l| binomial(p, l)).sum();
    let extended_n = n * multiset;
    Ok(Prolongation {
        system,
        dims: DimensionReport {
            r,
            p,
            n,
            extended_n,
            jet_dim: p + (p + 1) * extended_n,
            binomial_total_space: p + n * binomial_sum,
            binomial_jet_dim: p + (p + 1) * n * binomial_sum,
        },
    })
}
