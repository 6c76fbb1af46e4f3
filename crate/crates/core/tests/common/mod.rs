#![allow(dead_code)]

pub mod torsion;

use jetlab_core::expr::{parse, Expr};
use jetlab_core::jetgeom::{JetPoint, SystemSpec};
use jetlab_core::riemann::MetricField;
use jetlab_core::rng::Sampler;
use jetlab_core::scenarios::{build_group, build_orbits, GroupIngredients, Scenario};
use jetlab_core::linalg::invert;
use ndarray::{Array2, Array3, Array4};

pub fn names(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}{i}")).collect()
}

pub fn table(rows: &[&[&str]]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect()
}

pub fn metric(label: &str, vars: Vec<String>, rows: &[&[&str]]) -> MetricField {
    MetricField::parse(label, &vars, &table(rows)).unwrap()
}

pub fn system(p: usize, h: &[&[&str]], phi: &[&[&str]], field: &[&[&str]]) -> SystemSpec {
    let (t, x) = (names("t", p), names("x", phi.len()));
    SystemSpec::parse(
        t.clone(),
        x.clone(),
        metric("h", t, h),
        metric("phi", x, phi),
        &table(field),
    )
    .unwrap()
}

pub fn exprs(src: &[&str], vars: &[String]) -> Vec<Expr> {
    src.iter().map(|s| parse(s, vars).unwrap()).collect()
}

pub fn sphere_phi() -> MetricField {
    metric("phi", names("x", 2), &[&["1", "0"], &["0", "sin(x1)^2"]])
}

/// Orbits of a non-Killing field on the unit sphere (colatitude `x1`, longitude `x2`).
pub fn sphere_orbits() -> Scenario {
    let x = names("x", 2);
    let xi = exprs(&["sin(x2) + 0.5*sin(x1)", "cos(x1)*cos(x2)/sin(x1)"], &x);
    build_orbits(&xi, sphere_phi()).unwrap()
}

/// Two generators on the sphere with time-dependent one-forms over a curved base.
pub fn sphere_group() -> Scenario {
    let (t, x) = (names("t", 2), names("x", 2));
    let ing = GroupIngredients {
        xi: vec![
            exprs(&["sin(x2)", "cos(x1)*cos(x2)/sin(x1)"], &x),
            exprs(&["0.3*cos(x1)", "1"], &x),
        ],
        a: vec![exprs(&["1 + t2", "0.5*t1"], &t), exprs(&["sin(t1)", "1"], &t)],
    };
    let h = metric("h", t, &[&["1", "0"], &["0", "exp(2*t1)"]]);
    build_group(&ing, h, sphere_phi()).unwrap()
}

/// Jet points with `t` and `x` in the given boxes and partial directions in [−1, 1].
pub fn jet_points(s: &mut Sampler, count: usize, t_box: (&[f64], &[f64]), x_box: (&[f64], &[f64])) -> Vec<JetPoint> {
    (0..count)
        .map(|_| {
            let t = s.in_box(t_box.0, t_box.1);
            let x = s.in_box(x_box.0, x_box.1);
            let (n, p) = (x.len(), t.len());
            let xdot = Array2::from_shape_fn((n, p), |_| s.uniform(-1.0, 1.0));
            JetPoint::new(t, x, xdot)
        })
        .collect()
}

/// Fourth-order central difference of a vector-valued function along one coordinate.
pub fn fd4<F>(f: F, at: &[f64], axis: usize, step: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let shifted = |k: f64| {
        let mut y = at.to_vec();
        y[axis] += k * step;
        f(&y)
    };
    let (p2, p1, m1, m2) = (shifted(2.0), shifted(1.0), shifted(-1.0), shifted(-2.0));
    (0..p1.len())
        .map(|i| (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * step))
        .collect()
}

/// `max |a − b| / max(max |b|, 1)`
pub fn rel_diff<'a>(a: impl IntoIterator<Item = &'a f64>, b: impl IntoIterator<Item = &'a f64>) -> f64 {
    let (mut diff, mut norm) = (0.0f64, 0.0f64);
    for (x, y) in a.into_iter().zip(b) {
        diff = diff.max((x - y).abs());
        norm = norm.max(y.abs());
    }
    diff / norm.max(1.0)
}

pub const STEP: f64 = 1e-3;

pub fn christoffel<G: Fn(&[f64]) -> Array2<f64>>(g: &G, y: &[f64]) -> Array3<f64> {
    let d = y.len();
    let g0 = g(y);
    let (inv, _) = invert(&g0).unwrap();
    let flat = |z: &[f64]| g(z).iter().copied().collect::<Vec<_>>();
    let dg: Vec<Vec<f64>> = (0..d).map(|m| fd4(flat, y, m, STEP)).collect();
    let dg = |a: usize, b: usize, m: usize| dg[m][a * d + b];
    Array3::from_shape_fn((d, d, d), |(k, i, j)| {
        (0..d)
            .map(|l| 0.5 * inv[[k, l]] * (dg(l, j, i) + dg(l, i, j) - dg(i, j, l)))
            .sum()
    })
}

/// `R^l_{ijk} = ∂_j Γ^l_{ik} − ∂_k Γ^l_{ij} + Γ^l_{jm} Γ^m_{ik} − Γ^l_{km} Γ^m_{ij}`
pub fn riemann<G: Fn(&[f64]) -> Array2<f64>>(g: &G, y: &[f64]) -> Array4<f64> {
    let d = y.len();
    let gam = christoffel(g, y);
    let flat = |z: &[f64]| christoffel(g, z).iter().copied().collect::<Vec<_>>();
    let dgam: Vec<Vec<f64>> = (0..d).map(|m| fd4(flat, y, m, STEP)).collect();
    let dgam = |l: usize, i: usize, j: usize, m: usize| dgam[m][(l * d + i) * d + j];
    Array4::from_shape_fn((d, d, d, d), |(l, i, j, k)| {
        let mut s = dgam(l, i, k, j) - dgam(l, i, j, k);
        for m in 0..d {
            s += gam[[l, j, m]] * gam[[m, i, k]] - gam[[l, k, m]] * gam[[m, i, j]];
        }
        s
    })
}
