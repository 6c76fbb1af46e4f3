use super::*;
use crate::riemann::MetricField;
use ndarray::array;
use std::f64::consts::PI;

fn rotation() -> SystemSpec {
    let t = vec!["t1".to_string()];
    let x = vec!["x1".to_string(), "x2".to_string()];
    SystemSpec::parse(
        t.clone(),
        x.clone(),
        MetricField::identity("h", t),
        MetricField::identity("phi", x),
        &[vec!["-x2".into()], vec!["x1".into()]],
    )
    .unwrap()
}

fn line_grid(nodes: usize) -> UniformGrid {
    UniformGrid::new(vec![0.0], vec![2.0 * PI], vec![nodes]).unwrap()
}

fn circle(nodes: usize) -> GridMap {
    GridMap::from_fn(line_grid(nodes), 2, Boundary::FixedInitial, |t| {
        vec![t[0].cos(), t[0].sin()]
    })
    .unwrap()
}

#[test]
fn lagrangian_values() {
    let sys = rotation();
    let on = JetPoint::new(vec![0.0], vec![1.0, 0.0], array![[0.0], [1.0]]);
    assert_eq!(lagrangian_at(&sys, &on).unwrap(), 0.0);
    let rest = JetPoint::at_rest(vec![0.0], vec![1.0, 0.0]);
    assert_eq!(lagrangian_at(&sys, &rest).unwrap(), 1.0);
    let pt = JetPoint::new(vec![0.3], vec![0.2, -1.1], array![[0.7], [-0.4]]);
    let f = lagrangian_forms(&sys, &pt).unwrap();
    assert!((f.least_squares - f.expanded).abs() < 1e-12);
}

#[test]
fn circle_energy_and_residual() {
    let sys = rotation();
    let m = circle(2001);
    assert!(energy(&sys, &m).unwrap() <= 1e-6);
    let r1 = el_residual(&sys, &m).unwrap().max_norm();
    assert!(r1 <= 1e-5, "{r1}");
    let r2 = el_residual(&sys, &circle(4001)).unwrap().max_norm();
    assert!(r1 / r2 >= 3.0, "{r1} {r2}");
    assert!(el_oracle_residual(&sys, &m).unwrap().max_norm() <= 1e-5);
}

#[test]
fn constant_map() {
    let sys = rotation();
    let m = GridMap::from_fn(line_grid(2001), 2, Boundary::FixedInitial, |_| vec![1.0, 0.0]).unwrap();
    assert!((energy(&sys, &m).unwrap() - 2.0 * PI).abs() < 1e-6);
    let o = el_oracle_residual(&sys, &m).unwrap();
    for row in o.values.rows() {
        assert!((row[0] - 2.0).abs() < 1e-9 && row[1].abs() < 1e-9, "{row}");
    }
}

#[test]
fn straight_line_in_flat_space() {
    let t = vec!["t1".to_string()];
    let x = vec!["x1".to_string(), "x2".to_string()];
    let sys = SystemSpec::parse(
        t.clone(),
        x.clone(),
        MetricField::identity("h", t),
        MetricField::identity("phi", x),
        &[vec!["0".into()], vec!["0".into()]],
    )
    .unwrap();
    let m = GridMap::from_fn(line_grid(101), 2, Boundary::FixedInitial, |t| {
        vec![1.0 + 0.5 * t[0], -2.0 + 0.25 * t[0]]
    })
    .unwrap();
    assert!(el_residual(&sys, &m).unwrap().max_norm() < 1e-10);
    assert!(el_oracle_residual(&sys, &m).unwrap().max_norm() < 1e-10);
}

#[test]
fn oracle_matches_harmonic_form_on_a_wiggly_map() {
    let sys = rotation();
    let m = GridMap::from_fn(line_grid(2001), 2, Boundary::FixedInitial, |t| {
        vec![0.3 * (0.7 * t[0]).sin() + 0.5, 0.2 * (1.3 * t[0] + 0.4).cos()]
    })
    .unwrap();
    let c = el_coherence(&sys, &m).unwrap();
    assert!(c.relative < 1e-5, "{c:?}");
    let (_, closed) = el_coherence_signed(&sys, &m, -1.0).unwrap();
    assert!(closed.relative < 1e-5, "{closed:?}");
}

#[test]
fn minimize_recovers_the_circle() {
    let sys = rotation();
    let init = GridMap::from_fn(line_grid(2001), 2, Boundary::FixedInitial, |t| {
        let bump = 0.1 * (t[0] / 2.0).sin();
        vec![t[0].cos() + bump, t[0].sin() + bump]
    })
    .unwrap();
    let out = minimize(&sys, &init, &MinimizeOptions::default()).unwrap();
    assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
    assert!(*out.trace.last().unwrap() <= 1e-6);
    let mut worst = 0.0f64;
    for node in 0..out.map.grid().len() {
        let t = out.map.grid().coords(node)[0];
        let v = out.map.value(node);
        worst = worst.max((v[0] - t.cos()).abs()).max((v[1] - t.sin()).abs());
    }
    assert!(worst <= 1e-3, "{worst}");
    assert_eq!(out.map.value(0), init.value(0));
}

#[test]
fn minimize_stops_immediately_at_a_solution() {
    let sys = rotation();
    let opts = MinimizeOptions {
        grad_tol: 1e-4,
        ..MinimizeOptions::default()
    };
    let out = minimize(&sys, &circle(2001), &opts).unwrap();
    assert_eq!(out.trace.len(), 1);
    assert_eq!(out.termination, Termination::Converged);
}

#[test]
fn euclidean_descent_is_monotone() {
    let sys = rotation();
    let init = GridMap::from_fn(line_grid(41), 2, Boundary::FixedInitial, |t| {
        vec![t[0].cos() + 0.1 * t[0].sin(), t[0].sin()]
    })
    .unwrap();
    let opts = MinimizeOptions {
        max_iters: 50,
        metric: DescentMetric::Euclidean,
        ..MinimizeOptions::default()
    };
    let out = minimize(&sys, &init, &opts).unwrap();
    assert!(out.trace.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(out.termination, Termination::MaxIterations);
}

#[test]
fn coherence_is_second_order() {
    let sys = rotation();
    let diff = |nodes| {
        let m = GridMap::from_fn(line_grid(nodes), 2, Boundary::FixedInitial, |t| {
            vec![0.3 * (0.7 * t[0]).sin() + 0.5, 0.2 * (1.3 * t[0] + 0.4).cos()]
        })
        .unwrap();
        el_coherence(&sys, &m).unwrap().max_abs_diff
    };
    let ratio = diff(501) / diff(1001);
    assert!(ratio > 3.5 && ratio < 4.5, "{ratio}");
}
