//! Torsion d-tensors against a finite-difference implementation that only
//! evaluates the metric entries and the field at points.

mod common;

use common::torsion::Oracle;
use common::{jet_points, rel_diff, sphere_group, sphere_orbits};
use jetlab_core::jetgeom::{torsion, JetPoint};
use jetlab_core::rng::Sampler;
use jetlab_core::scenarios::Scenario;

fn check(sc: &Scenario, t_box: (&[f64], &[f64])) -> [f64; 3] {
    let sys = &sc.system;
    let oracle = Oracle { sys };
    let mut s = Sampler::new(0x7042);
    let mut worst = [0.0f64; 3];
    for pt in jet_points(&mut s, 50, t_box, (&[0.6, -1.0], &[2.5, 2.0])) {
        let engine = torsion(sys, &pt).unwrap();
        let reference = oracle.torsion(&pt);
        for (w, (e, o)) in worst
            .iter_mut()
            .zip([&engine.rtt, &engine.rtj, &engine.rjk].into_iter().zip(&reference))
        {
            *w = w.max(rel_diff(e, o));
        }
    }
    worst
}

#[test]
fn sphere_orbit_torsion_matches_finite_differences() {
    let worst = check(&sphere_orbits(), (&[0.0], &[3.0]));
    assert!(worst.iter().all(|&w| w <= 1e-6), "{worst:?}");
}

#[test]
fn group_torsion_matches_finite_differences() {
    let worst = check(&sphere_group(), (&[-1.0, -1.0], &[1.0, 1.0]));
    assert!(worst.iter().all(|&w| w <= 1e-6), "{worst:?}");
}

#[test]
fn curved_base_gives_nonzero_temporal_torsion() {
    let sc = sphere_group();
    let mut s = Sampler::new(3);
    let pt = &jet_points(&mut s, 1, (&[0.3, 0.0], &[0.5, 0.0]), (&[1.0, 0.0], &[1.2, 0.5]))[0];
    let tor = torsion(&sc.system, pt).unwrap();
    assert!(tor.rtt.iter().any(|v| v.abs() > 1e-3));
    let doubled = JetPoint::new(pt.t.clone(), pt.x.clone(), &pt.xdot * 2.0);
    let tor2 = torsion(&sc.system, &doubled).unwrap();
    for (a, b) in tor.rtt.iter().zip(tor2.rtt.iter()) {
        assert!((2.0 * a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn flat_base_gives_vanishing_temporal_torsion() {
    let sc = sphere_orbits();
    let mut s = Sampler::new(4);
    for pt in jet_points(&mut s, 20, (&[0.0], &[3.0]), (&[0.6, -1.0], &[2.5, 2.0])) {
        assert!(torsion(&sc.system, &pt).unwrap().rtt.iter().all(|&v| v == 0.0));
    }
}
