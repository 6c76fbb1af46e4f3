//! End-to-end acceptance suite over the bundled configs; prints one line per criterion.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use jetlab::config::RunConfig;
use jetlab::model::Model;
use jetlab::{solve, verify};
use jetlab_core::expr::{parse, ExprError};
use jetlab_core::fieldtheory::{einstein_report, em_field, maxwell_residuals};
use jetlab_core::grid::UniformGrid;
use jetlab_core::jetgeom::{torsion, JetPoint, SystemSpec};
use jetlab_core::linalg::invert;
use jetlab_core::lsqsolve::{el_oracle_at, el_residual, energy, lagrangian_at, Boundary, GridMap, SmoothMap};
use jetlab_core::rng::Sampler;
use jetlab_core::scenarios::ScenarioKind;
use jetlab_core::signs::drift_findings;
use ndarray::Array2;

const BUNDLED: [&str; 8] = [
    "rotation",
    "gradient",
    "sphere_orbits",
    "pfaff_closed",
    "pfaff_nonclosed",
    "group_commuting",
    "yang_mills_q2",
    "oscillator_order2",
];

type Outcome = Result<String, String>;

fn config(name: &str) -> (RunConfig, Model) {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", &format!("{name}.json")]
        .iter()
        .collect();
    let cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
    let model = Model::build(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
    (cfg, model)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_abs<'a>(a: impl IntoIterator<Item = &'a f64>) -> f64 {
    a.into_iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Euler-Lagrange expression built only from values of the scalar Lagrangian:
/// `∂(√h L)/∂x^k − ∂_α(√h ∂L/∂x^k_α)` with every derivative by central differences.
fn fd_euler_lagrange(sys: &SystemSpec, map: &SmoothMap, t: &[f64]) -> Vec<f64> {
    let (p, n) = (sys.p(), sys.n());
    let sqrt_h = |t: &[f64]| invert(&sys.h().value_at(t).unwrap()).unwrap().1.sqrt();
    let lag = |t: &[f64], x: &[f64], xdot: &Array2<f64>| {
        lagrangian_at(sys, &JetPoint::new(t.to_vec(), x.to_vec(), xdot.clone())).unwrap()
    };
    // L is quadratic in the partials, so the central difference is exact up to round-off.
    let momentum = |t: &[f64]| {
        let (x, xdot, _) = map.jet(t);
        let s = sqrt_h(t);
        Array2::from_shape_fn((n, p), |(k, a)| {
            let (mut up, mut dn) = (xdot.clone(), xdot.clone());
            up[[k, a]] += 1e-3;
            dn[[k, a]] -= 1e-3;
            s * (lag(t, &x, &up) - lag(t, &x, &dn)) / 2e-3
        })
    };
    let (x, xdot, _) = map.jet(t);
    let s = sqrt_h(t);
    (0..n)
        .map(|k| {
            let (mut up, mut dn) = (x.clone(), x.clone());
            up[k] += 1e-5;
            dn[k] -= 1e-5;
            let mut v = s * (lag(t, &up, &xdot) - lag(t, &dn, &xdot)) / 2e-5;
            for a in 0..p {
                let d = common::fd4(
                    |z: &[f64]| momentum(z).iter().copied().collect(),
                    t,
                    a,
                    1e-3,
                );
                v -= d[k * p + a];
            }
            v
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let mut worst = 0.0f64;
    let mut oracle_gap = 0.0f64;
    for name in BUNDLED {
        let (_, model) = config(name);
        let sys = &model.system;
        let (t_box, x_box) = (&model.t_box, &model.x_box);
        let mut s = Sampler::new(0xe1);
        let maps: Vec<SmoothMap> =
            (0..20).map(|_| SmoothMap::random(&mut s, &t_box.0, &t_box.1, &x_box.0, &x_box.1)).collect();
        let points: Vec<Vec<f64>> = (0..5).map(|_| s.in_box(&t_box.0, &t_box.1)).collect();
        let [bracket, _] = drift_findings(sys, &maps, &points, 1e-5).map_err(|e| format!("{name}: {e}"))?;
        ensure(bracket.printed_residual <= 1e-5, || {
            format!("{name}: spray-form residual differs from the oracle by {:e}", bracket.printed_residual)
        })?;
        worst = worst.max(bracket.printed_residual);

        // The library oracle uses symbolic partials of L; cross-check it against pure differences.
        for m in maps.iter().take(3) {
            for t in points.iter().take(2) {
                let lib = el_oracle_at(sys, m, t, 1e-3).map_err(|e| e.to_string())?;
                let fd = fd_euler_lagrange(sys, m, t);
                let gap = common::rel_diff(&lib, &fd);
                ensure(gap <= 1e-6, || format!("{name}: oracles disagree by {gap:e}"))?;
                oracle_gap = oracle_gap.max(gap);
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("took {secs:.2}s"))?;
    Ok(format!(
        "8 configs x 20 maps, worst relative gap {worst:.2e}, oracle cross-check {oracle_gap:.2e}, {secs:.2}s"
    ))
}

fn circle(nodes: usize) -> (SystemSpec, GridMap) {
    let (_, model) = config("rotation");
    let grid = UniformGrid::new(vec![0.0], vec![2.0 * PI], vec![nodes]).unwrap();
    let map = GridMap::from_fn(grid, 2, Boundary::FixedInitial, |t| vec![t[0].cos(), t[0].sin()]).unwrap();
    (model.system, map)
}

fn criterion_2() -> Outcome {
    let (sys, coarse) = circle(2001);
    let e = energy(&sys, &coarse).map_err(|e| e.to_string())?;
    let r1 = el_residual(&sys, &coarse).map_err(|e| e.to_string())?.max_norm();
    let (_, fine) = circle(4001);
    let r2 = el_residual(&sys, &fine).map_err(|e| e.to_string())?.max_norm();
    ensure(e <= 1e-6, || format!("energy {e:e}"))?;
    ensure(r1 <= 1e-5, || format!("EL residual {r1:e}"))?;
    ensure(r1 >= 3.0 * r2, || format!("refinement ratio {:.2}", r1 / r2))?;
    Ok(format!("energy {e:.2e}, EL residual {r1:.2e}, ratio on doubling {:.2}", r1 / r2))
}

fn criterion_3() -> Outcome {
    let (cfg, model) = config("rotation");
    let init = solve::initial_map(&cfg, &model).map_err(|e| e.to_string())?;
    let amplitude = (0..init.grid().len())
        .map(|k| {
            let t = init.grid().coords(k)[0];
            (init.value(k)[0] - t.cos()).abs()
        })
        .fold(0.0f64, f64::max);
    let out = solve::run(&cfg, &model).map_err(|e| e.to_string())?.outcome;
    let m = &out.map;
    let err = (0..m.grid().len())
        .map(|k| {
            let t = m.grid().coords(k)[0];
            let v = m.value(k);
            (v[0] - t.cos()).abs().max((v[1] - t.sin()).abs())
        })
        .fold(0.0f64, f64::max);
    let last = *out.trace.last().unwrap();
    ensure((amplitude - 0.1).abs() < 1e-3, || format!("initial perturbation amplitude {amplitude}"))?;
    ensure(out.trace.windows(2).all(|w| w[1] <= w[0]), || "energy trace increased".into())?;
    ensure(out.iterations <= 5000, || format!("{} iterations", out.iterations))?;
    ensure(last <= 1e-6, || format!("final energy {last:e}"))?;
    ensure(err <= 1e-3, || format!("max error {err:e}"))?;
    Ok(format!("{} iterations, final energy {last:.2e}, max error {err:.2e}", out.iterations))
}

fn criterion_4() -> Outcome {
    let (mut eq2, mut eq3) = (0.0f64, 0.0f64);
    for name in BUNDLED {
        let (_, model) = config(name);
        let sys = &model.system;
        let pfaff = matches!(model.scenario.as_ref().map(|s| &s.kind), Some(ScenarioKind::Pfaff));
        let mut s = Sampler::new(0xe4);
        for pt in model.jet_points(&mut s, 100) {
            let f = em_field(sys, &pt).map_err(|e| e.to_string())?.f;
            ensure(f.iter().zip(f.clone().permuted_axes([0, 2, 1]).iter()).all(|(a, b)| *a == -*b), || {
                format!("{name}: EM field not antisymmetric")
            })?;
            if pfaff {
                ensure(f.iter().all(|&v| v == 0.0), || format!("{name}: Pfaffian EM field nonzero"))?;
            }
            let mx = maxwell_residuals(sys, &pt).map_err(|e| e.to_string())?;
            eq2 = eq2.max(max_abs(&mx.eq2));
            eq3 = eq3.max(max_abs(&mx.eq3));
        }
    }
    ensure(eq2 <= 1e-9, || format!("eq2 residual {eq2:e}"))?;
    ensure(eq3 == 0.0, || format!("eq3 residual {eq3:e}"))?;
    Ok(format!("8 configs x 100 points, eq2 max {eq2:.2e}, eq3 max {eq3:e}, Pfaffian EM identically zero"))
}

fn criterion_5() -> Outcome {
    let check = |sys: &SystemSpec, t_box: (&[f64], &[f64]), x_box: (&[f64], &[f64])| {
        let oracle = common::torsion::Oracle { sys };
        let mut s = Sampler::new(0xe5);
        let mut worst = 0.0f64;
        for pt in common::jet_points(&mut s, 50, t_box, x_box) {
            let engine = torsion(sys, &pt).unwrap();
            let reference = oracle.torsion(&pt);
            for (e, o) in [&engine.rtt, &engine.rtj, &engine.rjk].into_iter().zip(&reference) {
                worst = worst.max(common::rel_diff(e, o));
            }
        }
        worst
    };
    let (_, sphere) = config("sphere_orbits");
    let w_sphere = check(&sphere.system, (&sphere.t_box.0, &sphere.t_box.1), (&sphere.x_box.0, &sphere.x_box.1));
    let group = common::sphere_group();
    let w_group = check(&group.system, (&[-1.0, -1.0], &[1.0, 1.0]), (&[0.6, -1.0], &[2.5, 2.0]));
    let (_, commuting) = config("group_commuting");
    let c = &commuting;
    let w_commuting = check(&c.system, (&c.t_box.0, &c.t_box.1), (&c.x_box.0, &c.x_box.1));
    for (label, w) in [("sphere orbits", w_sphere), ("sphere group", w_group), ("group_commuting", w_commuting)] {
        ensure(w <= 1e-6, || format!("{label}: torsion differs from the oracle by {w:e}"))?;
    }
    let mut flat = 0;
    for name in BUNDLED {
        let (_, model) = config(name);
        if !model.system.h().is_constant() {
            continue;
        }
        flat += 1;
        let mut s = Sampler::new(0xe5);
        for pt in model.jet_points(&mut s, 50) {
            let rtt = torsion(&model.system, &pt).map_err(|e| e.to_string())?.rtt;
            ensure(rtt.iter().all(|&v| v == 0.0), || format!("{name}: Rtt nonzero over a flat base"))?;
        }
    }
    Ok(format!(
        "worst relative gap {:.2e} (sphere orbits), {:.2e} (sphere group), {:.2e} (commuting group); Rtt = 0 on {flat} flat-base configs",
        w_sphere, w_group, w_commuting
    ))
}

fn criterion_6() -> Outcome {
    let (cfg, model) = config("sphere_orbits");
    let nodes = cfg.einstein.as_ref().map_or(64, |e| e.nodes);
    let t_grid = UniformGrid::new(model.t_box.0.clone(), model.t_box.1.clone(), vec![nodes]).unwrap();
    let (mut block, mut cons) = (0.0f64, 0.0f64);
    for k in [1.0, 2.5] {
        // Shift the x box so the blocks are evaluated at several centres.
        for (lo, hi) in [([0.6, -1.0], [2.5, 2.0]), ([0.4, 0.0], [1.2, 3.0]), ([1.5, -2.0], [2.8, -1.0])] {
            let x_grid = UniformGrid::new(lo.to_vec(), hi.to_vec(), vec![nodes; 2]).unwrap();
            let r = einstein_report(&model.system, k, &t_grid, &x_grid).map_err(|e| e.to_string())?;
            block = block.max(max_abs(&r.txx)).max((r.ttt[[0, 0]] + 1.0 / k).abs());
            cons = cons.max(r.conservation[0]).max(r.conservation[1]);
        }
    }
    ensure(block <= 1e-8, || format!("block deviation {block:e}"))?;
    ensure(cons <= 1e-5, || format!("conservation residual {cons:e}"))?;
    Ok(format!("T_ij = 0 and T_11 = -1/K within {block:.2e}, conservation {cons:.2e} on {nodes} nodes"))
}

fn criterion_7() -> Outcome {
    let (_, model) = config("oscillator_order2");
    let d = model.prolongation.ok_or("oscillator config is not higher order")?;
    let grid = UniformGrid::new(vec![0.0], vec![2.0 * PI], vec![2001]).unwrap();
    let exact = GridMap::from_fn(grid, 2, Boundary::FixedInitial, |t| vec![t[0].cos(), -t[0].sin()]).unwrap();
    let e = energy(&model.system, &exact).map_err(|e| e.to_string())?;
    ensure(d.extended_n == 2 && d.jet_dim == 5, || format!("dims {d:?}"))?;
    ensure(e <= 1e-6, || format!("energy {e:e}"))?;
    Ok(format!(
        "extended n {}, jet dimension {}, exact-solution energy {e:.2e}; binomial count {} for comparison",
        d.extended_n, d.jet_dim, d.binomial_total_space
    ))
}

fn criterion_8() -> Outcome {
    let mut resolved = Vec::new();
    for name in BUNDLED {
        let (cfg, model) = config(name);
        let report = verify::run(&cfg, &model).map_err(|e| format!("{name}: {e}"))?;
        for want in ["spray_drift_bracket_form", "spray_drift_closed_form", "nonlinear_connection_general"] {
            let f = report.finding(want).ok_or_else(|| format!("{name}: missing finding {want}"))?;
            ensure(f.pass, || format!("{name}: {want} matches neither sign"))?;
            if name == "rotation" {
                resolved.push(format!("{want}={}", f.resolution));
            }
        }
        for f in &report.sign_findings {
            ensure(f.pass, || format!("{name}: {} matches neither sign", f.name))?;
        }
    }
    Ok(format!("all findings resolved on 8 configs ({})", resolved.join(", ")))
}

/// Random expression that stays finite on [-1, 1]^3.
fn random_expr(s: &mut Sampler, depth: usize) -> String {
    let pick = |s: &mut Sampler, k: usize| ((s.uniform(0.0, k as f64)) as usize).min(k - 1);
    if depth == 0 || pick(s, 4) == 0 {
        return match pick(s, 4) {
            0 => "x1".into(),
            1 => "x2".into(),
            2 => "t1".into(),
            _ => format!("{:.3}", s.uniform(-3.0, 3.0)),
        };
    }
    let sub = |s: &mut Sampler| random_expr(s, depth - 1);
    match pick(s, 10) {
        0 => format!("({}) + ({})", sub(s), sub(s)),
        1 => format!("({}) - ({})", sub(s), sub(s)),
        2 => format!("({}) * ({})", sub(s), sub(s)),
        3 => format!("({}) / (1 + ({})^2)", sub(s), sub(s)),
        4 => format!("sin({})", sub(s)),
        5 => format!("cos({})", sub(s)),
        6 => format!("exp(sin({}))", sub(s)),
        7 => format!("log(1 + ({})^2)", sub(s)),
        8 => format!("sqrt(1 + ({})^2)", sub(s)),
        _ => format!("({})^{}", sub(s), 2 + pick(s, 2)),
    }
}

fn criterion_9() -> Outcome {
    let vars = ["x1", "x2", "t1"];
    let mut s = Sampler::new(0xe9);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let src = random_expr(&mut s, 4);
        let e = parse(&src, &vars).map_err(|err| format!("{src}: {err}"))?;
        let x = s.in_box(&[-1.0; 3], &[1.0; 3]);
        for v in 0..3 {
            let d = e.derivative(v).eval(&x).map_err(|err| err.to_string())?;
            let h = 1e-5;
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[v] += h;
            xm[v] -= h;
            let fd = (e.eval(&xp).unwrap() - e.eval(&xm).unwrap()) / (2.0 * h);
            let rel = (d - fd).abs() / d.abs().max(1.0);
            ensure(rel <= 1e-5, || format!("{src}: d/d{} = {d}, difference quotient {fd}", vars[v]))?;
            worst = worst.max(rel);
        }
    }
    let malformed = [("1/(1+x1", 7), ("x1 +", 4), ("2 * * x2", 4), ("sin x1", 4), ("x1 $ 2", 3)];
    for (src, at) in malformed {
        match parse(src, &vars) {
            Err(ExprError::Syntax { offset, .. }) if offset == at => {}
            other => return Err(format!("{src:?}: expected a syntax error at {at}, got {other:?}")),
        }
    }
    Ok(format!(
        "100 expressions, worst relative gap {worst:.2e}; {} malformed inputs located",
        malformed.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("spray-form Euler-Lagrange matches the direct oracle", criterion_1),
        ("exact circle is harmonic on the grid", criterion_2),
        ("least-squares solve recovers the circle", criterion_3),
        ("electromagnetic field and Maxwell equations", criterion_4),
        ("torsion against a finite-difference oracle", criterion_5),
        ("Einstein report on the unit sphere", criterion_6),
        ("prolongation of the oscillator", criterion_7),
        ("sign findings pinned by the oracle", criterion_8),
        ("parser and symbolic derivatives", criterion_9),
    ];
    let mut failed = 0;
    for (k, (title, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {title}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {title}: {why}", k + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
