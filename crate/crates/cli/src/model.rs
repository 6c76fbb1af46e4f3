//! Turns a [`RunConfig`] into a system of PDEs plus scenario data.

use jetlab_core::expr::{parse, Expr};
use jetlab_core::jetgeom::{JetPoint, SystemSpec};
use jetlab_core::lsqsolve::{prolong, DimensionReport, HigherOrderSpec};
use jetlab_core::riemann::MetricField;
use jetlab_core::rng::Sampler;
use jetlab_core::scenarios::{
    build_group, build_orbits, build_pfaff, build_yang_mills, ym_coordinate_names, ym_pairs, GroupIngredients,
    Scenario, YangMillsIngredients,
};
use ndarray::Array2;

use crate::config::{RunConfig, ScenarioConfig};
use crate::CliError;

pub struct Model {
    pub system: SystemSpec,
    pub scenario: Option<Scenario>,
    pub prolongation: Option<DimensionReport>,
    pub t_box: (Vec<f64>, Vec<f64>),
    pub x_box: (Vec<f64>, Vec<f64>),
}

fn input(context: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{context}: {e}"))
}

fn expr(context: String, src: &str, vars: &[String]) -> Result<Expr, CliError> {
    parse(src, vars).map_err(|e| input(&context, e))
}

fn exprs(context: &str, src: &[String], vars: &[String]) -> Result<Vec<Expr>, CliError> {
    src.iter()
        .enumerate()
        .map(|(k, s)| expr(format!("{context}[{}]", k + 1), s, vars))
        .collect()
}

fn table(context: &str, rows: &[Vec<String>], vars: &[String]) -> Result<Vec<Vec<Expr>>, CliError> {
    rows.iter()
        .enumerate()
        .map(|(r, row)| exprs(&format!("{context}[{}]", r + 1), row, vars))
        .collect()
}

fn metric(label: &str, key: &str, rows: Option<&Vec<Vec<String>>>, vars: &[String]) -> Result<MetricField, CliError> {
    let rows = rows.ok_or_else(|| CliError::Input(format!("`{key}` is required for this configuration")))?;
    MetricField::new(label, vars.to_vec(), table(key, rows, vars)?).map_err(|e| input(key, e))
}

/// A metric the scenario fixes; a supplied table must agree with it entrywise.
fn fixed_metric(key: &str, rows: Option<&Vec<Vec<String>>>, vars: &[String]) -> Result<(), CliError> {
    let Some(rows) = rows else { return Ok(()) };
    let t = table(key, rows, vars)?;
    for (i, row) in t.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            if e.as_const() != Some(want) {
                return Err(CliError::Input(format!(
                    "{key}[{}][{}]: this scenario fixes the metric to the identity",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

fn lower_triangle_count(q: usize) -> usize {
    q * q.saturating_sub(1) / 2
}

impl Model {
    pub fn build(cfg: &RunConfig) -> Result<Self, CliError> {
        let (p, n) = (cfg.dims.p, cfg.dims.n);
        let (t_names, x_names) = (cfg.t_names(), cfg.x_names());
        let h = || metric("h", "metric_h", cfg.metric_h.as_ref(), &t_names);
        let phi = || metric("phi", "metric_phi", cfg.metric_phi.as_ref(), &x_names);
        let mut prolongation = None;
        let (system, scenario) = match (&cfg.x, &cfg.scenario) {
            (Some(x), None) => {
                let field = table("X", x, &[t_names.clone(), x_names.clone()].concat())?;
                let sys = SystemSpec::new(t_names.clone(), x_names.clone(), h()?, phi()?, field).map_err(|e| input("X", e))?;
                (sys, None)
            }
            (None, Some(sc)) => {
                let built = match sc {
                    ScenarioConfig::Orbits { xi } => {
                        if p != 1 || xi.len() != n {
                            return Err(CliError::Input(format!(
                                "scenario.xi: orbits need p = 1 and {n} components, got p = {p} and {}",
                                xi.len()
                            )));
                        }
                        fixed_metric("metric_h", cfg.metric_h.as_ref(), &t_names)?;
                        build_orbits(&exprs("scenario.xi", xi, &x_names)?, phi()?)
                    }
                    ScenarioConfig::Pfaff { a } => {
                        if n != 1 || a.len() != p {
                            return Err(CliError::Input(format!(
                                "scenario.a: Pfaffian systems need n = 1 and {p} components"
                            )));
                        }
                        fixed_metric("metric_phi", cfg.metric_phi.as_ref(), &x_names)?;
                        build_pfaff(&exprs("scenario.a", a, &t_names)?, h()?)
                    }
                    ScenarioConfig::Group { xi, a } => {
                        if xi.is_empty() || xi.len() != a.len() {
                            return Err(CliError::Input(
                                "scenario: `xi` and `a` need the same positive number of generators".into(),
                            ));
                        }
                        let ing = GroupIngredients {
                            xi: xi
                                .iter()
                                .enumerate()
                                .map(|(k, v)| exprs(&format!("scenario.xi[{}]", k + 1), v, &x_names))
                                .collect::<Result<_, _>>()?,
                            a: a.iter()
                                .enumerate()
                                .map(|(k, v)| exprs(&format!("scenario.a[{}]", k + 1), v, &t_names))
                                .collect::<Result<_, _>>()?,
                        };
                        build_group(&ing, h()?, phi()?)
                    }
                    ScenarioConfig::YangMills { q, f, field } => {
                        if n != p * lower_triangle_count(*q) {
                            return Err(CliError::Input(format!(
                                "dims.n: Yang-Mills with p = {p}, q = {q} has n = {}",
                                p * lower_triangle_count(*q)
                            )));
                        }
                        let (nf, nfield) = (ym_pairs(p, false).len(), ym_pairs(p, true).len());
                        if f.len() != nf || field.len() != nfield {
                            return Err(CliError::Input(format!(
                                "scenario: Yang-Mills needs {nf} `f` and {nfield} `field` matrices"
                            )));
                        }
                        let coords: Vec<String> = t_names.iter().cloned().chain(ym_coordinate_names(p, *q)).collect();
                        let matrices = |key: &str, m: &[Vec<Vec<String>>], vars: &[String]| {
                            m.iter()
                                .enumerate()
                                .map(|(k, rows)| {
                                    let ctx = format!("scenario.{key}[{}]", k + 1);
                                    if rows.len() != *q || rows.iter().any(|r| r.len() != *q) {
                                        return Err(CliError::Input(format!("{ctx}: expected a {q}x{q} matrix")));
                                    }
                                    table(&ctx, rows, vars)
                                })
                                .collect::<Result<Vec<_>, _>>()
                        };
                        let ing = YangMillsIngredients {
                            q: *q,
                            p,
                            f: matrices("f", f, &coords)?,
                            field: matrices("field", field, &t_names)?,
                            h: h()?,
                        };
                        build_yang_mills(&ing)
                    }
                    ScenarioConfig::HigherOrder { r, rhs, extended_phi } => {
                        let mut spec = HigherOrderSpec::parse(*r, t_names.clone(), x_names.clone(), h()?, phi()?, rhs)
                            .map_err(|e| input("scenario.rhs", e))?;
                        if let Some(rows) = extended_phi {
                            let names = HigherOrderSpec::jet_coordinate_names(*r, p, &x_names);
                            let m = MetricField::new("phi", names.clone(), table("scenario.extended_phi", rows, &names)?)
                                .map_err(|e| input("scenario.extended_phi", e))?;
                            spec = spec.with_extended_metric(m);
                        }
                        let pr = prolong(&spec).map_err(|e| input("scenario", e))?;
                        prolongation = Some(pr.dims);
                        let sys = pr.system;
                        let model = Self::finish(cfg, sys, None, prolongation)?;
                        return Ok(model);
                    }
                };
                let sc = built.map_err(|e| input("scenario", e))?;
                (sc.system.clone(), Some(sc))
            }
            _ => unreachable!("checked when the config was loaded"),
        };
        Self::finish(cfg, system, scenario, prolongation)
    }

    fn finish(
        cfg: &RunConfig,
        system: SystemSpec,
        scenario: Option<Scenario>,
        prolongation: Option<DimensionReport>,
    ) -> Result<Self, CliError> {
        let n = system.n();
        let x_box = match &cfg.x_domain {
            Some(d) => {
                if d.min.len() != n {
                    return Err(CliError::Input(format!("x_domain: expected {n} entries per bound")));
                }
                (d.min.clone(), d.max.clone())
            }
            None => (vec![-1.0; n], vec![1.0; n]),
        };
        for (key, v) in [("boundary.values", &cfg.boundary.values), ("solver.init", &cfg.solver.init)] {
            if v.as_ref().is_some_and(|v| v.len() != n) {
                return Err(CliError::Input(format!("{key}: expected {n} expressions")));
            }
        }
        let model = Model {
            system,
            scenario,
            prolongation,
            t_box: (cfg.domain.min.clone(), cfg.domain.max.clone()),
            x_box,
        };
        model.validate_metrics(cfg.verify.seed)?;
        Ok(model)
    }

    /// Symmetry and positive definiteness at the box corners, centre and seeded interior points.
    fn validate_metrics(&self, seed: u64) -> Result<(), CliError> {
        let mut s = Sampler::new(seed ^ 0x6d65_7472_6963);
        let samples = |lo: &[f64], hi: &[f64], s: &mut Sampler| {
            let mut pts = vec![
                lo.to_vec(),
                hi.to_vec(),
                lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect(),
            ];
            pts.extend((0..16).map(|_| s.in_box(lo, hi)));
            pts
        };
        let ts = samples(&self.t_box.0, &self.t_box.1, &mut s);
        let xs = samples(&self.x_box.0, &self.x_box.1, &mut s);
        self.system.validate_metrics(&ts, &xs).map_err(|e| {
            let key = match &e {
                jetlab_core::Error::AsymmetricMetric { metric, .. } | jetlab_core::Error::NotPositiveDefinite { metric, .. } => {
                    if metric == "h" {
                        "metric_h"
                    } else {
                        "metric_phi"
                    }
                }
                _ => "metrics",
            };
            input(key, e)
        })
    }

    /// Seeded jet points: `t` and `x` uniform in their boxes, partials uniform in [−1, 1].
    pub fn jet_points(&self, sampler: &mut Sampler, count: usize) -> Vec<JetPoint> {
        let (p, n) = (self.system.p(), self.system.n());
        (0..count)
            .map(|_| {
                let t = sampler.in_box(&self.t_box.0, &self.t_box.1);
                let x = sampler.in_box(&self.x_box.0, &self.x_box.1);
                let xdot = Array2::from_shape_fn((n, p), |_| sampler.uniform(-1.0, 1.0));
                JetPoint::new(t, x, xdot)
            })
            .collect()
    }
}
