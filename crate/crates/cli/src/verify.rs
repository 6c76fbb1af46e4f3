//! The `verify` command: every identity the engine promises, checked at seeded points.

use std::collections::BTreeMap;

use jetlab_core::fieldtheory::{einstein_report, em_field, maxwell_residuals, sasakian_metric, MaxwellResiduals};
use jetlab_core::grid::UniformGrid;
use jetlab_core::jetgeom::{
    adapted_frame, cov_derivatives, electrodynamics_data, helicity, integrability_residual, nonlinear_connection,
    spray, torsion, JetPoint,
};
use jetlab_core::linalg::is_positive_definite;
use jetlab_core::lsqsolve::{lagrangian_forms, SmoothMap};
use jetlab_core::rng::Sampler;
use jetlab_core::scenarios::{closed_forms, fibre_inner, ym_lagrangian, ym_least_squares_trace, ScenarioKind};
use jetlab_core::signs::{connection_finding, drift_findings, scenario_connection_finding, SignFinding};
use ndarray::{Array2, ArrayBase, Data, Dimension};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::model::Model;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Soft checks are reported but do not decide the exit code.
    pub hard: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignReport {
    pub name: String,
    pub printed_residual: f64,
    pub flipped_residual: f64,
    pub tolerance: f64,
    pub resolution: String,
    pub pass: bool,
}

impl From<&SignFinding> for SignReport {
    fn from(f: &SignFinding) -> Self {
        SignReport {
            name: f.name.to_string(),
            printed_residual: f.printed_residual,
            flipped_residual: f.flipped_residual,
            tolerance: f.tolerance,
            resolution: f.resolution.as_str().to_string(),
            pass: f.passes(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub name: String,
    pub scenario: Option<String>,
    pub seed: u64,
    pub samples: usize,
    pub pass: bool,
    pub maxwell_eq2_max_residual: f64,
    pub checks: Vec<Check>,
    pub sign_findings: Vec<SignReport>,
    pub info: BTreeMap<String, Value>,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn finding(&self, name: &str) -> Option<&SignReport> {
        self.sign_findings.iter().find(|f| f.name == name)
    }
}

/// Running maxima of residuals across sample points.
#[derive(Default)]
struct Tally {
    order: Vec<(String, f64, bool)>,
    worst: BTreeMap<String, f64>,
}

impl Tally {
    fn declare(&mut self, name: &str, tolerance: f64, hard: bool) {
        self.order.push((name.to_string(), tolerance, hard));
        self.worst.insert(name.to_string(), 0.0);
    }

    fn record(&mut self, name: &str, residual: f64) {
        let w = self.worst.get_mut(name).expect("declared check");
        // NaN must fail the check rather than vanish in `max`.
        *w = if residual.is_nan() || w.is_nan() { f64::NAN } else { w.max(residual) };
    }

    fn finish(self) -> Vec<Check> {
        self.order
            .into_iter()
            .map(|(name, tolerance, hard)| {
                let max_residual = self.worst[&name];
                Check {
                    pass: max_residual <= tolerance,
                    name,
                    max_residual,
                    tolerance,
                    hard,
                }
            })
            .collect()
    }
}

fn max_abs<S: Data<Elem = f64>, D: Dimension>(a: &ArrayBase<S, D>) -> f64 {
    a.iter().fold(0.0, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
}

fn max_diff<S: Data<Elem = f64>, T: Data<Elem = f64>, D: Dimension>(a: &ArrayBase<S, D>, b: &ArrayBase<T, D>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `max |a − b| / max(max |b|, 1)`
fn rel_diff<S: Data<Elem = f64>, T: Data<Elem = f64>, D: Dimension>(a: &ArrayBase<S, D>, b: &ArrayBase<T, D>) -> f64 {
    max_diff(a, b) / max_abs(b).max(1.0)
}

fn point_json(pt: &JetPoint) -> Value {
    json!({
        "t": pt.t,
        "x": pt.x,
        "xdot": pt.xdot.outer_iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
    })
}

pub fn run(cfg: &RunConfig, model: &Model) -> Result<VerifyReport, CliError> {
    let v = &cfg.verify;
    let tol = v.tol;
    let sys = &model.system;
    let compute = |e: jetlab_core::Error| CliError::Input(format!("while verifying: {e}"));
    let mut sampler = Sampler::new(v.seed);
    let points = model.jet_points(&mut sampler, v.samples);
    let mut info = BTreeMap::new();

    let mut t = Tally::default();
    t.declare("lagrangian_forms_agree", tol, true);
    t.declare("lagrangian_nonnegative", 0.0, true);
    t.declare("partial_direction_independence", 0.0, true);
    t.declare("helicity_phi_antisymmetry", tol, true);
    t.declare("skew_potential_antisymmetry", tol, true);
    t.declare("spray_symmetry", tol, true);
    t.declare("induced_temporal_connection", tol, true);
    t.declare("adapted_frame_duality", tol, true);
    t.declare("torsion_rtt_antisymmetry", tol, true);
    t.declare("torsion_rtt_linearity", tol, true);
    t.declare("em_field_antisymmetry", 0.0, true);
    t.declare("maxwell_eq1_max_residual", tol, false);
    t.declare("maxwell_eq1_variant_max_residual", tol, false);
    t.declare("maxwell_eq2_max_residual", tol, true);
    t.declare("maxwell_eq3_max_residual", 0.0, true);
    t.declare("sasakian_positive_definite", 0.0, true);
    t.declare("integrability_max_residual", tol, false);

    for pt in &points {
        let lf = lagrangian_forms(sys, pt).map_err(compute)?;
        t.record("lagrangian_forms_agree", (lf.least_squares - lf.expanded).abs() / lf.least_squares.abs().max(1.0));
        t.record("lagrangian_nonnegative", (-lf.least_squares).max(0.0));

        let moved = JetPoint::new(pt.t.clone(), pt.x.clone(), pt.xdot.mapv(|v| 1.0 - 2.0 * v));
        let (ct, cx) = cov_derivatives(sys, pt).map_err(compute)?;
        let (ct2, cx2) = cov_derivatives(sys, &moved).map_err(compute)?;
        let ed = electrodynamics_data(sys, pt).map_err(compute)?;
        let ed2 = electrodynamics_data(sys, &moved).map_err(compute)?;
        let em = em_field(sys, pt).map_err(compute)?;
        let em2 = em_field(sys, &moved).map_err(compute)?;
        let drift = max_diff(&ct, &ct2)
            .max(max_diff(&cx, &cx2))
            .max(max_diff(&ed.u, &ed2.u))
            .max((ed.phi - ed2.phi).abs())
            .max(max_diff(&ed.uskew, &ed2.uskew))
            .max(max_diff(&em.f, &em2.f));
        t.record("partial_direction_independence", drift);

        let (p, n) = (sys.p(), sys.n());
        let phi = sys.phi().value_at(&pt.x).map_err(compute)?;
        let hel = helicity(sys, pt).map_err(compute)?;
        let mut worst = 0.0f64;
        for a in 0..p {
            for i in 0..n {
                for j in 0..n {
                    let l: f64 = (0..n).map(|m| phi[[i, m]] * hel[[m, j, a]]).sum();
                    let r: f64 = (0..n).map(|m| phi[[j, m]] * hel[[m, i, a]]).sum();
                    worst = worst.max((l + r).abs());
                }
            }
        }
        t.record("helicity_phi_antisymmetry", worst);
        t.record("skew_potential_antisymmetry", max_diff(&ed.uskew, &ed.uskew.clone().permuted_axes([0, 2, 1]).mapv(|v| -v)));

        let sp = spray(sys, pt).map_err(compute)?;
        t.record(
            "spray_symmetry",
            max_diff(&sp.h, &sp.h.clone().permuted_axes([0, 2, 1])).max(max_diff(&sp.g, &sp.g.clone().permuted_axes([0, 2, 1]))),
        );
        let conn = nonlinear_connection(sys, pt).map_err(compute)?;
        t.record("induced_temporal_connection", max_diff(&conn.induced.m, &(&sp.h * 2.0)));
        let frame = adapted_frame(&conn.induced);
        t.record("adapted_frame_duality", max_diff(&frame.pairing(), &Array2::eye(frame.frame.nrows())));

        let tor = torsion(sys, pt).map_err(compute)?;
        t.record("torsion_rtt_antisymmetry", max_diff(&tor.rtt, &tor.rtt.clone().permuted_axes([0, 1, 3, 2]).mapv(|v| -v)));
        let doubled = JetPoint::new(pt.t.clone(), pt.x.clone(), &pt.xdot * 2.0);
        let tor2 = torsion(sys, &doubled).map_err(compute)?;
        t.record("torsion_rtt_linearity", rel_diff(&tor2.rtt, &(&tor.rtt * 2.0)));

        t.record("em_field_antisymmetry", max_diff(&em.f, &em.f.clone().permuted_axes([0, 2, 1]).mapv(|v| -v)));
        let mx = maxwell_residuals(sys, pt).map_err(compute)?;
        t.record("maxwell_eq1_max_residual", MaxwellResiduals::max_abs(&mx.eq1));
        t.record("maxwell_eq1_variant_max_residual", MaxwellResiduals::max_abs(&mx.eq1_variant));
        t.record("maxwell_eq2_max_residual", MaxwellResiduals::max_abs(&mx.eq2));
        t.record("maxwell_eq3_max_residual", MaxwellResiduals::max_abs(&mx.eq3));

        let sas = sasakian_metric(sys, pt).map_err(compute)?;
        let pd = is_positive_definite(&sas.coordinate) && is_positive_definite(&sas.adapted);
        t.record("sasakian_positive_definite", if pd { 0.0 } else { 1.0 });
        t.record("integrability_max_residual", max_abs(&integrability_residual(sys, pt).map_err(compute)?));
    }

    // Euler-Lagrange comparison on analytic maps, which also pins the drift sign.
    let maps: Vec<SmoothMap> = (0..v.maps)
        .map(|_| SmoothMap::random(&mut sampler, &model.t_box.0, &model.t_box.1, &model.x_box.0, &model.x_box.1))
        .collect();
    let t_points: Vec<Vec<f64>> = (0..5).map(|_| sampler.in_box(&model.t_box.0, &model.t_box.1)).collect();
    let mut findings = Vec::new();
    if !maps.is_empty() {
        let [bracket, closed] = drift_findings(sys, &maps, &t_points, v.el_tol).map_err(compute)?;
        t.declare("el_coherence_spray_form", v.el_tol, true);
        t.record("el_coherence_spray_form", bracket.printed_residual);
        findings.push(bracket);
        findings.push(closed);
    }
    findings.push(connection_finding(sys, &points, tol).map_err(compute)?);

    if let Some(sc) = &model.scenario {
        if let Some(f) = scenario_connection_finding(sc, &points, tol).map_err(compute)? {
            findings.push(f);
            for name in ["closed_form_em", "closed_form_m", "closed_form_rtt", "closed_form_rtj", "closed_form_rjk"] {
                t.declare(name, tol, true);
            }
            for pt in &points {
                let cf = closed_forms(sc, pt).map_err(compute)?.expect("closed forms exist for this scenario");
                let em = em_field(sys, pt).map_err(compute)?;
                let conn = nonlinear_connection(sys, pt).map_err(compute)?;
                let tor = torsion(sys, pt).map_err(compute)?;
                t.record("closed_form_em", rel_diff(&em.f, &cf.em));
                t.record("closed_form_m", rel_diff(&conn.induced.m, &cf.m));
                t.record("closed_form_rtt", rel_diff(&tor.rtt, &cf.rtt));
                t.record("closed_form_rtj", rel_diff(&tor.rtj, &cf.rtj));
                t.record("closed_form_rjk", rel_diff(&tor.rjk, &cf.rjk));
            }
        }
        if let ScenarioKind::YangMills(ing) = &sc.kind {
            t.declare("yang_mills_trace_lagrangian", tol, true);
            for pt in &points {
                let printed = ym_least_squares_trace(sc, pt).map_err(compute)?;
                let ls = lagrangian_forms(sys, pt).map_err(compute)?.least_squares;
                t.record("yang_mills_trace_lagrangian", (printed + ls).abs() / ls.abs().max(1.0));
            }
            let pt = &points[0];
            let curvature: Vec<Array2<f64>> = ing
                .field
                .iter()
                .map(|m| {
                    let q = ing.q;
                    let mut out = Array2::zeros((q, q));
                    for a in 0..q {
                        for b in 0..q {
                            out[[a, b]] = m[a][b].eval(&pt.t)?;
                        }
                    }
                    Ok(out)
                })
                .collect::<Result<_, jetlab_core::expr::EvalError>>()
                .map_err(|e| compute(e.into()))?;
            let h = ing.h.value_at(&pt.t).map_err(compute)?;
            let c = ym_lagrangian(&h, &curvature).map_err(compute)?;
            let fibre: Vec<Value> = curvature
                .iter()
                .map(|f| {
                    let (used, printed) = fibre_inner(f, f);
                    json!({"trace": used, "printed_sign": printed})
                })
                .collect();
            info.insert(
                "yang_mills".into(),
                json!({
                    "t": pt.t,
                    "contraction_as_printed": c.value,
                    "contraction_positive": c.positive,
                    "contraction_literal_pairing": c.literal,
                    "field_self_inner": fibre,
                }),
            );
        }
    }

    if let Some(d) = &model.prolongation {
        info.insert(
            "prolongation".into(),
            json!({
                "order": d.r,
                "extended_n": d.extended_n,
                "jet_dim": d.jet_dim,
                "binomial_total_space": d.binomial_total_space,
                "binomial_jet_dim": d.binomial_jet_dim,
            }),
        );
    }

    if let Some(e) = &cfg.einstein {
        let grid = |(lo, hi): &(Vec<f64>, Vec<f64>)| UniformGrid::new(lo.clone(), hi.clone(), vec![e.nodes; lo.len()]);
        let tg = grid(&model.t_box).map_err(compute)?;
        let xg = grid(&model.x_box).map_err(compute)?;
        let r = einstein_report(sys, e.k, &tg, &xg).map_err(compute)?;
        t.declare("einstein_conservation_t", e.tol, true);
        t.declare("einstein_conservation_x", e.tol, true);
        t.record("einstein_conservation_t", r.conservation[0]);
        t.record("einstein_conservation_x", r.conservation[1]);
        let rows = |a: &Array2<f64>| a.outer_iter().map(|r| r.to_vec()).collect::<Vec<_>>();
        info.insert(
            "einstein".into(),
            json!({
                "K": r.k,
                "t": r.t,
                "x": r.x,
                "T_tt": rows(&r.ttt),
                "T_xx": rows(&r.txx),
                "T_vv_max_abs": max_abs(&r.tvv),
                "zero_blocks": r.zero_blocks,
            }),
        );
    }

    info.insert("first_point".into(), point_json(&points[0]));
    let checks = t.finish();
    let sign_findings: Vec<SignReport> = findings.iter().map(SignReport::from).collect();
    let pass = checks.iter().all(|c| c.pass || !c.hard) && sign_findings.iter().all(|f| f.pass);
    let eq2 = checks
        .iter()
        .find(|c| c.name == "maxwell_eq2_max_residual")
        .map_or(0.0, |c| c.max_residual);
    Ok(VerifyReport {
        name: cfg.name.clone(),
        scenario: cfg.scenario.as_ref().map(|s| s.kind().to_string()),
        seed: v.seed,
        samples: v.samples,
        pass,
        maxwell_eq2_max_residual: eq2,
        checks,
        sign_findings,
        info,
    })
}
