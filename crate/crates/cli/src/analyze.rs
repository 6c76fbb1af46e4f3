//! The `analyze` command: every geometric object at seeded jet points.

use std::collections::BTreeMap;

use jetlab_core::fieldtheory::{einstein_report, em_field, maxwell_residuals, sasakian_metric};
use jetlab_core::grid::UniformGrid;
use jetlab_core::jetgeom::{
    adapted_frame, cartan_connection, electrodynamics_data, helicity, integrability_residual, nonlinear_connection,
    second_cov_derivatives, spray, torsion, cov_derivatives,
};
use jetlab_core::lsqsolve::lagrangian_at;
use jetlab_core::rng::Sampler;
use ndarray::{ArrayBase, Data, Dimension};
use serde::Serialize;

use crate::config::RunConfig;
use crate::model::Model;
use crate::CliError;

/// One array entry; `index` is 1-based.
#[derive(Debug, Clone, Serialize)]
pub struct Entry {
    pub point: usize,
    pub index: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SamplePoint {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub xdot: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub name: String,
    pub seed: u64,
    pub samples: usize,
    pub t_names: Vec<String>,
    pub x_names: Vec<String>,
    pub points: Vec<SamplePoint>,
    /// Keyed by object name; entries ordered by point, then index.
    pub objects: BTreeMap<String, Vec<Entry>>,
}

#[derive(Default)]
struct Objects(BTreeMap<String, Vec<Entry>>);

impl Objects {
    fn push<S: Data<Elem = f64>, D: Dimension>(&mut self, name: &str, point: usize, a: &ArrayBase<S, D>) {
        let list = self.0.entry(name.to_string()).or_default();
        for (idx, &value) in a.view().into_dyn().indexed_iter() {
            let index = idx.slice().iter().map(|k| k + 1).collect();
            list.push(Entry { point, index, value });
        }
    }

    fn scalar(&mut self, name: &str, point: usize, value: f64) {
        self.0.entry(name.to_string()).or_default().push(Entry {
            point,
            index: Vec::new(),
            value,
        });
    }
}

pub fn run(cfg: &RunConfig, model: &Model, samples: usize, seed: u64) -> Result<Analysis, CliError> {
    let sys = &model.system;
    let compute = |e: jetlab_core::Error| CliError::Input(format!("while analyzing: {e}"));
    let mut sampler = Sampler::new(seed);
    let points = model.jet_points(&mut sampler, samples);
    let mut obj = Objects::default();
    for (k, pt) in points.iter().enumerate() {
        let k = k + 1;
        let (hc, pc) = cartan_connection(sys, pt).map_err(compute)?;
        obj.push("christoffel_h", k, &hc);
        obj.push("christoffel_phi", k, &pc);
        let hcurv = sys.h().curvature(&pt.t).map_err(compute)?;
        let pcurv = sys.phi().curvature(&pt.x).map_err(compute)?;
        obj.push("curvature_h", k, &hcurv.riemann);
        obj.push("curvature_phi", k, &pcurv.riemann);
        obj.push("ricci_h", k, &hcurv.ricci);
        obj.push("ricci_phi", k, &pcurv.ricci);
        obj.scalar("scalar_curvature_h", k, hcurv.scalar);
        obj.scalar("scalar_curvature_phi", k, pcurv.scalar);

        let (ct, cx) = cov_derivatives(sys, pt).map_err(compute)?;
        obj.push("cov_derivative_t", k, &ct);
        obj.push("cov_derivative_x", k, &cx);
        let (cxt, cxx) = second_cov_derivatives(sys, pt).map_err(compute)?;
        obj.push("cov_derivative_xt", k, &cxt);
        obj.push("cov_derivative_xx", k, &cxx);
        obj.push("helicity", k, &helicity(sys, pt).map_err(compute)?);

        let ed = electrodynamics_data(sys, pt).map_err(compute)?;
        obj.push("potential_u", k, &ed.u);
        obj.scalar("potential_phi", k, ed.phi);
        obj.push("potential_u_skew", k, &ed.uskew);
        obj.scalar("lagrangian", k, lagrangian_at(sys, pt).map_err(compute)?);

        let sp = spray(sys, pt).map_err(compute)?;
        obj.push("spray_h", k, &sp.h);
        obj.push("spray_g", k, &sp.g);
        obj.push("spray_g_trace", k, &ndarray::Array1::from(sp.gsum.clone()));
        obj.push("spray_drift", k, &ndarray::Array1::from(sp.f.clone()));

        let conn = nonlinear_connection(sys, pt).map_err(compute)?;
        obj.push("connection_canonical_m", k, &conn.canonical.m);
        obj.push("connection_canonical_n", k, &conn.canonical.n);
        obj.push("connection_induced_m", k, &conn.induced.m);
        obj.push("connection_induced_n", k, &conn.induced.n);
        obj.push("adapted_frame", k, &adapted_frame(&conn.induced).frame);

        let tor = torsion(sys, pt).map_err(compute)?;
        obj.push("torsion_rtt", k, &tor.rtt);
        obj.push("torsion_rtj", k, &tor.rtj);
        obj.push("torsion_rjk", k, &tor.rjk);

        obj.push("em_field", k, &em_field(sys, pt).map_err(compute)?.f);
        let mx = maxwell_residuals(sys, pt).map_err(compute)?;
        obj.push("maxwell_eq1", k, &mx.eq1);
        obj.push("maxwell_eq2", k, &mx.eq2);
        let sas = sasakian_metric(sys, pt).map_err(compute)?;
        obj.push("sasakian_adapted", k, &sas.adapted);
        obj.push("sasakian_coordinate", k, &sas.coordinate);
        obj.push("integrability", k, &integrability_residual(sys, pt).map_err(compute)?);
    }

    if let Some(e) = &cfg.einstein {
        let grid = |(lo, hi): &(Vec<f64>, Vec<f64>)| UniformGrid::new(lo.clone(), hi.clone(), vec![e.nodes; lo.len()]);
        let r = einstein_report(
            sys,
            e.k,
            &grid(&model.t_box).map_err(compute)?,
            &grid(&model.x_box).map_err(compute)?,
        )
        .map_err(compute)?;
        // Evaluated once at the grid centres, reported as point 0.
        obj.push("einstein_t_tt", 0, &r.ttt);
        obj.push("einstein_t_xx", 0, &r.txx);
        obj.push("einstein_t_vv", 0, &r.tvv);
        obj.push("einstein_conservation", 0, &ndarray::Array1::from(r.conservation.to_vec()));
    }

    Ok(Analysis {
        name: cfg.name.clone(),
        seed,
        samples,
        t_names: sys.t_names().to_vec(),
        x_names: sys.x_names().to_vec(),
        points: points
            .iter()
            .map(|pt| SamplePoint {
                t: pt.t.clone(),
                x: pt.x.clone(),
                xdot: pt.xdot.outer_iter().map(|r| r.to_vec()).collect(),
            })
            .collect(),
        objects: obj.0,
    })
}
