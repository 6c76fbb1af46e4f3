//! The `reduce` command: rewrite a higher-order config as its first-order prolongation.
//!
//! `x_domain`, `boundary.values` and `solver.init` are already written in the
//! extended coordinates, so they carry over unchanged.

use jetlab_core::lsqsolve::DimensionReport;
use jetlab_core::riemann::MetricField;

use crate::config::{Coordinates, Dims, RunConfig};
use crate::model::Model;
use crate::CliError;

fn print_metric(m: &MetricField) -> Vec<Vec<String>> {
    let d = m.names().len();
    (0..d).map(|i| (0..d).map(|j| m.entry(i, j).to_string()).collect()).collect()
}

pub struct Reduced {
    pub config: RunConfig,
    pub dims: DimensionReport,
}

pub fn run(cfg: &RunConfig, model: &Model) -> Result<Reduced, CliError> {
    let dims = model.prolongation.ok_or_else(|| {
        CliError::Input("reduce needs a `higher_order` scenario".into())
    })?;
    let sys = &model.system;
    let mut out = cfg.clone();
    out.name = format!("{}_reduced", cfg.name);
    out.dims = Dims { p: sys.p(), n: sys.n() };
    out.coordinates = Some(Coordinates {
        t: sys.t_names().to_vec(),
        x: sys.x_names().to_vec(),
    });
    out.metric_h = Some(print_metric(sys.h()));
    out.metric_phi = Some(print_metric(sys.phi()));
    out.x = Some(
        (0..sys.n())
            .map(|i| (0..sys.p()).map(|a| sys.field_entry(i, a).to_string()).collect())
            .collect(),
    );
    out.scenario = None;
    Ok(Reduced { config: out, dims })
}
