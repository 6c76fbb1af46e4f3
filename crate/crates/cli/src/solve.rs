//! The `solve` command: least-squares minimization on the configured grid.

use jetlab_core::expr::{parse, Expr};
use jetlab_core::grid::UniformGrid;
use jetlab_core::lsqsolve::{
    el_residual, energy, minimize, node_lagrangians, Boundary, DescentMetric, GridMap, MinimizeOptions,
    MinimizeOutcome, Termination,
};
use serde::Serialize;

use crate::config::{BoundaryKind, RunConfig};
use crate::model::Model;
use crate::output::num;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub name: String,
    pub nodes: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub termination: String,
    pub converged: bool,
    pub final_max_el_residual: f64,
}

fn input(context: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{context}: {e}"))
}

fn t_exprs(key: &str, src: &[String], t_names: &[String]) -> Result<Vec<Expr>, CliError> {
    src.iter()
        .enumerate()
        .map(|(k, s)| parse(s, t_names).map_err(|e| input(&format!("{key}[{}]", k + 1), e)))
        .collect()
}

/// Initial map: `solver.init` everywhere, overridden by `boundary.values` on pinned nodes.
pub fn initial_map(cfg: &RunConfig, model: &Model) -> Result<GridMap, CliError> {
    let sys = &model.system;
    let t_names = sys.t_names();
    let init = cfg.solver.init.as_ref().or(cfg.boundary.values.as_ref()).ok_or_else(|| {
        CliError::Input("solve needs `solver.init` or `boundary.values` to build the initial map".into())
    })?;
    let init = t_exprs("solver.init", init, t_names)?;
    let pinned = match &cfg.boundary.values {
        Some(v) => Some(t_exprs("boundary.values", v, t_names)?),
        None => None,
    };
    let grid = UniformGrid::new(cfg.domain.min.clone(), cfg.domain.max.clone(), cfg.grid.clone())
        .map_err(|e| input("grid", e))?;
    let boundary = match cfg.boundary.kind {
        BoundaryKind::FixedInitial => Boundary::FixedInitial,
        BoundaryKind::FixedAll => Boundary::FixedAll,
    };
    let n = sys.n();
    let mut values = Vec::with_capacity(grid.len() * n);
    for node in 0..grid.len() {
        let t = grid.coords(node);
        let on_boundary = match boundary {
            Boundary::FixedInitial => grid.index_along(node, 0) == 0,
            Boundary::FixedAll => grid.is_boundary(node),
        };
        let source = match (&pinned, on_boundary) {
            (Some(p), true) => p,
            _ => &init,
        };
        for e in source {
            values.push(e.eval(&t).map_err(|err| input(&format!("initial map at t = {t:?}"), err))?);
        }
    }
    GridMap::new(grid, n, values, boundary).map_err(|e| input("grid", e))
}

pub fn options(cfg: &RunConfig) -> MinimizeOptions {
    let s = &cfg.solver;
    MinimizeOptions {
        max_iters: s.max_iters,
        grad_tol: s.grad_tol,
        step0: s.step0,
        backtrack: s.backtrack,
        armijo_c: s.armijo_c,
        metric: if s.metric == "euclidean" {
            DescentMetric::Euclidean
        } else {
            MinimizeOptions::default().metric
        },
    }
}

pub struct Solved {
    pub outcome: MinimizeOutcome,
    pub summary: Summary,
    pub csv: String,
}

pub fn run(cfg: &RunConfig, model: &Model) -> Result<Solved, CliError> {
    let sys = &model.system;
    let compute = |e: jetlab_core::Error| CliError::Input(format!("while solving: {e}"));
    let init = initial_map(cfg, model)?;
    let initial_energy = energy(sys, &init).map_err(compute)?;
    let outcome = minimize(sys, &init, &options(cfg)).map_err(compute)?;
    let m = &outcome.map;
    let lag = node_lagrangians(sys, m).map_err(compute)?;

    let mut csv = String::new();
    let header: Vec<&str> = sys
        .t_names()
        .iter()
        .chain(sys.x_names())
        .map(String::as_str)
        .chain(["L"])
        .collect();
    csv.push_str(&header.join(","));
    csv.push('\n');
    for node in 0..m.grid().len() {
        let row: Vec<String> = m
            .grid()
            .coords(node)
            .into_iter()
            .chain(m.value(node).iter().copied())
            .chain([lag[node]])
            .map(num)
            .collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }

    let termination = match outcome.termination {
        Termination::Converged => "converged",
        Termination::MaxIterations => "max_iterations",
        Termination::LineSearchFailure => "line_search_failure",
    };
    let summary = Summary {
        name: cfg.name.clone(),
        nodes: m.grid().len(),
        initial_energy,
        final_energy: *outcome.trace.last().expect("trace holds the initial energy"),
        iterations: outcome.iterations,
        grad_norm: outcome.grad_norm,
        termination: termination.into(),
        converged: outcome.termination == Termination::Converged,
        final_max_el_residual: el_residual(sys, m).map_err(compute)?.max_norm(),
    };
    Ok(Solved { outcome, summary, csv })
}
