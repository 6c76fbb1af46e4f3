//! Descent on the discrete least-squares energy with an Armijo line search.
//!
//! The energy Hessian of a grid map behaves like a discrete Laplacian, so
//! plain Euclidean steepest descent needs O(N²) iterations on an N-node grid.
//! The default [`DescentMetric::Preconditioned`] instead measures steps in the
//! metric `2 Σ w √h [ε φ(u, u) + h^{αβ} φ(J_α u, J_β u)]`, where
//! `J_α u = ∂_α u − ∂X_α/∂x · u` is the linearized residual at the current
//! iterate. Each step is still a descent step checked by Armijo; the metric
//! only changes its direction.

use crate::error::Result;
use crate::linalg::BandedSpd;
use crate::jetgeom::SystemSpec;

use super::{base_nodes, energy_with, lagrangian_partials, BaseNode, GridMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DescentMetric {
    /// Steepest descent on the raw node values.
    Euclidean,
    /// Linearization-weighted Sobolev metric with mass weight `mass`.
    Preconditioned { mass: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub step0: f64,
    pub backtrack: f64,
    pub armijo_c: f64,
    pub metric: DescentMetric,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            max_iters: 5000,
            grad_tol: 1e-10,
            step0: 1.0,
            backtrack: 0.5,
            armijo_c: 1e-4,
            metric: DescentMetric::Preconditioned { mass: 1e-4 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Gradient max-norm reached `grad_tol`.
    Converged,
    MaxIterations,
    /// No step above 1e-16 decreased the energy.
    LineSearchFailure,
}

#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub map: GridMap,
    /// Energy before the first step and after every accepted step.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
    pub termination: Termination,
}

const MIN_STEP: f64 = 1e-16;
/// Above this many band operations the preconditioner falls back to its diagonal.
const MAX_BAND_WORK: f64 = 4e9;

/// Energy gradient with respect to every node value (pinned entries zeroed),
/// plus the preconditioner when requested.
fn gradient(
    sys: &SystemSpec,
    m: &GridMap,
    base: &[BaseNode],
    metric: DescentMetric,
    free: &[Option<usize>],
    free_count: usize,
) -> Result<(Vec<f64>, Option<Preconditioner>)> {
    let grid = m.grid();
    let (p, n) = (sys.p(), sys.n());
    let mut grad = vec![0.0; m.values().len()];
    let mut pre = match metric {
        DescentMetric::Euclidean => None,
        DescentMetric::Preconditioned { mass } => Some((mass, Assembly::new(grid, n, free_count))),
    };
    for node in 0..grid.len() {
        let b = &base[node];
        let lp = lagrangian_partials(sys, b, &grid.coords(node), m.value(node), &m.partials(node))?;
        let scale = b.weight * b.sqrt_h;
        for k in 0..n {
            grad[node * n + k] += scale * lp.dx[k];
        }
        let stencils: Vec<_> = (0..p).map(|a| grid.first_derivative(node, a)).collect();
        for (a, s) in stencils.iter().enumerate() {
            for q in 0..3 {
                for k in 0..n {
                    grad[s.nodes[q] * n + k] += scale * lp.dxdot[[k, a]] * s.coeffs[q];
                }
            }
        }
        if let Some((mass, asm)) = pre.as_mut() {
            // Rows of J_α u: stencil terms minus the field Jacobian at this node.
            let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(p * n);
            for (a, s) in stencils.iter().enumerate() {
                for i in 0..n {
                    let mut row = Vec::with_capacity(3 + n);
                    for q in 0..3 {
                        if s.coeffs[q] != 0.0 {
                            row.push((s.nodes[q] * n + i, s.coeffs[q]));
                        }
                    }
                    for j in 0..n {
                        let c = lp.field_x[[i, a, j]];
                        if c != 0.0 {
                            row.push((node * n + j, -c));
                        }
                    }
                    rows.push(row);
                }
            }
            let w = 2.0 * scale;
            for a in 0..p {
                for bb in 0..p {
                    let hab = b.h_inv[[a, bb]];
                    if hab == 0.0 {
                        continue;
                    }
                    for i in 0..n {
                        for j in 0..n {
                            let c = w * hab * lp.phi[[i, j]];
                            if c != 0.0 {
                                asm.add_outer(&rows[a * n + i], &rows[bb * n + j], c, free);
                            }
                        }
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let c = w * *mass * lp.phi[[i, j]];
                    asm.add_outer(&[(node * n + i, 1.0)], &[(node * n + j, 1.0)], c, free);
                }
            }
        }
    }
    for node in 0..grid.len() {
        if m.is_pinned(node) {
            for k in 0..n {
                grad[node * n + k] = 0.0;
            }
        }
    }
    Ok((grad, pre.map(|(_, asm)| asm.finish())))
}

/// Lower-band accumulation over free degrees of freedom.
struct Assembly {
    band: Option<BandedSpd>,
    diag: Vec<f64>,
}

enum Preconditioner {
    Banded(BandedSpd),
    Diagonal(Vec<f64>),
}

impl Assembly {
    fn new(grid: &crate::grid::UniformGrid, n: usize, free_count: usize) -> Self {
        let bw = n * (grid.coupling_reach() + 1) - 1;
        let work = free_count as f64 * (bw as f64).powi(2);
        let band = (work <= MAX_BAND_WORK).then(|| BandedSpd::zeros(free_count, bw));
        Assembly {
            band,
            diag: vec![0.0; free_count],
        }
    }

    fn add_outer(&mut self, u: &[(usize, f64)], v: &[(usize, f64)], c: f64, free: &[Option<usize>]) {
        for &(r, cu) in u {
            let Some(fr) = free[r] else { continue };
            for &(s, cv) in v {
                let Some(fs) = free[s] else { continue };
                let val = c * cu * cv;
                if fr == fs {
                    self.diag[fr] += val;
                }
                if let Some(band) = self.band.as_mut() {
                    if fr >= fs {
                        band.add_lower(fr, fs, val);
                    }
                }
            }
        }
    }

    fn finish(self) -> Preconditioner {
        if let Some(mut band) = self.band {
            if band.factor() {
                return Preconditioner::Banded(band);
            }
        }
        Preconditioner::Diagonal(self.diag)
    }
}

impl Preconditioner {
    fn apply(&self, rhs: &mut [f64]) {
        match self {
            Preconditioner::Banded(b) => b.solve(rhs),
            Preconditioner::Diagonal(d) => {
                for (v, &s) in rhs.iter_mut().zip(d) {
                    if s > 0.0 {
                        *v /= s;
                    }
                }
            }
        }
    }
}

/// Minimizes the discrete energy over the free node values of `init`.
pub fn minimize(sys: &SystemSpec, init: &GridMap, opts: &MinimizeOptions) -> Result<MinimizeOutcome> {
    init.check(sys)?;
    let grid = init.grid().clone();
    let n = sys.n();
    let base = base_nodes(sys, &grid)?;
    let mut free = vec![None; init.values().len()];
    let mut free_count = 0;
    for node in 0..grid.len() {
        if !init.is_pinned(node) {
            for k in 0..n {
                free[node * n + k] = Some(free_count);
                free_count += 1;
            }
        }
    }

    let mut map = init.clone();
    let mut e = energy_with(sys, &map, &base)?;
    let mut trace = vec![e];
    let mut iterations = 0;
    loop {
        let (grad, pre) = gradient(sys, &map, &base, opts.metric, &free, free_count)?;
        let grad_norm = grad.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let done = |termination, map, trace, iterations| {
            Ok(MinimizeOutcome {
                map,
                trace,
                iterations,
                grad_norm,
                termination,
            })
        };
        if grad_norm <= opts.grad_tol {
            return done(Termination::Converged, map, trace, iterations);
        }
        if iterations >= opts.max_iters {
            return done(Termination::MaxIterations, map, trace, iterations);
        }

        let mut dir = vec![0.0; free_count];
        for (dof, f) in free.iter().enumerate() {
            if let Some(f) = f {
                dir[*f] = grad[dof];
            }
        }
        if let Some(pre) = &pre {
            pre.apply(&mut dir);
        }
        let mut slope = 0.0;
        for (dof, f) in free.iter().enumerate() {
            if let Some(f) = f {
                dir[*f] = -dir[*f];
                slope += grad[dof] * dir[*f];
            }
        }

        let mut step = opts.step0;
        let accepted = loop {
            if step < MIN_STEP {
                break None;
            }
            let mut trial = map.clone();
            {
                let vals = trial.values_mut();
                for (dof, f) in free.iter().enumerate() {
                    if let Some(f) = f {
                        vals[dof] += step * dir[*f];
                    }
                }
            }
            // Evaluation failures (e.g. a step into a metric singularity) count as rejections.
            if let Ok(et) = energy_with(sys, &trial, &base) {
                if et <= e + opts.armijo_c * step * slope && et < e {
                    break Some((trial, et));
                }
            }
            step *= opts.backtrack;
        };
        match accepted {
            Some((trial, et)) => {
                map = trial;
                e = et;
                trace.push(e);
                iterations += 1;
            }
            None => return done(Termination::LineSearchFailure, map, trace, iterations),
        }
    }
}
