//! Run configuration as read from JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub dims: Dims,
    /// Optional coordinate names; `t1..tp` and `x1..xn` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Coordinates>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_h: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_phi: Option<Vec<Vec<String>>>,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
    pub domain: Domain,
    /// Box in M used for sampling jet points; `[-1, 1]^n` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_domain: Option<Domain>,
    pub grid: Vec<usize>,
    #[serde(default)]
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub einstein: Option<EinsteinConfig>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    pub p: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coordinates {
    pub t: Vec<String>,
    pub x: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioConfig {
    /// `p = 1`, `h = (1)`, `X = ξ(x)`.
    Orbits { xi: Vec<String> },
    /// `n = 1`, `φ = (1)`, `X = A(t)`.
    Pfaff { a: Vec<String> },
    /// `X^i_α = Σ_a ξ^i_a(x) A^a_α(t)`.
    Group { xi: Vec<Vec<String>>, a: Vec<Vec<String>> },
    /// Matrices are full `q×q` tables; `f` has one entry per pair `α ≤ β`, `field` per `α < β`.
    YangMills {
        q: usize,
        f: Vec<Vec<Vec<String>>>,
        field: Vec<Vec<Vec<String>>>,
    },
    /// Order-`r` system `rhs[i][I][α]` over sorted multi-indices `I` of length `r − 1`.
    HigherOrder {
        r: usize,
        rhs: Vec<Vec<Vec<String>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        extended_phi: Option<Vec<Vec<String>>>,
    },
}

impl ScenarioConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioConfig::Orbits { .. } => "orbits",
            ScenarioConfig::Pfaff { .. } => "pfaff",
            ScenarioConfig::Group { .. } => "group",
            ScenarioConfig::YangMills { .. } => "yang_mills",
            ScenarioConfig::HigherOrder { .. } => "higher_order",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    FixedInitial,
    FixedAll,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    #[serde(rename = "type")]
    pub kind: BoundaryKind,
    /// Pinned values as `n` expressions over `t`; the initial guess is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<String>>,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig {
            kind: BoundaryKind::FixedInitial,
            values: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub step0: f64,
    pub backtrack: f64,
    pub armijo_c: f64,
    /// `"sobolev"` (default) or `"euclidean"`.
    pub metric: String,
    /// Initial guess as `n` expressions over `t`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<Vec<String>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = jetlab_core::lsqsolve::MinimizeOptions::default();
        SolverConfig {
            max_iters: d.max_iters,
            grad_tol: d.grad_tol,
            step0: d.step0,
            backtrack: d.backtrack,
            armijo_c: d.armijo_c,
            metric: "sobolev".into(),
            init: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub samples: usize,
    pub seed: u64,
    /// Tolerance for identities that hold up to round-off.
    pub tol: f64,
    /// Random smooth maps for the Euler-Lagrange comparison.
    pub maps: usize,
    /// Relative tolerance of the Euler-Lagrange comparison.
    pub el_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: 100,
            seed: 7,
            tol: 1e-9,
            maps: 20,
            el_tol: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EinsteinConfig {
    #[serde(rename = "K")]
    pub k: f64,
    /// Nodes per axis of the conservation grids.
    #[serde(default = "default_einstein_nodes")]
    pub nodes: usize,
    #[serde(default = "default_einstein_tol")]
    pub tol: f64,
}

fn default_einstein_nodes() -> usize {
    64
}

fn default_einstein_tol() -> f64 {
    1e-5
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        cfg.check_shape()?;
        Ok(cfg)
    }

    pub fn t_names(&self) -> Vec<String> {
        match &self.coordinates {
            Some(c) => c.t.clone(),
            None => (1..=self.dims.p).map(|a| format!("t{a}")).collect(),
        }
    }

    pub fn x_names(&self) -> Vec<String> {
        match &self.coordinates {
            Some(c) => c.x.clone(),
            None => (1..=self.dims.n).map(|i| format!("x{i}")).collect(),
        }
    }

    /// Structural invariants that do not need expression parsing.
    fn check_shape(&self) -> Result<(), CliError> {
        let Dims { p, n } = self.dims;
        let mut problems = Vec::new();
        if p == 0 || n == 0 {
            problems.push(format!("dims: p and n must be positive, got p={p}, n={n}"));
        }
        match (&self.x, &self.scenario) {
            (Some(_), Some(_)) => problems.push("exactly one of `X` and `scenario` may be given, found both".into()),
            (None, None) => problems.push("one of `X` and `scenario` is required".into()),
            _ => {}
        }
        if let Some(c) = &self.coordinates {
            if c.t.len() != p || c.x.len() != n {
                problems.push(format!("coordinates: expected {p} t names and {n} x names"));
            }
        }
        let check_box = |label: &str, d: &Domain, dim: usize, problems: &mut Vec<String>| {
            if d.min.len() != dim || d.max.len() != dim {
                problems.push(format!("{label}: min and max need {dim} entries"));
                return;
            }
            for (a, (lo, hi)) in d.min.iter().zip(&d.max).enumerate() {
                if !(lo < hi) {
                    problems.push(format!("{label}: axis {} has min {lo} not below max {hi}", a + 1));
                }
            }
        };
        check_box("domain", &self.domain, p, &mut problems);
        if let Some(d) = &self.x_domain {
            // The length is checked against the built system, whose n may be derived.
            check_box("x_domain", d, d.min.len(), &mut problems);
        }
        if self.grid.len() != p {
            problems.push(format!("grid: expected {p} sizes, got {}", self.grid.len()));
        }
        for (a, &k) in self.grid.iter().enumerate() {
            if k < jetlab_core::grid::MIN_NODES {
                problems.push(format!("grid: axis {} has {k} nodes, need at least {}", a + 1, jetlab_core::grid::MIN_NODES));
            }
        }
        let check_table = |label: &str, t: &Option<Vec<Vec<String>>>, rows: usize, cols: usize, problems: &mut Vec<String>| {
            if let Some(t) = t {
                if t.len() != rows || t.iter().any(|r| r.len() != cols) {
                    problems.push(format!("{label}: expected a {rows}x{cols} table"));
                }
            }
        };
        check_table("metric_h", &self.metric_h, p, p, &mut problems);
        check_table("metric_phi", &self.metric_phi, n, n, &mut problems);
        check_table("X", &self.x, n, p, &mut problems);
        let s = &self.solver;
        if !(s.backtrack > 0.0 && s.backtrack < 1.0) {
            problems.push(format!("solver.backtrack must lie in (0, 1), got {}", s.backtrack));
        }
        if !(s.armijo_c > 0.0 && s.armijo_c < 1.0) {
            problems.push(format!("solver.armijo_c must lie in (0, 1), got {}", s.armijo_c));
        }
        if !(s.step0 > 0.0) || !(s.grad_tol >= 0.0) {
            problems.push("solver.step0 must be positive and solver.grad_tol non-negative".into());
        }
        if s.metric != "sobolev" && s.metric != "euclidean" {
            problems.push(format!("solver.metric must be \"sobolev\" or \"euclidean\", got {:?}", s.metric));
        }
        if self.verify.samples == 0 || !(self.verify.tol > 0.0) || !(self.verify.el_tol > 0.0) {
            problems.push("verify: samples must be positive and tolerances positive".into());
        }
        if let Some(e) = &self.einstein {
            if e.k == 0.0 || !e.k.is_finite() {
                problems.push(format!("einstein.K must be finite and nonzero, got {}", e.k));
            }
            if e.nodes < jetlab_core::grid::MIN_NODES {
                problems.push(format!("einstein.nodes must be at least {}", jetlab_core::grid::MIN_NODES));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Input(problems.join("; ")))
        }
    }
}
