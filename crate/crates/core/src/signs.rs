//! Sign probes: which sign of a printed formula agrees with an independent computation.

use crate::error::Result;
use crate::jetgeom::{connections_from, JetPoint, SystemSpec};
use crate::lsqsolve::{smooth_coherence, SmoothMap};
use crate::scenarios::{closed_forms, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignResolution {
    /// Only the printed sign agrees.
    Printed,
    /// Only the opposite sign agrees.
    Flipped,
    /// Both agree, so the data cannot tell them apart (e.g. the term vanishes).
    Both,
    Neither,
}

impl SignResolution {
    pub fn as_str(self) -> &'static str {
        match self {
            SignResolution::Printed => "printed",
            SignResolution::Flipped => "flipped",
            SignResolution::Both => "indistinguishable",
            SignResolution::Neither => "neither",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignFinding {
    pub name: &'static str,
    /// Residual with the sign as printed.
    pub printed_residual: f64,
    /// Residual with the opposite sign.
    pub flipped_residual: f64,
    pub tolerance: f64,
    pub resolution: SignResolution,
}

impl SignFinding {
    fn new(name: &'static str, printed_residual: f64, flipped_residual: f64, tolerance: f64) -> Self {
        let resolution = match (printed_residual <= tolerance, flipped_residual <= tolerance) {
            (true, true) => SignResolution::Both,
            (true, false) => SignResolution::Printed,
            (false, true) => SignResolution::Flipped,
            (false, false) => SignResolution::Neither,
        };
        SignFinding {
            name,
            printed_residual,
            flipped_residual,
            tolerance,
            resolution,
        }
    }

    pub fn passes(&self) -> bool {
        self.resolution != SignResolution::Neither
    }
}

/// Drift sign in the spatial spray, pinned by the Euler-Lagrange oracle on analytic maps.
///
/// Returns findings for the bracket form (built from `U`, `Φ`) and for the closed form
/// written with covariant derivatives of `X`. Residuals are relative max-norms.
pub fn drift_findings(
    sys: &SystemSpec,
    maps: &[SmoothMap],
    points: &[Vec<f64>],
    tolerance: f64,
) -> Result<[SignFinding; 2]> {
    let (mut bp, mut bf, mut cp, mut cf) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for m in maps {
        let (b, c) = smooth_coherence(sys, m, points, 1.0)?;
        let (b2, c2) = smooth_coherence(sys, m, points, -1.0)?;
        bp = bp.max(b.relative);
        cp = cp.max(c.relative);
        bf = bf.max(b2.relative);
        cf = cf.max(c2.relative);
    }
    Ok([
        SignFinding::new("spray_drift_bracket_form", bp, bf, tolerance),
        SignFinding::new("spray_drift_closed_form", cp, cf, tolerance),
    ])
}

/// `N = N⁰ − F^i_{jα}` as printed, against the connection induced by the oracle-checked spray.
pub fn connection_finding(sys: &SystemSpec, points: &[JetPoint], tolerance: f64) -> Result<SignFinding> {
    let (mut printed, mut flipped) = (0.0f64, 0.0f64);
    for pt in points {
        let g = sys.geometry(&pt.t, &pt.x)?;
        let c = connections_from(&g, &pt.xdot);
        printed = printed.max(c.consistency.minus);
        flipped = flipped.max(c.consistency.plus);
    }
    Ok(SignFinding::new("nonlinear_connection_general", printed, flipped, tolerance))
}

/// The scenario's printed connection `n_base + n_term` against the induced connection.
pub fn scenario_connection_finding(sc: &Scenario, points: &[JetPoint], tolerance: f64) -> Result<Option<SignFinding>> {
    let (mut printed, mut flipped) = (0.0f64, 0.0f64);
    for pt in points {
        let Some(cf) = closed_forms(sc, pt)? else {
            return Ok(None);
        };
        let g = sc.system.geometry(&pt.t, &pt.x)?;
        let n = connections_from(&g, &pt.xdot).induced.n;
        for ((v, b), t) in n.iter().zip(cf.n_base.iter()).zip(cf.n_term.iter()) {
            printed = printed.max((v - (b + t)).abs());
            flipped = flipped.max((v - (b - t)).abs());
        }
    }
    Ok(Some(SignFinding::new("nonlinear_connection_scenario", printed, flipped, tolerance)))
}
