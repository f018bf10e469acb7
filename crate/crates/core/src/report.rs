//! Convergence reporting shared by all solvers.

use serde::{Deserialize, Serialize};

/// Non-fatal conditions detected during a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Warning {
    /// Vertex weights were rescaled to restore the normalization sum(mu*gamma) = 1.
    GammaRescaled { vertex: String, factor: f64 },
    /// eta/gamma data supplied for a boundary vertex is ignored.
    BoundaryDataIgnored { vertex: String },
    /// Density undershoot within the clamp band was zeroed and mass renormalized.
    DensityClamped { min: f64 },
    /// The Hamiltonian maximizer is not unique at some sampled point.
    NonUniqueMaximizer { edge: usize, x: f64, p: f64 },
    /// Post-burn-in horizon is short relative to burn-in; estimates may be noisy.
    ShortHorizon { effective: f64, burn_in: f64 },
    /// Free-form note.
    Note(String),
}

/// Iteration counts, residual history and achieved tolerances for a solve.
///
/// Wall time is tracked for interactive diagnostics but never serialized:
/// emitted artifacts must be byte-identical across reruns.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub achieved_tol: f64,
    pub converged: bool,
    pub warnings: Vec<Warning>,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl SolveReport {
    pub fn record(&mut self, residual: f64) {
        self.residual_history.push(residual);
        self.iterations = self.residual_history.len();
    }

    pub fn warn(&mut self, w: Warning) {
        self.warnings.push(w);
    }

    pub fn merge_warnings(&mut self, other: &SolveReport) {
        self.warnings.extend(other.warnings.iter().cloned());
    }
}
