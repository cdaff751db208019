//! Verification experiments: convergence in r, the critical-point census, field sweeps,
//! flux quantization, and the acceptance suite.

mod acceptance;
mod census;
mod convergence;
mod flux;
mod sweep;

pub use acceptance::{
    acceptance, acceptance_with, preset, presets, run_criterion, AcceptanceReport, BoundsTracker, Context, CriterionResult,
    Preset,
};
pub use census::{census, CensusData, CensusPoint, RandomDescent};
pub use convergence::{convergence_study, ConvergenceData, ConvergenceRow};
pub use flux::{flux_check, CycleFlux};
pub use sweep::{field_sweep, interior_maxima, SweepData, SweepRow, Transition};

use serde::{Deserialize, Serialize};

use crate::error::{LdError, Result};
use crate::minimize::{minimize, newton_critical, CriticalPoint};
use crate::model::{Grid1D, LayeredState, LdParameters};

/// Gradient tolerance of the descent stage.
pub const DESCENT_TOL: f64 = 1e-8;
/// Residual tolerance of the Newton polish.
pub const POLISH_TOL: f64 = 1e-10;
const DESCENT_MAX_ITER: usize = 20_000;

/// Least-squares line through (ln x, ln y).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub name: String,
    pub slope: f64,
    pub intercept: f64,
    pub samples: usize,
}

pub fn fit_loglog(name: &str, x: &[f64], y: &[f64]) -> Fit {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if pts.len() >= 2 { sxy / sxx } else { f64::NAN };
    Fit {
        name: name.to_string(),
        slope,
        intercept: my - slope * mx,
        samples: pts.len(),
    }
}

/// Named pass/fail outcome inside an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Result of one experiment: its inputs, measurements, fits and checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord<T> {
    pub name: String,
    pub params: LdParameters,
    pub intervals: usize,
    pub data: T,
    pub fits: Vec<Fit>,
    pub checks: Vec<Check>,
    pub wall_time_s: f64,
}

impl<T> ExperimentRecord<T> {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn fit(&self, name: &str) -> Option<&Fit> {
        self.fits.iter().find(|f| f.name == name)
    }
}

/// Serializes rows as CSV with a header from the field names.
pub fn write_rows_csv<W: std::io::Write, R: Serialize>(rows: &[R], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| LdError::Parse(e.to_string()))?;
    }
    w.flush().map_err(|e| LdError::Parse(e.to_string()))
}

/// Descent to a local minimizer followed by a Newton polish.
pub fn relax(state: &LayeredState, params: &LdParameters, grid: &Grid1D) -> Result<CriticalPoint> {
    let rep = minimize(state, params, grid, DESCENT_TOL, DESCENT_MAX_ITER)?;
    newton_critical(&rep.state, params, grid, POLISH_TOL)
}

/// Grid with at least `min_intervals` intervals that also satisfies the default spacing rule.
pub fn experiment_grid(params: &LdParameters, min_intervals: usize) -> Result<Grid1D> {
    let g = Grid1D::for_params(params, None)?;
    if g.intervals >= min_intervals {
        Ok(g)
    } else {
        Grid1D::new(params.half_width, min_intervals)
    }
}

pub(crate) fn sup_diff(a: &ndarray::Array2<f64>, b: &ndarray::Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
