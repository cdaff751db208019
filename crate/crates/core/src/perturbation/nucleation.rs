use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{LdError, Result};
use crate::model::params::DEGENERACY_TOL;
use crate::model::LdParameters;

/// Nucleation fields kπ/(pL) up to `h_max`.
pub fn nucleation_fields(params: &LdParameters, h_max: f64) -> Vec<f64> {
    let step = PI / (params.spacing * params.half_width);
    (1..).map(|k| k as f64 * step).take_while(|&h| h <= h_max).collect()
}

/// Leading-order minimum energy Npr(2L − |2 sin(HpL)/(Hp)|) at field `h`.
pub fn epsilon(params: &LdParameters, h: f64) -> f64 {
    let n = params.num_gaps as f64;
    let p = params.spacing;
    n * p * params.coupling * (2.0 * params.half_width - (2.0 * (h * p * params.half_width).sin() / (h * p)).abs())
}

/// Left and right derivatives of ε at `h`.
pub fn one_sided_magnetization(params: &LdParameters, h: f64) -> (f64, f64) {
    let n = params.num_gaps as f64;
    let p = params.spacing;
    let l = params.half_width;
    let theta = h * p * l;
    let s = theta.sin();
    // d/dH of sin(HpL)/(Hp)
    let ds = l * theta.cos() / h - s / (h * h * p);
    let slope = |sign: f64| -2.0 * n * p * params.coupling * sign * ds;
    if s.abs() < DEGENERACY_TOL {
        // sin changes sign at θ = kπ: just above it has the sign of cos θ
        let right = theta.cos().signum();
        (slope(-right), slope(right))
    } else {
        let m = slope(s.signum());
        (m, m)
    }
}

/// Magnitude of the magnetization jump at the k-th nucleation field: 4Np²L²r/(kπ).
pub fn magnetization_jump(params: &LdParameters, k: usize) -> f64 {
    let p = params.spacing;
    let l = params.half_width;
    4.0 * params.num_gaps as f64 * p * p * l * l * params.coupling / (k as f64 * PI)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct NucleationRow {
    pub H: f64,
    pub epsilon: f64,
    pub M_minus: f64,
    pub M_plus: f64,
    pub is_transition: bool,
}

/// ε(H) on a field grid, together with the nucleation fields and their jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NucleationDiagram {
    pub fields: Vec<f64>,
    pub jumps: Vec<f64>,
    pub rows: Vec<NucleationRow>,
}

impl NucleationDiagram {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row).map_err(|e| LdError::Parse(e.to_string()))?;
        }
        w.flush().map_err(|e| LdError::Parse(e.to_string()))
    }
}

/// Samples ε and the one-sided magnetization on `h_grid` (positive, sorted).
pub fn epsilon_and_jumps(params: &LdParameters, h_grid: &[f64]) -> Result<NucleationDiagram> {
    if h_grid.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
        return Err(LdError::InvalidParameters("field samples must be positive".into()));
    }
    if h_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(LdError::InvalidParameters("field samples must be sorted".into()));
    }
    let h_max = h_grid.last().copied().unwrap_or(0.0);
    let fields = nucleation_fields(params, h_max);
    let jumps = (1..=fields.len()).map(|k| magnetization_jump(params, k)).collect();
    let rows = h_grid
        .iter()
        .map(|&h| {
            let (m_minus, m_plus) = one_sided_magnetization(params, h);
            NucleationRow {
                H: h,
                epsilon: epsilon(params, h),
                M_minus: m_minus,
                M_plus: m_plus,
                is_transition: (h * params.spacing * params.half_width).sin().abs() < DEGENERACY_TOL,
            }
        })
        .collect();
    Ok(NucleationDiagram { fields, jumps, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_list() {
        let p = LdParameters::new(1, 2.0, 0.5, 1.0, 1.0, 1e-3);
        let f = nucleation_fields(&p, 10.0);
        assert_eq!(f.len(), 3);
        assert!((f[2] - 3.0 * PI).abs() < 1e-12);
        assert!(nucleation_fields(&p, 3.0).is_empty());
        let unit = LdParameters::new(1, PI, 1.0, 1.0, 1.0, 1e-3);
        assert!((nucleation_fields(&unit, 2.5)[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn jump_matches_one_sided_derivatives() {
        let p = LdParameters::new(1, 2.0, 0.5, 1.0, 1.0, 1e-3);
        assert!((magnetization_jump(&p, 1) - 1.2732e-3).abs() < 1e-7);
        let d = epsilon_and_jumps(&p, &[1.0, PI, 5.0]).unwrap();
        let row = &d.rows[1];
        assert!(row.is_transition);
        assert!(((row.M_minus - row.M_plus).abs() - d.jumps[0]).abs() < 1e-12);
        // finite differences of ε on each side
        let e = 1e-6;
        let left = (epsilon(&p, PI) - epsilon(&p, PI - e)) / e;
        let right = (epsilon(&p, PI + e) - epsilon(&p, PI)) / e;
        assert!((left - row.M_minus).abs() < 1e-8 && (right - row.M_plus).abs() < 1e-8);
    }

    #[test]
    fn epsilon_range() {
        let p = LdParameters::desk();
        for k in 1..200 {
            let h = 0.05 * k as f64;
            let e = epsilon(&p, h);
            assert!(e >= 0.0 && e <= 2.0 * 2.0 * 0.5 * 1.0 * 1e-3 + 2.0 * 2.0 * 1e-3 / h);
        }
    }
}
