use serde::{Deserialize, Serialize};

use crate::error::{LdError, Result};

/// Threshold on `|sin(HpL)|` below which the applied field is treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Model constants of the layered stack.
///
/// | field | symbol | meaning |
/// |---|---|---|
/// | `num_gaps` | N | number of insulating gaps (N+1 planes) |
/// | `half_width` | L | sample occupies x in [-L, L] |
/// | `spacing` | p | interlayer spacing |
/// | `kappa` | κ | Ginzburg–Landau parameter |
/// | `applied_field` | H | external field |
/// | `coupling` | r | Josephson coupling |
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdParameters {
    #[serde(rename = "N")]
    pub num_gaps: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "p")]
    pub spacing: f64,
    pub kappa: f64,
    #[serde(rename = "H")]
    pub applied_field: f64,
    #[serde(rename = "r")]
    pub coupling: f64,
}

/// Outcome of [`validate`]: hard errors and soft warnings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
    pub degenerate: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

impl LdParameters {
    pub fn new(n: usize, l: f64, p: f64, kappa: f64, h: f64, r: f64) -> Self {
        Self {
            num_gaps: n,
            half_width: l,
            spacing: p,
            kappa,
            applied_field: h,
            coupling: r,
        }
    }

    /// The bench-top configuration used throughout the acceptance suite.
    pub fn desk() -> Self {
        Self::new(2, 1.0, 0.5, 1.0, 3.0, 1e-3)
    }

    pub fn with_coupling(mut self, r: f64) -> Self {
        self.coupling = r;
        self
    }

    pub fn with_field(mut self, h: f64) -> Self {
        self.applied_field = h;
        self
    }

    pub fn with_gaps(mut self, n: usize) -> Self {
        self.num_gaps = n;
        self
    }

    /// Number of superconducting planes, N + 1.
    pub fn planes(&self) -> usize {
        self.num_gaps + 1
    }

    /// H p, the winding rate of the interlayer phase.
    pub fn hp(&self) -> f64 {
        self.applied_field * self.spacing
    }

    /// sin(HpL).
    pub fn sin_hpl(&self) -> f64 {
        (self.hp() * self.half_width).sin()
    }

    pub fn is_degenerate(&self) -> bool {
        self.sin_hpl().abs() < DEGENERACY_TOL
    }

    pub fn require_nondegenerate(&self) -> Result<()> {
        let s = self.sin_hpl();
        if s.abs() < DEGENERACY_TOL {
            Err(LdError::DegenerateField(s.abs()))
        } else {
            Ok(())
        }
    }

    /// Josephson penetration depth λ_J with r = 2/(λ_J² κ² p²); infinite at r = 0.
    pub fn josephson_length(&self) -> f64 {
        if self.coupling == 0.0 {
            f64::INFINITY
        } else {
            (2.0 / (self.coupling * self.kappa * self.kappa * self.spacing * self.spacing)).sqrt()
        }
    }

    /// Coupling that corresponds to a given Josephson length.
    pub fn coupling_from_josephson_length(lambda_j: f64, kappa: f64, p: f64) -> f64 {
        2.0 / (lambda_j * lambda_j * kappa * kappa * p * p)
    }

    /// Upper bound coefficient on the minimum energy: Ω_min ≤ 2Np(L + 1/(pH)) r.
    pub fn energy_bound_coefficient(&self) -> f64 {
        2.0 * self.num_gaps as f64 * self.spacing * (self.half_width + 1.0 / self.hp())
    }

    pub fn energy_bound(&self) -> f64 {
        self.energy_bound_coefficient() * self.coupling
    }

    /// Returns `Err` with all hard violations joined.
    pub fn check(&self) -> Result<()> {
        let rep = validate(self);
        if rep.is_valid() {
            Ok(())
        } else {
            Err(LdError::InvalidParameters(rep.errors.join("; ")))
        }
    }
}

/// Lists violated invariants of the parameter set.
pub fn validate(params: &LdParameters) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let p = params;
    let reals = [
        ("L", p.half_width),
        ("p", p.spacing),
        ("kappa", p.kappa),
        ("H", p.applied_field),
        ("r", p.coupling),
    ];
    for (name, v) in reals {
        if !v.is_finite() {
            rep.errors.push(format!("{name} must be finite"));
        }
    }
    if p.num_gaps < 1 {
        rep.errors.push("N must be >= 1: at least one gap required".into());
    }
    if !(p.half_width > 0.0) {
        rep.errors.push("L must be positive".into());
    }
    if !(p.spacing > 0.0) {
        rep.errors.push("p must be positive".into());
    } else if p.spacing > 1.0 {
        rep.warnings.push("p > 1 lies outside the analysed range (0, 1]".into());
    }
    if !(p.kappa > 0.0) {
        rep.errors.push("kappa must be positive".into());
    } else if p.kappa < 1.0 {
        rep.warnings.push("kappa < 1 lies outside the analysed range".into());
    }
    if !(p.applied_field > 0.0) {
        rep.errors.push("H must be positive".into());
    }
    if !(p.coupling >= 0.0) {
        rep.errors.push("r must be nonnegative".into());
    }
    if p.half_width > 0.0 && p.half_width < 1.0 {
        rep.warnings.push("L < 1: validity bounds assume L >= 1".into());
    }
    if rep.errors.is_empty() && p.is_degenerate() {
        rep.degenerate = true;
        rep.warnings.push(format!(
            "degenerate field: sin(HpL) = {:e}; the critical-point census is undefined",
            p.sin_hpl()
        ));
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn desk_is_valid_and_nondegenerate() {
        let rep = validate(&LdParameters::desk());
        assert!(rep.is_valid());
        assert!(!rep.degenerate);
        assert!((LdParameters::desk().sin_hpl() - 1.5f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_field_is_a_warning() {
        let rep = validate(&LdParameters::new(1, 2.0, 0.5, 1.0, PI, 0.01));
        assert!(rep.is_valid());
        assert!(rep.degenerate);
        assert_eq!(rep.warnings.len(), 1);
    }

    #[test]
    fn zero_gaps_is_an_error() {
        let rep = validate(&LdParameters::new(0, 1.0, 0.5, 1.0, 3.0, 0.01));
        assert!(!rep.is_valid());
        assert!(rep.errors[0].contains("gap"));
    }

    #[test]
    fn josephson_length_roundtrip() {
        let p = LdParameters::new(2, 1.0, 0.5, 2.0, 3.0, 1e-3);
        let lj = p.josephson_length();
        let r = LdParameters::coupling_from_josephson_length(lj, p.kappa, p.spacing);
        assert!((r - p.coupling).abs() <= 1e-15 * p.coupling);
    }
}
