//! Small-coupling expansion: reduced energy on the degenerate manifold, the 2^N critical
//! configurations, first-order corrections, closed-form observables, and nucleation.

mod closed_form;
mod correction;
mod nucleation;

pub use closed_form::{amplitude_constants, closed_form_amplitude, vortex_plane_observables};
pub use correction::{first_order_correction, seed_state, CorrectionFields};
pub use nucleation::{
    epsilon, epsilon_and_jumps, magnetization_jump, nucleation_fields, one_sided_magnetization, NucleationDiagram,
    NucleationRow,
};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::Result;
use crate::model::{LdParameters, PhaseConfig};

/// Reduced energy per unit r on the r = 0 manifold: 2NpL − (2 sin(HpL)/H) Σ cos δ_n.
pub fn g0(params: &LdParameters, delta: &PhaseConfig) -> f64 {
    let n = params.num_gaps as f64;
    let s = params.sin_hpl();
    2.0 * n * params.spacing * params.half_width
        - 2.0 * s / params.applied_field * delta.delta.iter().map(|d| d.cos()).sum::<f64>()
}

/// One critical configuration of the reduced energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub delta: Vec<f64>,
    pub g0: f64,
    pub inertia: usize,
}

impl SeedEntry {
    pub fn config(&self) -> PhaseConfig {
        PhaseConfig::new(self.delta.clone())
    }
}

/// All 2^N configurations δ_n ∈ {0, π}, sorted by g0 (ties keep mask order).
pub fn enumerate_seeds(params: &LdParameters) -> Result<Vec<SeedEntry>> {
    params.require_nondegenerate()?;
    let n = params.num_gaps;
    let sign = params.sin_hpl() / params.applied_field;
    let mut out: Vec<SeedEntry> = (0..1usize << n)
        .map(|mask| {
            let cfg = PhaseConfig::from_mask(n, mask);
            let inertia = cfg.delta.iter().filter(|d| sign * d.cos() < 0.0).count();
            SeedEntry {
                g0: g0(params, &cfg),
                delta: cfg.delta,
                inertia,
            }
        })
        .collect();
    out.sort_by(|a, b| a.g0.total_cmp(&b.g0));
    Ok(out)
}

/// Phase offset of the vortex-plane minimizer: 0 when sin(HpL)/(Hp) > 0, otherwise π.
pub fn vortex_plane_delta(params: &LdParameters) -> Result<f64> {
    params.require_nondegenerate()?;
    Ok(if params.sin_hpl() / params.hp() > 0.0 { 0.0 } else { PI })
}

pub fn vortex_plane_config(params: &LdParameters) -> Result<PhaseConfig> {
    Ok(PhaseConfig::uniform(params.num_gaps, vortex_plane_delta(params)?))
}

/// Leading-order minimum energy 2Np(L − |sin(HpL)|/(Hp))·r.
pub fn leading_min_energy(params: &LdParameters) -> f64 {
    let n = params.num_gaps as f64;
    2.0 * n * params.spacing * (params.half_width - params.sin_hpl().abs() / params.hp()) * params.coupling
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slab() -> LdParameters {
        LdParameters::new(1, 2.0, 0.5, 1.0, PI / 2.0, 0.01)
    }

    #[test]
    fn reduced_energy_values() {
        let p = slab();
        assert!((g0(&p, &PhaseConfig::zeros(1)) - (2.0 - 4.0 / PI)).abs() < 1e-12);
        assert!((g0(&p, &PhaseConfig::uniform(1, PI)) - (2.0 + 4.0 / PI)).abs() < 1e-12);
    }

    #[test]
    fn enumeration_inertias() {
        let p = LdParameters::desk();
        let seeds = enumerate_seeds(&p).unwrap();
        let inertias: Vec<usize> = seeds.iter().map(|s| s.inertia).collect();
        assert_eq!(inertias, vec![0, 1, 1, 2]);
        assert_eq!(seeds[0].delta, vec![0.0, 0.0]);
        assert_eq!(enumerate_seeds(&p.with_gaps(3)).unwrap().len(), 8);
    }

    #[test]
    fn selection_rule() {
        let p = LdParameters::desk();
        assert_eq!(vortex_plane_delta(&p).unwrap(), 0.0);
        // HpL = 4
        assert_eq!(vortex_plane_delta(&p.with_field(8.0)).unwrap(), PI);
        assert!(vortex_plane_delta(&LdParameters::new(1, 2.0, 0.5, 1.0, PI, 0.01)).is_err());
    }

    #[test]
    fn leading_energy_on_desk() {
        let e = leading_min_energy(&LdParameters::desk());
        assert!((e - 2.0 * (1.0 - 1.5f64.sin() / 1.5) * 1e-3).abs() < 1e-15);
        assert!((e - 6.700e-4).abs() < 1e-6);
        assert_eq!(leading_min_energy(&LdParameters::desk().with_coupling(0.0)), 0.0);
    }
}
