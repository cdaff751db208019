use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::time::Instant;

use super::{census, convergence_study, experiment_grid, field_sweep, flux_check, relax, ConvergenceData, ExperimentRecord};
use crate::energy::{fd_gradient_check, hessian_symmetry, total_energy};
use crate::error::{LdError, Result};
use crate::minimize::minimize;
use crate::model::{
    gauge_transform, observables, random_rough_state, random_start, uniform_field_state, Grid1D, LdParameters,
};
use crate::perturbation::{seed_state, vortex_plane_config};
use crate::validity::{c0, lambda_lower, lambda_upper, rstar_lower};

/// Sizes and parameters of one acceptance run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub params: LdParameters,
    /// Intervals on the half-width used by the routine checks (dx = 2L/M).
    pub check_intervals: usize,
    /// Intervals for the convergence study in r, fine enough that dx² is far below r².
    pub study_intervals: usize,
    pub r_list: Vec<f64>,
    pub census_gaps: Vec<usize>,
    pub census_coupling: f64,
    pub random_starts: usize,
    pub sweep_min: f64,
    pub sweep_max: f64,
    pub sweep_points: usize,
    pub flux_field: f64,
    pub seed: u64,
}

/// Published presets.
pub fn presets() -> Vec<Preset> {
    let desk = Preset {
        name: "desk-N2".into(),
        params: LdParameters::desk(),
        check_intervals: 60,
        study_intervals: 400,
        r_list: vec![4e-3, 2e-3, 1e-3],
        census_gaps: vec![1, 2, 3],
        census_coupling: 1e-3,
        random_starts: 50,
        sweep_min: 2.0,
        sweep_max: 8.0,
        sweep_points: 61,
        flux_field: 8.0,
        seed: 20_240_601,
    };
    let quick = Preset {
        name: "quick".into(),
        study_intervals: 200,
        census_gaps: vec![1, 2],
        random_starts: 8,
        ..desk.clone()
    };
    vec![desk, quick]
}

pub fn preset(name: &str) -> Result<Preset> {
    let all = presets();
    let names: Vec<String> = all.iter().map(|p| p.name.clone()).collect();
    all.into_iter().find(|p| p.name == name).ok_or(LdError::UnknownPreset {
        name: name.to_string(),
        available: names.join(", "),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub measured: String,
    pub tolerance: String,
    pub elapsed_s: f64,
    pub time_limit_s: Option<f64>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let time = match self.time_limit_s {
            Some(l) => format!("{:.2} s < {l} s", self.elapsed_s),
            None => format!("{:.2} s", self.elapsed_s),
        };
        format!(
            "[{}] {:>2} {}: {} | required: {} | {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.tolerance,
            time
        )
    }
}

/// Amplitude extremes over every converged solution seen during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsTracker {
    pub solutions: usize,
    pub min_f: f64,
    pub max_f: f64,
    /// max over solutions of (1 − min f)/√r
    pub c_sqrt: f64,
}

impl Default for BoundsTracker {
    fn default() -> Self {
        Self {
            solutions: 0,
            min_f: f64::INFINITY,
            max_f: f64::NEG_INFINITY,
            c_sqrt: 0.0,
        }
    }
}

impl BoundsTracker {
    pub fn record(&mut self, min_f: f64, max_f: f64, r: f64) {
        if !(min_f.is_finite() && max_f.is_finite()) {
            return;
        }
        self.solutions += 1;
        self.min_f = self.min_f.min(min_f);
        self.max_f = self.max_f.max(max_f);
        if r > 0.0 {
            self.c_sqrt = self.c_sqrt.max((1.0 - min_f) / r.sqrt());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub preset: String,
    pub criteria: Vec<CriterionResult>,
    pub bounds: BoundsTracker,
    pub passed: bool,
}

/// State shared between criteria of one run.
#[derive(Default)]
pub struct Context {
    study: Option<(std::result::Result<ExperimentRecord<ConvergenceData>, LdError>, f64)>,
    pub bounds: BoundsTracker,
}

struct Outcome {
    passed: bool,
    measured: String,
}

fn outcome(passed: bool, measured: String) -> Outcome {
    Outcome { passed, measured }
}

fn sup_dev(v: impl Iterator<Item = f64>, target: f64) -> f64 {
    v.map(|x| (x - target).abs()).fold(0.0, f64::max)
}

fn gradient_correctness(pr: &Preset) -> Result<Outcome> {
    let p = &pr.params;
    let g = Grid1D::new(p.half_width, pr.check_intervals)?;
    let mut rng = ChaCha8Rng::seed_from_u64(pr.seed);
    let mut states: Vec<_> = (0..5).map(|_| random_rough_state(p, &g, &mut rng)).collect();
    states.push(uniform_field_state(p, &g));
    let mut fd = 0.0f64;
    let mut sym = 0.0f64;
    for (k, st) in states.iter().enumerate() {
        fd = fd.max(fd_gradient_check(st, p, &g, 1e-6)?);
        sym = sym.max(hessian_symmetry(st, p, &g, 20, pr.seed + k as u64));
    }
    Ok(outcome(
        fd <= 1e-6 && sym <= 1e-10,
        format!("fd rel err {fd:.2e}, Hessian asymmetry {sym:.2e}"),
    ))
}

fn zero_coupling_ground_state(pr: &Preset) -> Result<Outcome> {
    let p = pr.params.with_coupling(0.0);
    let g = Grid1D::new(p.half_width, pr.check_intervals)?;
    let mut rng = ChaCha8Rng::seed_from_u64(pr.seed ^ 0x2);
    let rep = minimize(&random_start(&p, &g, &mut rng), &p, &g, 1e-9, 20_000)?;
    let obs = observables(&rep.state, &p, &g)?;
    let fdev = sup_dev(obs.f.iter().copied(), 1.0);
    let hdev = sup_dev(obs.h.iter().copied(), p.applied_field);
    Ok(outcome(
        rep.energy <= 1e-8 && fdev <= 1e-4 && hdev <= 1e-4,
        format!("energy {:.2e}, |f-1| {fdev:.2e}, |h-H| {hdev:.2e} after {} iterations", rep.energy, rep.iterations),
    ))
}

fn study<'a>(pr: &Preset, ctx: &'a mut Context) -> (&'a std::result::Result<ExperimentRecord<ConvergenceData>, LdError>, f64) {
    if ctx.study.is_none() {
        let t = Instant::now();
        let res = Grid1D::new(pr.params.half_width, pr.study_intervals)
            .and_then(|g| convergence_study(&pr.params, &g, &pr.r_list));
        if let Ok(rec) = &res {
            for row in &rec.data.rows {
                ctx.bounds.record(row.min_f, row.max_f, row.r);
            }
        }
        ctx.study = Some((res, t.elapsed().as_secs_f64()));
    }
    let (res, t) = ctx.study.as_ref().unwrap();
    (res, *t)
}

fn energy_law(rec: &ExperimentRecord<ConvergenceData>) -> Outcome {
    let slope = rec.fit("energy").map_or(f64::NAN, |f| f.slope);
    let bound_ok = rec.data.rows.iter().all(|r| r.energy <= r.energy_bound);
    let gaps: Vec<String> = rec.data.rows.iter().map(|r| format!("{:.3e}", r.energy_gap)).collect();
    outcome(
        (slope - 1.0).abs() <= 0.3 && bound_ok,
        format!("slope {slope:.3} (|Ω/r-g0| = {}), energy bound {}", gaps.join(", "), if bound_ok { "holds" } else { "violated" }),
    )
}

fn observable_convergence(rec: &ExperimentRecord<ConvergenceData>) -> Outcome {
    let s = |n: &str| rec.fit(n).map_or(f64::NAN, |f| f.slope);
    let (h, jz, f, phi) = (s("h"), s("jz"), s("f"), s("Phi"));
    let ok = [h, jz, f].iter().all(|v| (v - 2.0).abs() <= 0.4) && phi >= 1.5;
    outcome(ok, format!("slopes h {h:.3}, jz {jz:.3}, f {f:.3}, Phi {phi:.3}"))
}

fn census_criterion(pr: &Preset, ctx: &mut Context) -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for &n in &pr.census_gaps {
        let p = pr.params.with_gaps(n).with_coupling(pr.census_coupling);
        let g = Grid1D::new(p.half_width, pr.check_intervals)?;
        let rec = census(&p, &g, pr.random_starts, pr.seed + n as u64)?;
        for pt in &rec.data.points {
            ctx.bounds.record(pt.min_f, pt.max_f, p.coupling);
        }
        for d in &rec.data.random {
            ctx.bounds.record(d.min_f, d.max_f, p.coupling);
        }
        let matched = rec.data.random.iter().filter(|d| d.matched.is_some()).count();
        parts.push(format!(
            "N={n}: {} points, inertia {:?}, max res {:.1e}, {matched}/{} random matched, {:.1} s{}",
            rec.data.distinct,
            rec.data.histogram,
            rec.data.max_residual,
            rec.data.random.len(),
            rec.wall_time_s,
            if rec.passed() {
                String::new()
            } else {
                format!(
                    " [failed: {}]",
                    rec.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect::<Vec<_>>().join(",")
                )
            }
        ));
        ok &= rec.passed() && (n != 3 || rec.wall_time_s < 300.0);
    }
    Ok(outcome(ok, parts.join("; ")))
}

fn sweep_criterion(pr: &Preset, ctx: &mut Context) -> Result<Outcome> {
    let p = pr.params.with_coupling(pr.census_coupling);
    let g = experiment_grid(&p.with_field(pr.sweep_max), pr.check_intervals)?;
    let n = pr.sweep_points;
    let hs: Vec<f64> = (0..n)
        .map(|k| pr.sweep_min + (pr.sweep_max - pr.sweep_min) * k as f64 / (n - 1) as f64)
        .collect();
    let rec = field_sweep(&p, &g, &hs)?;
    for row in &rec.data.rows {
        ctx.bounds.record(row.min_f, row.max_f, p.coupling);
    }
    let t: Vec<String> = rec
        .data
        .transitions
        .iter()
        .map(|t| {
            format!(
                "flip at H={:.4} (expected {:.4}), collective {}, maxima {}->{}, jump {:.4e} (expected {:.4e}, {:+.1}%)",
                t.h_detected,
                t.h_expected,
                t.collective,
                t.maxima_before,
                t.maxima_after,
                t.jump_measured,
                t.jump_expected,
                100.0 * (t.jump_measured / t.jump_expected - 1.0)
            )
        })
        .collect();
    let failed: Vec<&str> = rec.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    Ok(outcome(
        rec.passed(),
        format!(
            "{}{}",
            if t.is_empty() { "no flip detected".into() } else { t.join("; ") },
            if failed.is_empty() { String::new() } else { format!(" [failed: {}]", failed.join(",")) }
        ),
    ))
}

fn flux_criterion(pr: &Preset, ctx: &mut Context) -> Result<Outcome> {
    let p = pr.params.with_field(pr.flux_field).with_coupling(pr.census_coupling);
    let g = experiment_grid(&p, pr.check_intervals)?;
    let cp = relax(&seed_state(&p, &g, &vortex_plane_config(&p)?), &p, &g)?;
    ctx.bounds.record(cp.state.min_amplitude(), cp.state.max_amplitude(), p.coupling);
    let cycles = flux_check(&cp.state, &p, &g)?;
    let worst = cycles.iter().map(|c| (c.flux - TAU).abs() / TAU).fold(0.0, f64::max);
    Ok(outcome(
        worst <= 0.02,
        format!(
            "{} cycles, fluxes {:?}, worst rel dev {worst:.2e}",
            cycles.len(),
            cycles.iter().map(|c| format!("{:.5}", c.flux)).collect::<Vec<_>>()
        ),
    ))
}

fn bounds_criterion(ctx: &Context) -> Outcome {
    let b = &ctx.bounds;
    outcome(
        b.solutions > 0 && b.min_f > 0.0 && b.max_f <= 1.0 + 1e-8 && b.c_sqrt <= 10.0,
        format!(
            "{} solutions: min f {:.6}, max f {:.12}, C = {:.3}",
            b.solutions, b.min_f, b.max_f, b.c_sqrt
        ),
    )
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64)).collect()
}

fn validity_formulas() -> Result<Outcome> {
    let base = LdParameters::desk();
    let c = c0(&base);
    let lb = lambda_lower(&LdParameters::new(2, 1.0, 0.5, 1.0, 3.0, 0.0))?;
    let ub = lambda_upper(&LdParameters::new(2, 3.0, 0.5, 2.0, 3.0, 0.0));
    let mut sandwich = true;
    for &l in &logspace(1.0, 100.0, 10) {
        for &k in &logspace(1.0, 100.0, 10) {
            for p in [0.2, 0.4, 0.6, 0.8, 1.0] {
                let q = LdParameters::new(2, l, p, k, 3.0, 0.0);
                sandwich &= lambda_lower(&q)? <= lambda_upper(&q);
            }
        }
    }
    let rs = |f: &dyn Fn(f64) -> LdParameters, xs: &[f64]| -> Result<Vec<f64>> {
        xs.iter().map(|&x| rstar_lower(&f(x))).collect()
    };
    let dec = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let by_l = rs(&|l| LdParameters::new(2, l, 0.5, 1.0, 3.0, 0.0), &logspace(1.0, 20.0, 8))?;
    let by_k = rs(&|k| LdParameters::new(2, 1.0, 0.5, k, 3.0, 0.0), &logspace(1.0, 20.0, 8))?;
    let by_h = rs(&|h| LdParameters::new(2, 1.0, 0.5, 1.0, h, 0.0), &logspace(0.5, 20.0, 8))?;
    let by_n = rs(&|n| LdParameters::new(n as usize, 1.0, 0.5, 1.0, 3.0, 0.0), &[1.0, 2.0, 3.0, 5.0, 8.0])?;
    let trends = dec(&by_l) && dec(&by_k) && by_h.windows(2).all(|w| w[1] > w[0]) && by_n.iter().all(|&v| v == by_n[0]);
    Ok(outcome(
        (c - 2.3374).abs() <= 1e-3 && (lb - 0.0901).abs() <= 1e-3 && ub == 0.5 && sandwich && trends,
        format!(
            "C0 {c:.5}, lambda_lower {lb:.5}, lambda_upper {ub}, sandwich {}, r* trends {}",
            if sandwich { "holds" } else { "violated" },
            if trends { "hold" } else { "violated" }
        ),
    ))
}

fn gauge_invariance(pr: &Preset) -> Result<Outcome> {
    let p = &pr.params;
    let g = Grid1D::new(p.half_width, pr.check_intervals)?;
    let mut rng = ChaCha8Rng::seed_from_u64(pr.seed ^ 0x10);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let st = random_start(p, &g, &mut rng);
        let chi: Vec<f64> = (0..=g.intervals).map(|_| rng.gen_range(-PI..PI)).collect();
        let e0 = total_energy(&st, p, &g)?.total;
        let e1 = total_energy(&gauge_transform(&st, &chi, &g), p, &g)?.total;
        worst = worst.max((e0 - e1).abs() / e0.abs());
    }
    Ok(outcome(worst <= 1e-13, format!("max relative energy change {worst:.2e}")))
}

const NAMES: [&str; 10] = [
    "gradient correctness",
    "exact r=0 ground state",
    "order-r energy law",
    "observable convergence",
    "critical-point census",
    "nucleation sweep",
    "flux quantization",
    "solution bounds",
    "validity formulas",
    "gauge invariance",
];

const TOLERANCES: [&str; 10] = [
    "fd <= 1e-6 on 5 random + uniform states, symmetry <= 1e-10",
    "energy <= 1e-8, |f-1| <= 1e-4, |h-H| <= 1e-4",
    "slope 1.0 ± 0.3, energy <= 2Np(L+1/(pH))r at every r",
    "h, jz, f slopes 2.0 ± 0.4, Phi slope >= 1.5",
    "2^N distinct points, residual <= 1e-8, binomial inertia, minimizer at δ*, all random descents matched",
    "collective flip within one step of 2π, maxima +1, jump within 10% of 4Np²L²r/π",
    "every cycle flux = 2π within 2%",
    "0 < f <= 1 + 1e-8, C <= 10",
    "C0 2.3374 ± 1e-3, λ_lb 0.0901 ± 1e-3, λ_ub = 0.5, sandwich, r* trends",
    "relative change <= 1e-13",
];

const LIMITS: [Option<f64>; 10] = [
    Some(10.0),
    Some(30.0),
    Some(60.0),
    Some(60.0),
    Some(300.0),
    Some(300.0),
    Some(60.0),
    None,
    Some(10.0),
    Some(5.0),
];

/// Runs one acceptance criterion (1-based id).
pub fn run_criterion(pr: &Preset, id: u8, ctx: &mut Context) -> CriterionResult {
    let t = Instant::now();
    let mut shared_time = None;
    let res: Result<Outcome> = match id {
        1 => gradient_correctness(pr),
        2 => zero_coupling_ground_state(pr),
        3 | 4 => {
            let (rec, secs) = study(pr, ctx);
            shared_time = Some(secs);
            match rec {
                Ok(rec) if id == 3 => Ok(energy_law(rec)),
                Ok(rec) => Ok(observable_convergence(rec)),
                Err(e) => Err(e.clone()),
            }
        }
        5 => census_criterion(pr, ctx),
        6 => sweep_criterion(pr, ctx),
        7 => flux_criterion(pr, ctx),
        8 => Ok(bounds_criterion(ctx)),
        9 => validity_formulas(),
        10 => gauge_invariance(pr),
        _ => Err(LdError::InvalidParameters(format!("no criterion {id}"))),
    };
    let elapsed = shared_time.unwrap_or_else(|| t.elapsed().as_secs_f64());
    let idx = (id as usize).clamp(1, 10) - 1;
    let limit = LIMITS[idx];
    let (passed, measured) = match res {
        Ok(o) => (o.passed && limit.is_none_or(|l| elapsed < l), o.measured),
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        name: NAMES[idx].to_string(),
        passed,
        measured,
        tolerance: TOLERANCES[idx].to_string(),
        elapsed_s: elapsed,
        time_limit_s: limit,
    }
}

/// Runs every criterion of a preset; `on_result` sees each result as soon as it is known.
pub fn acceptance_with<F: FnMut(&CriterionResult)>(name: &str, mut on_result: F) -> Result<AcceptanceReport> {
    let pr = preset(name)?;
    let mut ctx = Context::default();
    let mut criteria = Vec::new();
    for id in 1..=10u8 {
        let r = run_criterion(&pr, id, &mut ctx);
        on_result(&r);
        criteria.push(r);
    }
    let passed = criteria.iter().all(|c| c.passed);
    Ok(AcceptanceReport {
        preset: pr.name,
        criteria,
        bounds: ctx.bounds,
        passed,
    })
}

pub fn acceptance(name: &str) -> Result<AcceptanceReport> {
    acceptance_with(name, |_| {})
}
