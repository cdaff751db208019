#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use anyhow::Context;
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use config::{load_file, resolve, CommonArgs, FileConfig, Format, RunConfig};
use ld_vortex::harness::{self, acceptance_with, census, field_sweep, flux_check, relax, write_rows_csv};
use ld_vortex::minimize::minimize;
use ld_vortex::model::export::{write_field_csv, write_lift_csv};
use ld_vortex::model::{lift_field_2d, observables, random_start, Grid1D, LayeredState, LdParameters};
use ld_vortex::perturbation::{enumerate_seeds, epsilon_and_jumps, seed_state, vortex_plane_config};
use ld_vortex::validity::{numerical_gap, validity_report, write_validity_csv};
use ld_vortex::LdError;

#[derive(Parser)]
#[command(name = "ld-vortex", version, about = "Layered superconductor in a parallel field: solvers and checks")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Start {
    /// Perturbative seed at the vortex-plane phases
    Seed,
    /// Random start drawn from --seed
    Random,
}

#[derive(Subcommand)]
enum Cmd {
    /// Minimize the energy; JSON report plus a field CSV next to it
    Minimize {
        #[arg(long, value_enum, default_value = "seed")]
        start: Start,
        /// Polish the minimizer with Newton's method
        #[arg(long)]
        polish: bool,
        /// Also write the per-iteration trace as CSV
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Newton from every perturbative seed plus random descents
    Census {
        #[arg(long = "n-random", default_value_t = 50)]
        n_random: usize,
    },
    /// Warm-started sweep in H with nucleation detection
    Sweep {
        #[arg(long = "h-min", default_value_t = 2.0)]
        h_min: f64,
        #[arg(long = "h-max", default_value_t = 8.0)]
        h_max: f64,
        #[arg(long, default_value_t = 61)]
        points: usize,
    },
    /// Leading-order enumeration (JSON) or nucleation diagram (CSV)
    Perturb {
        /// Upper end of the H grid of the nucleation diagram
        #[arg(long = "h-max")]
        h_max: Option<f64>,
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// Validity bounds; CSV over the cartesian product of the scan lists
    Validity {
        #[arg(long = "scan-N", value_delimiter = ',')]
        scan_n: Vec<usize>,
        #[arg(long = "scan-L", value_delimiter = ',')]
        scan_l: Vec<f64>,
        #[arg(long = "scan-p", value_delimiter = ',')]
        scan_p: Vec<f64>,
        #[arg(long = "scan-kappa", value_delimiter = ',')]
        scan_kappa: Vec<f64>,
        #[arg(long = "scan-H", value_delimiter = ',')]
        scan_h: Vec<f64>,
        /// Order-one constant in the f-dip threshold
        #[arg(long = "c-u", default_value_t = 1.0)]
        c_u: f64,
        #[arg(long = "c", default_value_t = 1.0)]
        c: f64,
        /// Also compute the discrete spectral gap (JSON only)
        #[arg(long)]
        gap: bool,
    },
    /// Flux per Josephson-current cycle of the relaxed vortex-plane state
    Flux,
    /// Run an acceptance preset; exit 1 if any criterion fails
    Check {
        #[arg(long, default_value = "desk-N2")]
        preset: String,
    },
    /// Field CSV of a saved state (or of the relaxed vortex-plane state)
    ExportField {
        /// JSON with a `state` entry, e.g. the output of `minimize`
        #[arg(long)]
        input: Option<PathBuf>,
        /// Write the 2D lift h(x, z) with this many samples per gap instead
        #[arg(long)]
        lift: Option<usize>,
    },
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        let code = match err.downcast_ref::<LdError>() {
            Some(
                LdError::InvalidParameters(_)
                | LdError::DegenerateField(_)
                | LdError::DomainError(_)
                | LdError::UnknownPreset { .. },
            ) => 2,
            _ => 1,
        };
        Self { code, err }
    }
}

impl From<LdError> for Failure {
    fn from(e: LdError) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn usage(msg: String) -> Failure {
    Failure {
        code: 2,
        err: anyhow::anyhow!(msg),
    }
}

fn open_out(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(path: &Option<PathBuf>, value: &T) -> anyhow::Result<()> {
    let mut w = open_out(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_csv_with(path: &Option<PathBuf>, f: impl FnOnce(&mut dyn Write) -> ld_vortex::Result<()>) -> anyhow::Result<()> {
    let mut w = open_out(path)?;
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

/// `run.json` → `run.field.csv`
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn grid_for(cfg: &RunConfig) -> ld_vortex::Result<Grid1D> {
    Grid1D::for_params(&cfg.params, cfg.dx)
}

fn relaxed_vortex_state(params: &LdParameters, grid: &Grid1D) -> ld_vortex::Result<LayeredState> {
    Ok(relax(&seed_state(params, grid, &vortex_plane_config(params)?), params, grid)?.state)
}

fn run(cmd: Cmd, cfg: &RunConfig) -> Result<(), Failure> {
    let params = &cfg.params;
    match cmd {
        Cmd::Minimize { start, polish, trace } => {
            let grid = grid_for(cfg)?;
            let init = match start {
                Start::Seed => seed_state(params, &grid, &vortex_plane_config(params)?),
                Start::Random => random_start(params, &grid, &mut ChaCha8Rng::seed_from_u64(cfg.seed)),
            };
            let rep = minimize(&init, params, &grid, cfg.tol, cfg.max_iter)?;
            log::info!("minimize: {} iterations, energy {:.12e}", rep.iterations, rep.energy);
            if let Some(t) = &trace {
                write_csv_with(&Some(t.clone()), |w| rep.write_trace_csv(w))?;
            }
            let state = if polish {
                let cp = ld_vortex::newton_critical(&rep.state, params, &grid, harness::POLISH_TOL)?;
                if cfg.format == Format::Json {
                    write_json(&cfg.out, &cp)?;
                }
                cp.state
            } else {
                if cfg.format == Format::Json {
                    write_json(&cfg.out, &rep)?;
                }
                rep.state.clone()
            };
            let obs = observables(&state, params, &grid)?;
            match (cfg.format, &cfg.out) {
                (Format::Csv, out) => write_csv_with(out, |w| write_field_csv(&obs, &grid, w))?,
                (Format::Json, Some(p)) => write_csv_with(&Some(sibling(p, "field.csv")), |w| write_field_csv(&obs, &grid, w))?,
                (Format::Json, None) => {}
            }
            if !rep.converged {
                return Err(Failure {
                    code: 1,
                    err: anyhow::anyhow!("descent stopped at gradient norm {:.3e} after {} iterations", rep.grad_norm, rep.iterations),
                });
            }
        }
        Cmd::Census { n_random } => {
            let grid = grid_for(cfg)?;
            let rec = census(params, &grid, n_random, cfg.seed)?;
            match cfg.format {
                Format::Json => write_json(&cfg.out, &rec)?,
                Format::Csv => write_csv_with(&cfg.out, |w| write_rows_csv(&census_rows(&rec.data.points), w))?,
            }
            for c in rec.checks.iter().filter(|c| !c.passed) {
                log::warn!("census check {} failed: {}", c.name, c.detail);
            }
        }
        Cmd::Sweep { h_min, h_max, points } => {
            if points < 2 || !(h_max > h_min) {
                return Err(usage("sweep needs --points >= 2 and --h-max > --h-min".into()));
            }
            let grid = harness::experiment_grid(&params.with_field(h_max), 0)?;
            let grid = match cfg.dx {
                Some(dx) => Grid1D::for_params(params, Some(dx))?,
                None => grid,
            };
            let hs: Vec<f64> = (0..points)
                .map(|k| h_min + (h_max - h_min) * k as f64 / (points - 1) as f64)
                .collect();
            let rec = field_sweep(params, &grid, &hs)?;
            match cfg.format {
                Format::Json => write_json(&cfg.out, &rec)?,
                Format::Csv => write_csv_with(&cfg.out, |w| write_rows_csv(&sweep_rows(&rec.data.rows), w))?,
            }
        }
        Cmd::Perturb { h_max, points } => match cfg.format {
            Format::Json => write_json(&cfg.out, &enumerate_seeds(params)?)?,
            Format::Csv => {
                // default: a little past the second nucleation field
                let top = h_max.unwrap_or(2.5 * std::f64::consts::PI / (params.spacing * params.half_width));
                if points < 2 || !(top > 0.0) {
                    return Err(usage("perturb needs --points >= 2 and a positive --h-max".into()));
                }
                let hs: Vec<f64> = (1..=points).map(|k| top * k as f64 / points as f64).collect();
                let diagram = epsilon_and_jumps(params, &hs)?;
                write_csv_with(&cfg.out, |w| diagram.write_csv(w))?;
            }
        },
        Cmd::Validity {
            scan_n,
            scan_l,
            scan_p,
            scan_kappa,
            scan_h,
            c_u,
            c,
            gap,
        } => {
            let or = |v: Vec<f64>, d: f64| if v.is_empty() { vec![d] } else { v };
            let ns = if scan_n.is_empty() { vec![params.num_gaps] } else { scan_n };
            let mut reports = Vec::new();
            for &n in &ns {
                for &l in &or(scan_l.clone(), params.half_width) {
                    for &p in &or(scan_p.clone(), params.spacing) {
                        for &k in &or(scan_kappa.clone(), params.kappa) {
                            for &h in &or(scan_h.clone(), params.applied_field) {
                                let q = LdParameters::new(n, l, p, k, h, params.coupling);
                                let mut rep = validity_report(&q, c_u, c)?;
                                if gap {
                                    rep.numerical_gap = Some(numerical_gap(&q, &Grid1D::for_params(&q, cfg.dx)?)?);
                                }
                                reports.push(rep);
                            }
                        }
                    }
                }
            }
            match cfg.format {
                Format::Json if reports.len() == 1 => write_json(&cfg.out, &reports[0])?,
                Format::Json => write_json(&cfg.out, &reports)?,
                Format::Csv => write_csv_with(&cfg.out, |w| write_validity_csv(&reports, w))?,
            }
        }
        Cmd::Flux => {
            let grid = harness::experiment_grid(params, 0)?;
            let grid = match cfg.dx {
                Some(dx) => Grid1D::for_params(params, Some(dx))?,
                None => grid,
            };
            let state = relaxed_vortex_state(params, &grid)?;
            let cycles = flux_check(&state, params, &grid)?;
            match cfg.format {
                Format::Json => write_json(&cfg.out, &cycles)?,
                Format::Csv => write_csv_with(&cfg.out, |w| write_rows_csv(&cycles, w))?,
            }
        }
        Cmd::Check { preset } => {
            let report = acceptance_with(&preset, |c| eprintln!("{}", c.line()))?;
            write_json(&cfg.out, &report)?;
            if !report.passed {
                return Err(Failure {
                    code: 1,
                    err: anyhow::anyhow!("acceptance preset {preset} failed"),
                });
            }
        }
        Cmd::ExportField { input, lift } => {
            let (state, grid) = match &input {
                Some(path) => {
                    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
                    #[derive(serde::Deserialize)]
                    struct Saved {
                        state: LayeredState,
                    }
                    let saved: Saved = serde_json::from_str(&text).with_context(|| format!("no state in {}", path.display()))?;
                    let m = saved.state.a.ncols();
                    (saved.state, Grid1D::new(params.half_width, m)?)
                }
                None => {
                    let grid = grid_for(cfg)?;
                    (relaxed_vortex_state(params, &grid)?, grid)
                }
            };
            let obs = observables(&state, params, &grid)?;
            match lift {
                Some(nz) => {
                    let map = lift_field_2d(&obs, params, &grid, nz)?;
                    write_csv_with(&cfg.out, |w| write_lift_csv(&map, w))?;
                }
                None => write_csv_with(&cfg.out, |w| write_field_csv(&obs, &grid, w))?,
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CensusCsvRow {
    index: usize,
    seed_delta: String,
    g0: f64,
    predicted_inertia: usize,
    converged: bool,
    energy: f64,
    residual: f64,
    inertia: usize,
    delta_hat: String,
    min_f: f64,
    duplicate_of: Option<usize>,
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(";")
}

fn census_rows(points: &[harness::CensusPoint]) -> Vec<CensusCsvRow> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| CensusCsvRow {
            index: i,
            seed_delta: join(&p.seed_delta),
            g0: p.g0,
            predicted_inertia: p.predicted_inertia,
            converged: p.converged,
            energy: p.energy,
            residual: p.residual,
            inertia: p.inertia,
            delta_hat: join(&p.delta_hat),
            min_f: p.min_f,
            duplicate_of: p.duplicate_of,
        })
        .collect()
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct SweepCsvRow {
    H: f64,
    energy: f64,
    magnetization: f64,
    delta_hat: String,
    inertia: usize,
    residual: f64,
    interior_maxima: usize,
    boundary_maximum: bool,
    min_f: f64,
}

fn sweep_rows(rows: &[harness::SweepRow]) -> Vec<SweepCsvRow> {
    rows.iter()
        .map(|r| SweepCsvRow {
            H: r.H,
            energy: r.energy,
            magnetization: r.magnetization,
            delta_hat: join(&r.delta_hat),
            inertia: r.inertia,
            residual: r.residual,
            interior_maxima: r.interior_maxima,
            boundary_maximum: r.boundary_maximum,
            min_f: r.min_f,
        })
        .collect()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LD_VORTEX_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let file = match cli.common.config.as_deref().map(load_file).transpose() {
        Ok(f) => f.unwrap_or_else(FileConfig::default),
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cfg = match resolve(&cli.common, &file) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build_global() {
        log::warn!("thread pool already initialized: {e}");
    }
    match run(cli.cmd, &cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
