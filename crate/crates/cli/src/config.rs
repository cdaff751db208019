use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use ld_vortex::harness::DESCENT_TOL;
use ld_vortex::model::{validate, LdParameters};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Flags shared by every subcommand. All optional so that a config file can fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Number of gaps (N+1 planes)
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    /// Half-width of the sample
    #[arg(long = "L", global = true)]
    pub l: Option<f64>,
    /// Interlayer spacing
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    /// Applied field
    #[arg(long = "H", global = true)]
    pub h: Option<f64>,
    /// Josephson coupling
    #[arg(long, global = true)]
    pub r: Option<f64>,
    /// Grid spacing (default: min(1/kappa, 1/(Hp))/10)
    #[arg(long, global = true)]
    pub dx: Option<f64>,
    /// Gradient-norm tolerance of the descent
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default 1 for reproducible timing)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output path (default: stdout)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// JSON file with any of the above keys; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub p: Option<f64>,
    pub kappa: Option<f64>,
    #[serde(rename = "H")]
    pub h: Option<f64>,
    pub r: Option<f64>,
    pub dx: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: LdParameters,
    pub dx: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub fn load_file(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
}

/// Flag > file > default.
pub fn resolve(flags: &CommonArgs, file: &FileConfig) -> Result<RunConfig, String> {
    let d = LdParameters::desk();
    let params = LdParameters::new(
        flags.n.or(file.n).unwrap_or(d.num_gaps),
        flags.l.or(file.l).unwrap_or(d.half_width),
        flags.p.or(file.p).unwrap_or(d.spacing),
        flags.kappa.or(file.kappa).unwrap_or(d.kappa),
        flags.h.or(file.h).unwrap_or(d.applied_field),
        flags.r.or(file.r).unwrap_or(d.coupling),
    );
    let report = validate(&params);
    if !report.is_valid() {
        return Err(report.errors.join("; "));
    }
    for w in &report.warnings {
        log::warn!("{w}");
    }
    let cfg = RunConfig {
        params,
        dx: flags.dx.or(file.dx),
        tol: flags.tol.or(file.tol).unwrap_or(DESCENT_TOL),
        max_iter: flags.max_iter.or(file.max_iter).unwrap_or(20_000),
        seed: flags.seed.or(file.seed).unwrap_or(0),
        jobs: flags.jobs.or(file.jobs).unwrap_or(1),
        out: flags.out.clone().or_else(|| file.out.clone()),
        format: flags.format.or(file.format).unwrap_or_default(),
    };
    if cfg.dx.is_some_and(|dx| !(dx > 0.0 && dx.is_finite())) {
        return Err("--dx must be positive".into());
    }
    if !(cfg.tol > 0.0) {
        return Err("--tol must be positive".into());
    }
    if cfg.jobs == 0 {
        return Err("--jobs must be at least 1".into());
    }
    Ok(cfg)
}
