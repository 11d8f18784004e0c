//! Config-driven experiment pipelines.
//!
//! Each pipeline computes an [`Outcome`], writes plot-ready CSV files and a
//! `report.txt` into the output directory, and returns an
//! [`ExperimentReport`]. All randomness flows from seeds derived from
//! `master_seed`, and per-instance work is collected in index order, so the
//! CSV bytes do not depend on the worker count.

mod config;
mod dynamics;
mod output;
mod thresholds;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

pub use config::{
    DynamicsConfig, ExperimentConfig, ExperimentKind, FitConfig, GeoConfig, NetworkChoice,
    SweepConfig,
};
pub use dynamics::{run_dynamics_sweep, DynamicsOutcome, DynamicsRun};
pub use thresholds::{
    run_degree_dist, run_loglog_asymptote, run_method_compare, run_photon_sweep, run_radius_sweep,
    run_threshold_scaling, DegreeOutcome, DegreeRow, LogLogOutcome, LogLogRow, MethodOutcome,
    MethodRow, Network, ScalingOutcome, ScalingRow, SweepOutcome, SweepRow,
};

use crate::error::{Error, Result};
use crate::fit::ScalingFit;

/// One aggregated point of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRecord {
    pub label: String,
    pub mean: f64,
    pub std: f64,
    pub n_instances: usize,
    pub n_excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedFit {
    pub label: String,
    pub fit: ScalingFit,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    DegreeDist(DegreeOutcome),
    ThresholdScaling(ScalingOutcome),
    LoglogAsymptote(LogLogOutcome),
    DynamicsSweep(DynamicsOutcome),
    MethodCompare(MethodOutcome),
    Sweep(SweepOutcome),
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub experiment: ExperimentKind,
    pub records: Vec<PointRecord>,
    pub fits: Vec<NamedFit>,
    pub notes: Vec<String>,
    /// Files written, in write order.
    pub files: Vec<PathBuf>,
    pub wall_time: Duration,
    pub config_echo: String,
    pub version: &'static str,
    pub outcome: Outcome,
}

impl ExperimentReport {
    pub fn fit(&self, label: &str) -> Option<&ScalingFit> {
        self.fits.iter().find(|f| f.label == label).map(|f| &f.fit)
    }

    /// Human-readable summary written as `report.txt`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment: {}", self.experiment);
        let _ = writeln!(s, "version: qnet-epidemic {}", self.version);
        let _ = writeln!(s, "wall time: {:.3} s", self.wall_time.as_secs_f64());
        let _ = writeln!(s, "\n[points]");
        let _ = writeln!(s, "label,mean,std,n_instances,n_excluded");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{:?},{:?},{},{}",
                r.label, r.mean, r.std, r.n_instances, r.n_excluded
            );
        }
        let excluded: usize = self.records.iter().map(|r| r.n_excluded).sum();
        let _ = writeln!(s, "\nexcluded instances: {excluded}");
        if !self.fits.is_empty() {
            let _ = writeln!(s, "\n[fits]");
            for f in &self.fits {
                let _ = write!(
                    s,
                    "{}: c = {:?} +/- {:?} ({} points)",
                    f.label, f.fit.c, f.fit.c_err, f.fit.n_points
                );
                if let (Some(m), Some(e)) = (f.fit.slope, f.fit.slope_err) {
                    let _ = write!(s, ", slope = {m:?} +/- {e:?}");
                }
                s.push('\n');
            }
        }
        if !self.notes.is_empty() {
            let _ = writeln!(s, "\n[notes]");
            for n in &self.notes {
                let _ = writeln!(s, "{n}");
            }
        }
        let _ = writeln!(s, "\n[config]\n{}", self.config_echo.trim_end());
        s
    }
}

/// What a pipeline hands back before the report is assembled.
pub(crate) struct Computed {
    pub records: Vec<PointRecord>,
    pub fits: Vec<NamedFit>,
    pub notes: Vec<String>,
    pub tables: Vec<output::CsvTable>,
    pub outcome: Outcome,
}

/// Runs the pipeline named by `cfg.experiment`.
///
/// Output goes to `cfg.output_dir`, or `fallback_dir` when the config has
/// none. The worker pool is capped at `cfg.workers`.
pub fn run_experiment(cfg: &ExperimentConfig, fallback_dir: &Path) -> Result<ExperimentReport> {
    let run: fn(&ExperimentConfig) -> Result<Computed> = match cfg.experiment {
        ExperimentKind::DegreeDist => thresholds::degree_dist,
        ExperimentKind::ThresholdScaling => thresholds::threshold_scaling,
        ExperimentKind::LoglogAsymptote => thresholds::loglog_asymptote,
        ExperimentKind::DynamicsSweep => dynamics::dynamics_sweep,
        ExperimentKind::MethodCompare => thresholds::method_compare,
        ExperimentKind::PhotonSweep | ExperimentKind::RadiusSweep => thresholds::sweep,
    };
    execute(cfg, fallback_dir, run)
}

pub(crate) fn execute(
    cfg: &ExperimentConfig,
    fallback_dir: &Path,
    run: fn(&ExperimentConfig) -> Result<Computed>,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let out_dir = cfg
        .output_dir
        .clone()
        .unwrap_or_else(|| fallback_dir.to_path_buf());
    let start = Instant::now();
    let computed = with_pool(cfg.workers, || run(cfg))?;
    let wall_time = start.elapsed();

    std::fs::create_dir_all(&out_dir)?;
    let mut files = Vec::with_capacity(computed.tables.len() + 1);
    for table in &computed.tables {
        files.push(table.write_to(&out_dir)?);
    }
    let report = ExperimentReport {
        experiment: cfg.experiment,
        records: computed.records,
        fits: computed.fits,
        notes: computed.notes,
        files,
        wall_time,
        config_echo: cfg.to_toml_string(),
        version: env!("CARGO_PKG_VERSION"),
        outcome: computed.outcome,
    };
    let report_path = out_dir.join("report.txt");
    std::fs::write(&report_path, report.render())?;
    let mut report = report;
    report.files.push(report_path);
    Ok(report)
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match workers {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?
            .install(f),
    }
}

fn expect_kind(cfg: &ExperimentConfig, kinds: &[ExperimentKind]) -> Result<()> {
    if kinds.contains(&cfg.experiment) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "pipeline cannot run a `{}` experiment",
            cfg.experiment
        )))
    }
}
