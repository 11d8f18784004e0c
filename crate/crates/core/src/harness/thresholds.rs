use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::output::{num, opt, CsvTable};
use super::{execute, expect_kind, Computed, ExperimentReport, NamedFit, Outcome, PointRecord};
use crate::error::{Error, Result};
use crate::fit::{fit_loglog, fit_scaling, ScalingFit, ScalingPoint};
use crate::graph::{
    apply_quantum_weights, degree_stats, generate_waxman, node_degrees, sample_link_realization,
    GeoParams, PhotonicParams, WeightedAdjacency,
};
use crate::seed::{derive_seed, Stream};
use crate::spectral::{
    ensemble_threshold, link_seed, spectral_tau_or_excluded, tau_kw, tau_mfa, topology_seed,
    Estimator, Method, ThresholdEstimate,
};
use crate::stats::Summary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Network {
    Classical,
    Quantum,
}

impl Network {
    pub fn label(self) -> &'static str {
        match self {
            Network::Classical => "classical",
            Network::Quantum => "quantum",
        }
    }

    /// Value of the `method` column in threshold tables.
    pub fn method_label(self) -> &'static str {
        match self {
            Network::Classical => "classical",
            Network::Quantum => Method::Quenched.label(),
        }
    }

    pub fn spectral_estimator(self) -> Estimator {
        match self {
            Network::Classical => Estimator::Am,
            Network::Quantum => Estimator::Pam,
        }
    }
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Seed that all ensembles at size `n` derive their instance seeds from.
pub(crate) fn point_master(master_seed: u64, n: usize) -> u64 {
    derive_seed(master_seed, n as u64, Stream::Topology)
}

fn networks(cfg: &ExperimentConfig) -> Vec<Network> {
    let mut v = Vec::new();
    if cfg.network.classical() {
        v.push(Network::Classical);
    }
    if cfg.network.quantum() {
        v.push(Network::Quantum);
    }
    v
}

fn excluded(r: Result<ThresholdEstimate>) -> Result<Option<f64>> {
    match r {
        Ok(t) => Ok(Some(t.value)),
        Err(Error::DegenerateGraph(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// (N, outer) tasks in row-major order.
fn tasks(cfg: &ExperimentConfig) -> Vec<(usize, usize)> {
    cfg.n_values
        .iter()
        .flat_map(|&n| (0..cfg.ensemble_size).map(move |o| (n, o)))
        .collect()
}

fn estimate(
    values: &[Option<f64>],
    estimator: Estimator,
    label: &str,
) -> Result<ThresholdEstimate> {
    ThresholdEstimate::from_samples(values, estimator, None).map_err(|e| match e {
        Error::DegenerateGraph(m) => Error::DegenerateGraph(format!("{label}: {m}")),
        other => other,
    })
}

fn record(label: String, e: &ThresholdEstimate) -> PointRecord {
    PointRecord {
        label,
        mean: e.ensemble_mean,
        std: e.ensemble_std,
        n_instances: e.n_instances,
        n_excluded: e.n_excluded,
    }
}

// ---------------------------------------------------------------------------
// Per-instance thresholds shared by the scaling and log-log pipelines.

#[derive(Debug, Clone, Copy)]
struct InstanceRow {
    n: usize,
    outer: usize,
    seed: u64,
    network: Network,
    mean_degree: f64,
    second_moment: f64,
    kw: Option<f64>,
    mfa: Option<f64>,
    spectral: Option<f64>,
}

fn instance_row(
    w: &WeightedAdjacency,
    network: Network,
    n: usize,
    outer: usize,
    seed: u64,
) -> Result<InstanceRow> {
    let stats = degree_stats(w);
    Ok(InstanceRow {
        n,
        outer,
        seed,
        network,
        mean_degree: stats.mean_degree,
        second_moment: stats.second_moment,
        kw: excluded(tau_kw(&stats))?,
        mfa: excluded(tau_mfa(&stats))?,
        spectral: spectral_tau_or_excluded(w)?,
    })
}

fn ensemble_rows(cfg: &ExperimentConfig) -> Result<Vec<InstanceRow>> {
    let nets = networks(cfg);
    let per_task: Vec<Vec<InstanceRow>> = tasks(cfg)
        .into_par_iter()
        .map(|(n, outer)| -> Result<Vec<InstanceRow>> {
            let seed = topology_seed(point_master(cfg.master_seed, n), outer);
            let g = generate_waxman(&cfg.geo.with_nodes(n), seed)?;
            nets.iter()
                .map(|&net| match net {
                    Network::Classical => instance_row(g.adjacency(), net, n, outer, seed),
                    Network::Quantum => {
                        let q = apply_quantum_weights(&g, &cfg.photonic)?;
                        instance_row(&q, net, n, outer, seed)
                    }
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_task.into_iter().flatten().collect())
}

fn instances_table(rows: &[InstanceRow]) -> CsvTable {
    let mut t = CsvTable::new(
        "instances.csv",
        "N,network,outer,seed,mean_degree,second_moment,tau_kw,tau_mfa,tau_spectral",
    );
    for r in rows {
        t.push(format!(
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.network,
            r.outer,
            r.seed,
            num(r.mean_degree),
            num(r.second_moment),
            opt(r.kw),
            opt(r.mfa),
            opt(r.spectral)
        ));
    }
    t
}

fn group(rows: &[InstanceRow], n: usize, net: Network) -> Vec<&InstanceRow> {
    rows.iter()
        .filter(|r| r.n == n && r.network == net)
        .collect()
}

// ---------------------------------------------------------------------------
// Threshold scaling.

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub network: Network,
    pub estimate: ThresholdEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingOutcome {
    pub rows: Vec<ScalingRow>,
    /// `c / N` fits per network and estimator.
    pub fits: Vec<(Network, Estimator, ScalingFit)>,
}

impl ScalingOutcome {
    pub fn fit(&self, network: Network, estimator: Estimator) -> Option<&ScalingFit> {
        self.fits
            .iter()
            .find(|(n, e, _)| *n == network && *e == estimator)
            .map(|(_, _, f)| f)
    }

    pub fn row(
        &self,
        n: usize,
        network: Network,
        estimator: Estimator,
    ) -> Option<&ThresholdEstimate> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.network == network && r.estimate.estimator == estimator)
            .map(|r| &r.estimate)
    }
}

pub fn run_threshold_scaling(
    cfg: &ExperimentConfig,
    fallback_dir: &Path,
) -> Result<ExperimentReport> {
    expect_kind(cfg, &[ExperimentKind::ThresholdScaling])?;
    execute(cfg, fallback_dir, threshold_scaling)
}

pub(crate) fn threshold_scaling(cfg: &ExperimentConfig) -> Result<Computed> {
    let rows = ensemble_rows(cfg)?;
    let mut out = ScalingOutcome {
        rows: Vec::new(),
        fits: Vec::new(),
    };
    let mut records = Vec::new();
    let mut table = CsvTable::new(
        "thresholds.csv",
        "N,method,estimator,mean_tau,std_tau,n_instances,n_excluded",
    );
    for &n in &cfg.n_values {
        for net in networks(cfg) {
            let g = group(&rows, n, net);
            let columns: [(Estimator, Vec<Option<f64>>); 3] = [
                (Estimator::Kw, g.iter().map(|r| r.kw).collect()),
                (Estimator::Mfa, g.iter().map(|r| r.mfa).collect()),
                (
                    net.spectral_estimator(),
                    g.iter().map(|r| r.spectral).collect(),
                ),
            ];
            for (est, values) in columns {
                let label = format!("N={n} {net} {est}");
                let e = estimate(&values, est, &label)?;
                table.push(format!(
                    "{},{},{},{},{},{},{}",
                    n,
                    net.method_label(),
                    est,
                    num(e.ensemble_mean),
                    num(e.ensemble_std),
                    e.n_instances,
                    e.n_excluded
                ));
                records.push(record(label, &e));
                out.rows.push(ScalingRow {
                    n,
                    network: net,
                    estimate: e,
                });
            }
        }
    }

    let mut fits = Vec::new();
    let mut notes = Vec::new();
    let mut fit_table = CsvTable::new("fits.csv", "network,estimator,c,c_err,n_points");
    for net in networks(cfg) {
        for est in [Estimator::Kw, Estimator::Mfa, net.spectral_estimator()] {
            let points: Vec<ScalingPoint> = out
                .rows
                .iter()
                .filter(|r| r.network == net && r.estimate.estimator == est && r.n >= cfg.fit.min_n)
                .map(|r| ScalingPoint {
                    n: r.n as f64,
                    tau: r.estimate.ensemble_mean,
                    std: Some(r.estimate.ensemble_std),
                })
                .collect();
            let label = format!("{net} {est}");
            match fit_scaling(&points) {
                Ok(f) => {
                    fit_table.push(format!(
                        "{},{},{},{},{}",
                        net,
                        est,
                        num(f.c),
                        num(f.c_err),
                        f.n_points
                    ));
                    fits.push(NamedFit { label, fit: f });
                    out.fits.push((net, est, f));
                }
                Err(Error::InsufficientData(m)) => notes.push(format!("{label}: fit skipped, {m}")),
                Err(e) => return Err(e),
            }
        }
    }
    for net in networks(cfg) {
        if let Some(f) = out.fit(net, Estimator::Kw) {
            notes.push(format!(
                "{net}: headline c (KW) = {:?} +/- {:?}",
                f.c, f.c_err
            ));
        }
    }

    Ok(Computed {
        records,
        fits,
        notes,
        tables: vec![table, fit_table, instances_table(&rows)],
        outcome: Outcome::ThresholdScaling(out),
    })
}

// ---------------------------------------------------------------------------
// Log-log asymptote.

#[derive(Debug, Clone, PartialEq)]
pub struct LogLogRow {
    pub n: usize,
    pub network: Network,
    /// Ensemble mean of the (expected) mean degree.
    pub mean_degree: f64,
    pub tau: ThresholdEstimate,
}

impl LogLogRow {
    pub fn tau_times_k(&self) -> f64 {
        self.tau.ensemble_mean * self.mean_degree
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogLogOutcome {
    pub rows: Vec<LogLogRow>,
    pub fits: Vec<(Network, ScalingFit)>,
}

impl LogLogOutcome {
    pub fn slope(&self, network: Network) -> Option<f64> {
        self.fits
            .iter()
            .find(|(n, _)| *n == network)
            .and_then(|(_, f)| f.slope)
    }
}

pub fn run_loglog_asymptote(
    cfg: &ExperimentConfig,
    fallback_dir: &Path,
) -> Result<ExperimentReport> {
    expect_kind(cfg, &[ExperimentKind::LoglogAsymptote])?;
    execute(cfg, fallback_dir, loglog_asymptote)
}

pub(crate) fn loglog_asymptote(cfg: &ExperimentConfig) -> Result<Computed> {
    let rows = ensemble_rows(cfg)?;
    let mut out = LogLogOutcome {
        rows: Vec::new(),
        fits: Vec::new(),
    };
    let mut records = Vec::new();
    let mut table = CsvTable::new(
        "loglog.csv",
        "N,network,mean_degree,mean_tau,std_tau,log_k,log_tau,tau_times_k,n_instances,n_excluded",
    );
    for &n in &cfg.n_values {
        for net in networks(cfg) {
            let g = group(&rows, n, net);
            let k = Summary::of(&g.iter().map(|r| r.mean_degree).collect::<Vec<_>>()).mean;
            let label = format!("N={n} {net} {}", net.spectral_estimator());
            let taus: Vec<Option<f64>> = g.iter().map(|r| r.spectral).collect();
            let e = estimate(&taus, net.spectral_estimator(), &label)?;
            let row = LogLogRow {
                n,
                network: net,
                mean_degree: k,
                tau: e,
            };
            table.push(format!(
                "{},{},{},{},{},{},{},{},{},{}",
                n,
                net,
                num(k),
                num(row.tau.ensemble_mean),
                num(row.tau.ensemble_std),
                num(k.ln()),
                num(row.tau.ensemble_mean.ln()),
                num(row.tau_times_k()),
                row.tau.n_instances,
                row.tau.n_excluded
            ));
            records.push(record(label, &row.tau));
            out.rows.push(row);
        }
    }

    let mut fits = Vec::new();
    let mut notes = Vec::new();
    for net in networks(cfg) {
        let mut pts: Vec<&LogLogRow> = out.rows.iter().filter(|r| r.network == net).collect();
        pts.sort_by_key(|r| r.n);
        let tail = &pts[pts.len().saturating_sub(cfg.fit.loglog_points)..];
        let xy: Vec<(f64, f64)> = tail
            .iter()
            .map(|r| (r.mean_degree, r.tau.ensemble_mean))
            .collect();
        for r in &pts {
            notes.push(format!(
                "{net} N={}: tau*<k> - 1 = {:?}",
                r.n,
                r.tau_times_k() - 1.0
            ));
        }
        match fit_loglog(&xy) {
            Ok(f) => {
                let slope = f.slope.unwrap_or(f64::NAN);
                notes.push(format!(
                    "{net}: slope over the largest {} N = {slope:?}, deviation from -1 = {:?}",
                    tail.len(),
                    slope + 1.0
                ));
                fits.push(NamedFit {
                    label: format!("{net} loglog"),
                    fit: f,
                });
                out.fits.push((net, f));
            }
            Err(Error::InsufficientData(m)) => notes.push(format!("{net}: slope fit skipped, {m}")),
            Err(e) => return Err(e),
        }
    }

    Ok(Computed {
        records,
        fits,
        notes,
        tables: vec![table, instances_table(&rows)],
        outcome: Outcome::LoglogAsymptote(out),
    })
}

// ---------------------------------------------------------------------------
// Method comparison.

#[derive(Debug, Clone, PartialEq)]
pub struct MethodRow {
    pub n: usize,
    pub method: Method,
    pub estimate: ThresholdEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub rows: Vec<MethodRow>,
}

impl MethodOutcome {
    pub fn get(&self, n: usize, method: Method) -> Option<&ThresholdEstimate> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.method == method)
            .map(|r| &r.estimate)
    }
}

pub fn run_method_compare(cfg: &ExperimentConfig, fallback_dir: &Path) -> Result<ExperimentReport> {
    expect_kind(cfg, &[ExperimentKind::MethodCompare])?;
    execute(cfg, fallback_dir, method_compare)
}

const METHODS: [Method; 3] = [Method::Annealed, Method::Quenched, Method::FullySampled];

pub(crate) fn method_compare(cfg: &ExperimentConfig) -> Result<Computed> {
    let mut out = MethodOutcome { rows: Vec::new() };
    let mut records = Vec::new();
    let mut notes = Vec::new();
    let mut table = CsvTable::new(
        "methods.csv",
        "N,method,estimator,mean_tau,std_tau,n_instances,n_excluded",
    );
    let mut inst = CsvTable::new("method_instances.csv", "N,method,outer,inner,seed,tau");
    for &n in &cfg.n_values {
        let geo = cfg.geo.with_nodes(n);
        let master = point_master(cfg.master_seed, n);
        for method in METHODS {
            let ens = ensemble_threshold(
                &geo,
                &cfg.photonic,
                method,
                cfg.ensemble_size,
                cfg.inner_samples,
                master,
            )?;
            let e = ens.estimate;
            table.push(format!(
                "{},{},{},{},{},{},{}",
                n,
                method,
                e.estimator,
                num(e.ensemble_mean),
                num(e.ensemble_std),
                e.n_instances,
                e.n_excluded
            ));
            for s in &ens.samples {
                inst.push(format!(
                    "{},{},{},{},{},{}",
                    n,
                    method,
                    s.outer,
                    s.inner.map(|i| i.to_string()).unwrap_or_default(),
                    s.seed,
                    opt(s.tau)
                ));
            }
            records.push(record(format!("N={n} {method}"), &e));
            out.rows.push(MethodRow {
                n,
                method,
                estimate: e,
            });
        }
        let [m1, m2, m3] = METHODS.map(|m| out.get(n, m).expect("just pushed").clone());
        let band = m2.ensemble_std.hypot(m3.ensemble_std);
        notes.push(format!(
            "N={n}: |M2 - M3| = {:?}, |M1 - M2| = {:?}, combined std of M2 and M3 = {:?}",
            (m2.ensemble_mean - m3.ensemble_mean).abs(),
            (m1.ensemble_mean - m2.ensemble_mean).abs(),
            band
        ));
    }
    Ok(Computed {
        records,
        fits: Vec::new(),
        notes,
        tables: vec![table, inst],
        outcome: Outcome::MethodCompare(out),
    })
}

// ---------------------------------------------------------------------------
// Photon-number and radius sweeps.

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub r_max: f64,
    pub network: Network,
    /// `None` on classical rows.
    pub gamma: Option<f64>,
    pub n_photons: Option<u64>,
    pub estimate: ThresholdEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
}

impl SweepOutcome {
    pub fn classical(&self, n: usize, r_max: f64) -> Option<&ThresholdEstimate> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.r_max == r_max && r.network == Network::Classical)
            .map(|r| &r.estimate)
    }

    pub fn quantum(
        &self,
        n: usize,
        r_max: f64,
        gamma: f64,
        n_photons: u64,
    ) -> Option<&ThresholdEstimate> {
        self.rows
            .iter()
            .find(|r| {
                r.n == n
                    && r.r_max == r_max
                    && r.gamma == Some(gamma)
                    && r.n_photons == Some(n_photons)
            })
            .map(|r| &r.estimate)
    }
}

pub fn run_photon_sweep(cfg: &ExperimentConfig, fallback_dir: &Path) -> Result<ExperimentReport> {
    expect_kind(cfg, &[ExperimentKind::PhotonSweep])?;
    execute(cfg, fallback_dir, sweep)
}

pub fn run_radius_sweep(cfg: &ExperimentConfig, fallback_dir: &Path) -> Result<ExperimentReport> {
    expect_kind(cfg, &[ExperimentKind::RadiusSweep])?;
    execute(cfg, fallback_dir, sweep)
}

/// Every `(gamma, n_photons)` pair is evaluated on the same topologies, so
/// differences between curves are not blurred by topology noise.
pub(crate) fn sweep(cfg: &ExperimentConfig) -> Result<Computed> {
    let radii: Vec<f64> = match cfg.experiment {
        ExperimentKind::RadiusSweep => cfg.sweep.r_max_values.clone(),
        _ => vec![cfg.geo.r_max],
    };
    let grid: Vec<(f64, u64)> = cfg
        .sweep
        .gammas
        .iter()
        .flat_map(|&g| cfg.sweep.n_photons.iter().map(move |&np| (g, np)))
        .collect();
    let points: Vec<GeoParams> = cfg
        .n_values
        .iter()
        .flat_map(|&n| {
            radii.iter().map(move |&r| GeoParams {
                r_max: r,
                ..cfg.geo.with_nodes(n)
            })
        })
        .collect();
    let work: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..cfg.ensemble_size).map(move |o| (p, o)))
        .collect();

    // Per task: the seed, the classical threshold, then one per grid entry.
    let results: Vec<(u64, Option<f64>, Vec<Option<f64>>)> = work
        .into_par_iter()
        .map(|(p, outer)| -> Result<_> {
            let geo = &points[p];
            let seed = topology_seed(point_master(cfg.master_seed, geo.n_nodes), outer);
            let g = generate_waxman(geo, seed)?;
            let classical = spectral_tau_or_excluded(g.adjacency())?;
            let quantum = grid
                .iter()
                .map(|&(gamma, n_photons)| {
                    let ph = PhotonicParams { gamma, n_photons };
                    spectral_tau_or_excluded(&apply_quantum_weights(&g, &ph)?)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((seed, classical, quantum))
        })
        .collect::<Result<_>>()?;

    let mut out = SweepOutcome { rows: Vec::new() };
    let mut records = Vec::new();
    let mut table = CsvTable::new(
        "sweep.csv",
        "N,r_max,network,gamma,n_photons,mean_tau,std_tau,sem_tau,n_instances,n_excluded",
    );
    let mut inst = CsvTable::new(
        "sweep_instances.csv",
        "N,r_max,outer,seed,network,gamma,n_photons,tau",
    );
    for (p, geo) in points.iter().enumerate() {
        let chunk = &results[p * cfg.ensemble_size..(p + 1) * cfg.ensemble_size];
        let (n, r) = (geo.n_nodes, geo.r_max);
        let mut push =
            |network: Network, gp: Option<(f64, u64)>, values: Vec<Option<f64>>| -> Result<()> {
                let est = network.spectral_estimator();
                let (g_s, np_s) = match gp {
                    Some((g, np)) => (num(g), np.to_string()),
                    None => (String::new(), String::new()),
                };
                let label = format!(
                    "N={n} r_max={} {network} gamma={g_s} n_photons={np_s}",
                    num(r)
                );
                for (outer, (v, (seed, _, _))) in values.iter().zip(chunk).enumerate() {
                    inst.push(format!(
                        "{},{},{},{},{},{},{},{}",
                        n,
                        num(r),
                        outer,
                        seed,
                        network,
                        g_s,
                        np_s,
                        opt(*v)
                    ));
                }
                let e = estimate(&values, est, &label)?;
                table.push(format!(
                    "{},{},{},{},{},{},{},{},{},{}",
                    n,
                    num(r),
                    network,
                    g_s,
                    np_s,
                    num(e.ensemble_mean),
                    num(e.ensemble_std),
                    num(e.std_err()),
                    e.n_instances,
                    e.n_excluded
                ));
                records.push(record(label, &e));
                out.rows.push(SweepRow {
                    n,
                    r_max: r,
                    network,
                    gamma: gp.map(|x| x.0),
                    n_photons: gp.map(|x| x.1),
                    estimate: e,
                });
                Ok(())
            };
        push(
            Network::Classical,
            None,
            chunk.iter().map(|c| c.1).collect(),
        )?;
        for (gi, &gp) in grid.iter().enumerate() {
            push(
                Network::Quantum,
                Some(gp),
                chunk.iter().map(|c| c.2[gi]).collect(),
            )?;
        }
    }

    let mut notes = Vec::new();
    for geo in &points {
        let (n, r) = (geo.n_nodes, geo.r_max);
        let Some(classical) = out.classical(n, r).map(|e| e.ensemble_mean) else {
            continue;
        };
        for &gamma in &cfg.sweep.gammas {
            let curve: Vec<f64> = cfg
                .sweep
                .n_photons
                .iter()
                .filter_map(|&np| out.quantum(n, r, gamma, np).map(|e| e.ensemble_mean))
                .collect();
            let monotone = curve.windows(2).all(|w| w[1] <= w[0]);
            let last = curve.last().copied().unwrap_or(f64::NAN);
            notes.push(format!(
                "N={n} r_max={} gamma={}: nonincreasing in n_photons = {monotone}, largest-n_photons tau / classical tau = {:?}",
                num(r),
                num(gamma),
                last / classical
            ));
        }
    }

    Ok(Computed {
        records,
        fits: Vec::new(),
        notes,
        tables: vec![table, inst],
        outcome: Outcome::Sweep(out),
    })
}

// ---------------------------------------------------------------------------
// Degree distributions.

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeRow {
    pub n: usize,
    pub network: Network,
    /// Pooled fraction of nodes per integer degree over the ensemble.
    pub pmf: BTreeMap<usize, f64>,
    pub mean_degree: Summary,
    pub second_moment: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeOutcome {
    pub rows: Vec<DegreeRow>,
}

pub fn run_degree_dist(cfg: &ExperimentConfig, fallback_dir: &Path) -> Result<ExperimentReport> {
    expect_kind(cfg, &[ExperimentKind::DegreeDist])?;
    execute(cfg, fallback_dir, degree_dist)
}

/// Quantum degrees are counted on one sampled link realization per topology.
pub(crate) fn degree_dist(cfg: &ExperimentConfig) -> Result<Computed> {
    let nets = networks(cfg);
    let per_task: Vec<(u64, Vec<Vec<f64>>)> = tasks(cfg)
        .into_par_iter()
        .map(|(n, outer)| -> Result<_> {
            let seed = topology_seed(point_master(cfg.master_seed, n), outer);
            let g = generate_waxman(&cfg.geo.with_nodes(n), seed)?;
            let degs = nets
                .iter()
                .map(|net| match net {
                    Network::Classical => Ok(node_degrees(g.adjacency())),
                    Network::Quantum => {
                        let q = apply_quantum_weights(&g, &cfg.photonic)?;
                        Ok(node_degrees(&sample_link_realization(
                            &q,
                            link_seed(seed, 0),
                        )?))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((seed, degs))
        })
        .collect::<Result<_>>()?;

    let mut out = DegreeOutcome { rows: Vec::new() };
    let mut records = Vec::new();
    let mut dist = CsvTable::new("degree_dist.csv", "N,network,k,p_k");
    let mut moments = CsvTable::new(
        "degree_moments.csv",
        "N,network,mean_degree,std_mean_degree,mean_second_moment,n_instances",
    );
    let mut inst = CsvTable::new(
        "degree_instances.csv",
        "N,network,outer,seed,mean_degree,second_moment",
    );
    for (ni, &n) in cfg.n_values.iter().enumerate() {
        let chunk = &per_task[ni * cfg.ensemble_size..(ni + 1) * cfg.ensemble_size];
        for (k, &net) in nets.iter().enumerate() {
            let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
            let mut means = Vec::with_capacity(chunk.len());
            let mut seconds = Vec::with_capacity(chunk.len());
            for (outer, (seed, degs)) in chunk.iter().enumerate() {
                let d = &degs[k];
                for &x in d {
                    *counts.entry(x as usize).or_default() += 1;
                }
                let m = d.iter().sum::<f64>() / n as f64;
                let m2 = d.iter().map(|x| x * x).sum::<f64>() / n as f64;
                inst.push(format!(
                    "{},{},{},{},{},{}",
                    n,
                    net,
                    outer,
                    seed,
                    num(m),
                    num(m2)
                ));
                means.push(m);
                seconds.push(m2);
            }
            let total: u64 = counts.values().sum();
            let pmf: BTreeMap<usize, f64> = counts
                .iter()
                .map(|(&k, &c)| (k, c as f64 / total as f64))
                .collect();
            for (k, p) in &pmf {
                dist.push(format!("{},{},{},{}", n, net, k, num(*p)));
            }
            let mean_degree = Summary::of(&means);
            let second_moment = Summary::of(&seconds).mean;
            moments.push(format!(
                "{},{},{},{},{},{}",
                n,
                net,
                num(mean_degree.mean),
                num(mean_degree.std),
                num(second_moment),
                chunk.len()
            ));
            records.push(PointRecord {
                label: format!("N={n} {net} mean degree"),
                mean: mean_degree.mean,
                std: mean_degree.std,
                n_instances: chunk.len(),
                n_excluded: 0,
            });
            out.rows.push(DegreeRow {
                n,
                network: net,
                pmf,
                mean_degree,
                second_moment,
            });
        }
    }
    Ok(Computed {
        records,
        fits: Vec::new(),
        notes: Vec::new(),
        tables: vec![dist, moments, inst],
        outcome: Outcome::DegreeDist(out),
    })
}
