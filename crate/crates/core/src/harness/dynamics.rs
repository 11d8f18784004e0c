use std::path::Path;

use super::config::{ExperimentConfig, ExperimentKind};
use super::output::{num, CsvTable};
use super::thresholds::point_master;
use super::{execute, expect_kind, Computed, ExperimentReport, Outcome, PointRecord};
use crate::dynamics::{
    kw_solution, run_direct_sim, run_mnlds, EpidemicParams, InfectionTrajectory,
};
use crate::error::{Error, Result};
use crate::graph::{apply_quantum_weights, degree_stats, generate_waxman};
use crate::seed::{derive_seed, Stream};
use crate::spectral::{default_max_iter, largest_eigenvalue, topology_seed, DEFAULT_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsRun {
    pub delta_ratio: f64,
    pub delta: f64,
    pub mnlds: InfectionTrajectory,
    pub direct: InfectionTrajectory,
    /// Mean of the Monte Carlo series over its trailing window.
    pub direct_steady: f64,
    pub kw: InfectionTrajectory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsOutcome {
    pub n: usize,
    /// Seed of the quantum topology all runs share.
    pub seed: u64,
    pub lambda_1: f64,
    /// Critical curing rate `beta * lambda_1(pAM)`.
    pub delta_c: f64,
    pub runs: Vec<DynamicsRun>,
}

pub fn run_dynamics_sweep(cfg: &ExperimentConfig, fallback_dir: &Path) -> Result<ExperimentReport> {
    expect_kind(cfg, &[ExperimentKind::DynamicsSweep])?;
    execute(cfg, fallback_dir, dynamics_sweep)
}

fn trajectory_table(name: String, method: &str, tr: &InfectionTrajectory) -> CsvTable {
    let mut t = CsvTable::new(name, "t,eta_mean,eta_std,method");
    for (i, (&time, &eta)) in tr.times.iter().zip(&tr.eta).enumerate() {
        let std = tr.eta_std.as_ref().map_or(0.0, |s| s[i]);
        t.push(format!(
            "{},{},{},{}",
            num(time),
            num(eta),
            num(std),
            method
        ));
    }
    t
}

pub(crate) fn dynamics_sweep(cfg: &ExperimentConfig) -> Result<Computed> {
    let n = cfg.n_values[0];
    let d = &cfg.dynamics;
    let seed = topology_seed(point_master(cfg.master_seed, n), d.instance);
    let g = generate_waxman(&cfg.geo.with_nodes(n), seed)?;
    let q = apply_quantum_weights(&g, &cfg.photonic)?;
    let lambda_1 = largest_eigenvalue(&q, DEFAULT_TOL, default_max_iter(&q))?.lambda_1;
    if lambda_1 <= 0.0 {
        return Err(Error::DegenerateGraph(
            "pAM threshold undefined: largest eigenvalue is zero".into(),
        ));
    }
    let beta = cfg.epidemic.beta;
    let delta_c = beta * lambda_1;
    let mean_degree = degree_stats(&q).mean_degree;

    let mut tables = Vec::new();
    let mut records = Vec::new();
    let mut notes = vec![format!(
        "instance seed {seed}: lambda_1(pAM) = {lambda_1:?}, delta_c = {delta_c:?}, <k> = {mean_degree:?}"
    )];
    let mut summary = CsvTable::new(
        "dynamics_summary.csv",
        "delta_ratio,delta,method,eta0,eta_final,eta_steady,steps,converged",
    );
    let mut runs = Vec::with_capacity(cfg.delta_ratios.len());
    for (idx, &ratio) in cfg.delta_ratios.iter().enumerate() {
        let delta = ratio * delta_c;
        if delta > 1.0 {
            return Err(Error::Config(format!(
                "`delta_ratios`: {ratio} * delta_c = {delta} exceeds 1; lower `epidemic.beta`"
            )));
        }
        let params = EpidemicParams {
            beta,
            delta,
            initial_infection: cfg.epidemic.initial_infection.clone(),
        };
        let mnlds = run_mnlds(&q, &params, d.t_max, d.conv_tol)?;
        let direct_seed = derive_seed(seed, idx as u64, Stream::DirectSim);
        let direct = run_direct_sim(&q, &params, d.direct_t_max, d.direct_runs, direct_seed)?;
        let window = ((direct.eta.len() as f64 * d.steady_window).ceil() as usize).max(1);
        let tail = &direct.eta[direct.eta.len() - window..];
        let direct_steady = tail.iter().sum::<f64>() / tail.len() as f64;
        let grid: Vec<f64> = (0..=d.direct_t_max).map(|t| t as f64).collect();
        let kw = kw_solution(&params, mean_degree, mnlds.eta0(), &grid)?;

        let tag = num(ratio).trim_end_matches(".0").to_string();
        for (method, tr, steady) in [
            ("mnlds", &mnlds, mnlds.eta_final),
            ("direct", &direct, direct_steady),
            ("kw", &kw, kw.eta_final),
        ] {
            tables.push(trajectory_table(
                format!("traj_{method}_delta{tag}.csv"),
                method,
                tr,
            ));
            summary.push(format!(
                "{},{},{},{},{},{},{},{}",
                num(ratio),
                num(delta),
                method,
                num(tr.eta0()),
                num(tr.eta_final),
                num(steady),
                tr.steps,
                tr.converged
            ));
            records.push(PointRecord {
                label: format!("delta/delta_c={tag} {method} eta_final"),
                mean: tr.eta_final,
                std: tr
                    .eta_std
                    .as_ref()
                    .and_then(|s| s.last().copied())
                    .unwrap_or(0.0),
                n_instances: if method == "direct" { d.direct_runs } else { 1 },
                n_excluded: 0,
            });
        }
        notes.push(format!(
            "delta/delta_c = {tag}: mNLDS eta = {:?} after {} steps (converged: {}), direct steady = {direct_steady:?}",
            mnlds.eta_final, mnlds.steps, mnlds.converged
        ));
        runs.push(DynamicsRun {
            delta_ratio: ratio,
            delta,
            mnlds,
            direct,
            direct_steady,
            kw,
        });
    }
    tables.push(summary);

    Ok(Computed {
        records,
        fits: Vec::new(),
        notes,
        tables,
        outcome: Outcome::DynamicsSweep(DynamicsOutcome {
            n,
            seed,
            lambda_1,
            delta_c,
            runs,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_produces_three_trajectories_per_ratio() {
        let cfg = ExperimentConfig::from_toml_str(
            "experiment = \"dynamics-sweep\"\nn_values = [60]\nmaster_seed = 2\ndelta_ratios = [0.1, 1.0]\n[dynamics]\nt_max = 200\ndirect_t_max = 30\ndirect_runs = 3\n",
            "t",
        )
        .unwrap();
        let c = dynamics_sweep(&cfg).unwrap();
        let names: Vec<&str> = c.tables.iter().map(|t| t.name.as_str()).collect();
        assert!(names.contains(&"traj_mnlds_delta0.1.csv"));
        assert!(names.contains(&"traj_direct_delta1.csv"));
        assert!(names.contains(&"dynamics_summary.csv"));
        let Outcome::DynamicsSweep(out) = c.outcome else {
            panic!("wrong outcome")
        };
        assert!((out.delta_c - 0.05 * out.lambda_1).abs() < 1e-15);
        assert_eq!(out.runs[0].direct.eta.len(), 31);
    }

    #[test]
    fn curing_rate_above_one_is_rejected() {
        let cfg = ExperimentConfig::from_toml_str(
            "experiment = \"dynamics-sweep\"\nn_values = [60]\nmaster_seed = 2\ndelta_ratios = [1000.0]\n",
            "t",
        )
        .unwrap();
        assert!(matches!(dynamics_sweep(&cfg), Err(Error::Config(_))));
    }
}
