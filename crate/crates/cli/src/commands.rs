use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use qnet_epidemic::dynamics::{
    exact_markov_expectation, kw_solution, run_direct_sim, run_mnlds, EpidemicParams,
    InfectionTrajectory,
};
use qnet_epidemic::graph::{
    apply_quantum_weights, degree_stats, generate_er, generate_waxman, load_graph, save_graph,
    AdjacencyKind, GeoParams, PhotonicParams, Point, WeightedAdjacency,
};
use qnet_epidemic::harness::{run_experiment, ExperimentConfig};
use qnet_epidemic::spectral::{
    default_max_iter, ensemble_threshold, largest_eigenvalue, tau_kw, tau_mfa, tau_spectral,
    Method, DEFAULT_TOL,
};

use crate::args::{
    EstimatorArg, ExperimentArgs, GenerateArgs, GeneratorArgs, Model, SimMethod, SimulateArgs,
    ThresholdArgs, ValidateArgs,
};
use crate::Failure;

type CmdResult = Result<(), Failure>;

fn geo(gen: &GeneratorArgs, n: usize) -> GeoParams {
    GeoParams {
        r_max: gen.r_max,
        alpha_l: gen.alpha_l,
        beta_l: gen.beta_l,
        n_nodes: n,
    }
}

fn photonic(gen: &GeneratorArgs) -> PhotonicParams {
    PhotonicParams {
        gamma: gen.gamma,
        n_photons: gen.n_photons,
    }
}

fn build(gen: &GeneratorArgs) -> Result<(WeightedAdjacency, Vec<Point>), Failure> {
    let model = gen
        .model
        .ok_or_else(|| Failure::usage("either --graph or --model is required"))?;
    let n = gen
        .n
        .ok_or_else(|| Failure::usage("--n is required with --model"))?;
    match model {
        Model::Er => {
            let p = gen
                .p
                .ok_or_else(|| Failure::usage("--p is required for --model er"))?;
            let (pos, w) = generate_er(n, p, gen.seed)?.into_parts();
            Ok((w, pos))
        }
        Model::Waxman => {
            let (pos, w) = generate_waxman(&geo(gen, n), gen.seed)?.into_parts();
            Ok((w, pos))
        }
        Model::QuantumWaxman => {
            let g = generate_waxman(&geo(gen, n), gen.seed)?;
            let w = apply_quantum_weights(&g, &photonic(gen))?;
            Ok((w, g.positions().to_vec()))
        }
        Model::Path => {
            if n == 0 {
                return Err(Failure::usage("--n must be >= 1"));
            }
            let w = WeightedAdjacency::from_edges(
                n,
                AdjacencyKind::Binary,
                (1..n).map(|i| (i - 1, i, 1.0)),
            )?;
            let pos = (0..n)
                .map(|i| Point {
                    x: i as f64,
                    y: 0.0,
                })
                .collect();
            Ok((w, pos))
        }
    }
}

fn source(graph: &Option<PathBuf>, gen: &GeneratorArgs) -> Result<WeightedAdjacency, Failure> {
    match graph {
        Some(path) => Ok(load_graph(path)?.0),
        None => Ok(build(gen)?.0),
    }
}

fn prepare(path: &Path) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(())
}

pub fn generate(a: GenerateArgs) -> CmdResult {
    let (w, pos) = build(&a.gen)?;
    let path = a.output.unwrap_or_else(|| a.output_dir.join("graph.txt"));
    prepare(&path)?;
    save_graph(&w, &pos, &path)?;
    println!("nodes = {}", w.n());
    println!("edges = {}", w.n_edges());
    println!("kind = {}", w.kind());
    println!("mean_degree = {:?}", degree_stats(&w).mean_degree);
    println!("file = {}", path.display());
    Ok(())
}

pub fn threshold(a: ThresholdArgs) -> CmdResult {
    if let Some(n_outer) = a.ensemble {
        return threshold_ensemble(&a, n_outer);
    }
    let w = source(&a.graph, &a.gen)?;
    let stats = degree_stats(&w);
    let spectral_ok = |want: AdjacencyKind| -> CmdResult {
        let weighted = w.kind() == AdjacencyKind::ProbabilityWeighted;
        if weighted != (want == AdjacencyKind::ProbabilityWeighted) {
            let hint = if weighted { "pam" } else { "am" };
            return Err(Failure::usage(format!(
                "graph kind is {}; use --estimator {hint}",
                w.kind()
            )));
        }
        Ok(())
    };
    let mut out = Vec::new();
    match a.estimator {
        EstimatorArg::Kw => out.push(tau_kw(&stats)?),
        EstimatorArg::Mfa => out.push(tau_mfa(&stats)?),
        EstimatorArg::Am => {
            spectral_ok(AdjacencyKind::Binary)?;
            out.push(tau_spectral(&w)?);
        }
        EstimatorArg::Pam => {
            spectral_ok(AdjacencyKind::ProbabilityWeighted)?;
            out.push(tau_spectral(&w)?);
        }
        EstimatorArg::All => {
            out.push(tau_kw(&stats)?);
            out.push(tau_mfa(&stats)?);
            out.push(tau_spectral(&w)?);
        }
    }
    println!("nodes = {}", w.n());
    println!("mean_degree = {:?}", stats.mean_degree);
    for t in out {
        println!("tau_{} = {:?}", t.estimator, t.value);
    }
    Ok(())
}

fn threshold_ensemble(a: &ThresholdArgs, n_outer: usize) -> CmdResult {
    match a.gen.model {
        Some(Model::QuantumWaxman) => {}
        _ => return Err(Failure::usage("--ensemble needs --model quantum-waxman")),
    }
    if !matches!(
        a.estimator,
        EstimatorArg::All | EstimatorArg::Am | EstimatorArg::Pam
    ) {
        return Err(Failure::usage(
            "ensembles report the spectral threshold only",
        ));
    }
    let n = a
        .gen
        .n
        .ok_or_else(|| Failure::usage("--n is required with --model"))?;
    let method = Method::from_number(a.method).expect("clap restricts the range");
    let ens = ensemble_threshold(
        &geo(&a.gen, n),
        &photonic(&a.gen),
        method,
        n_outer,
        a.inner,
        a.gen.seed,
    )?;
    let path = a
        .output
        .clone()
        .unwrap_or_else(|| a.output_dir.join("ensemble.csv"));
    prepare(&path)?;
    let mut f = BufWriter::new(fs::File::create(&path)?);
    writeln!(f, "outer,inner,seed,tau")?;
    for s in &ens.samples {
        writeln!(
            f,
            "{},{},{},{}",
            s.outer,
            s.inner.map(|i| i.to_string()).unwrap_or_default(),
            s.seed,
            s.tau.map(|t| format!("{t:?}")).unwrap_or_default()
        )?;
    }
    f.flush()?;
    let e = ens.estimate;
    println!("method = {method}");
    println!("estimator = {}", e.estimator);
    println!("mean_tau = {:?}", e.ensemble_mean);
    println!("std_tau = {:?}", e.ensemble_std);
    println!("std_err = {:?}", e.std_err());
    println!("tau_times_n = {:?}", e.ensemble_mean * n as f64);
    println!("n_instances = {}", e.n_instances);
    println!("n_excluded = {}", e.n_excluded);
    println!("file = {}", path.display());
    Ok(())
}

pub fn simulate(a: SimulateArgs) -> CmdResult {
    let w = source(&a.graph, &a.gen)?;
    let delta = match (a.delta, a.delta_ratio) {
        (Some(d), None) => d,
        (None, Some(ratio)) => {
            let lambda = largest_eigenvalue(&w, DEFAULT_TOL, default_max_iter(&w))?.lambda_1;
            let delta_c = a.beta * lambda;
            println!("delta_c = {delta_c:?}");
            ratio * delta_c
        }
        _ => {
            return Err(Failure::usage(
                "exactly one of --delta or --delta-ratio is required",
            ))
        }
    };
    let params = EpidemicParams::new(a.beta, delta, a.p0)?;
    let (label, tr): (&str, InfectionTrajectory) = match a.method {
        SimMethod::Mnlds => ("mnlds", run_mnlds(&w, &params, a.t_max, a.conv_tol)?),
        SimMethod::Direct => (
            "direct",
            run_direct_sim(&w, &params, a.t_max, a.runs, a.sim_seed)?,
        ),
        SimMethod::Exact => ("exact", exact_markov_expectation(&w, &params, a.t_max)?),
        SimMethod::Kw => {
            let grid: Vec<f64> = (0..=a.t_max).map(|t| t as f64).collect();
            (
                "kw",
                kw_solution(&params, degree_stats(&w).mean_degree, a.p0, &grid)?,
            )
        }
    };
    let path = a
        .output
        .unwrap_or_else(|| a.output_dir.join("trajectory.csv"));
    prepare(&path)?;
    let mut f = BufWriter::new(fs::File::create(&path)?);
    writeln!(f, "t,eta_mean,eta_std,method")?;
    for (i, (t, eta)) in tr.times.iter().zip(&tr.eta).enumerate() {
        let std = tr.eta_std.as_ref().map_or(0.0, |s| s[i]);
        writeln!(f, "{t:?},{eta:?},{std:?},{label}")?;
    }
    f.flush()?;
    println!("delta = {delta:?}");
    println!("eta0 = {:?}", tr.eta0());
    println!("eta_final = {:?}", tr.eta_final);
    println!("steps = {}", tr.steps);
    println!("converged = {}", tr.converged);
    println!("file = {}", path.display());
    Ok(())
}

fn config_path(p: &Path) -> PathBuf {
    if !p.exists() && p.extension().is_none() {
        p.with_extension("toml")
    } else {
        p.to_path_buf()
    }
}

fn load_config(p: &Path) -> Result<ExperimentConfig, Failure> {
    let path = config_path(p);
    let text = fs::read_to_string(&path).map_err(|e| Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
    })?;
    Ok(ExperimentConfig::from_toml_str(
        &text,
        &path.display().to_string(),
    )?)
}

pub fn experiment(a: ExperimentArgs) -> CmdResult {
    let mut cfg = load_config(&a.config)?;
    if let Some(w) = a.workers {
        if w == 0 {
            return Err(Failure::usage("--workers must be >= 1"));
        }
        cfg.workers = Some(w);
    }
    let fallback = a.output_dir.join(cfg.experiment.name());
    let report = run_experiment(&cfg, &fallback)?;
    print!("{}", report.render());
    println!("\n[files]");
    for f in &report.files {
        println!("{}", f.display());
    }
    Ok(())
}

pub fn validate_config(a: ValidateArgs) -> CmdResult {
    for p in &a.configs {
        let cfg = load_config(p)?;
        println!("ok {} ({})", config_path(p).display(), cfg.experiment);
    }
    Ok(())
}
