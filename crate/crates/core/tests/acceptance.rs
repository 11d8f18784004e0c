use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;

use qnet_epidemic::dynamics::{
    exact_markov_expectation, kw_solution, run_direct_sim, EpidemicParams,
};
use qnet_epidemic::graph::{degree_stats, AdjacencyKind, WeightedAdjacency};
use qnet_epidemic::harness::{
    run_experiment, ExperimentConfig, ExperimentReport, Network, Outcome,
};
use qnet_epidemic::seed::rng_from_seed;
use qnet_epidemic::spectral::{
    default_max_iter, largest_eigenvalue, tau_kw, tau_mfa, tau_spectral, Estimator, Method,
    DEFAULT_TOL,
};

struct Verdict {
    pass: bool,
    summary: String,
}

impl Verdict {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Self {
            pass,
            summary: summary.into(),
        }
    }
}

fn config(name: &str) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(format!("{name}.toml"));
    ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn run(mut cfg: ExperimentConfig, dir: &Path) -> ExperimentReport {
    cfg.output_dir = Some(dir.to_path_buf());
    run_experiment(&cfg, dir).unwrap_or_else(|e| panic!("{} failed: {e}", cfg.experiment))
}

fn scaling_constants(tmp: &Path) -> Verdict {
    let targets = [
        ("fig2cd_classical", Network::Classical, 30.51),
        ("fig2cd_quantum", Network::Quantum, 160.24),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, net, target) in targets {
        let report = run(config(name), &tmp.join(name));
        let Outcome::ThresholdScaling(out) = &report.outcome else {
            unreachable!()
        };
        let kw = out.fit(net, Estimator::Kw).expect("KW fit").c;
        let spectral = out
            .fit(net, net.spectral_estimator())
            .expect("spectral fit")
            .c;
        let dev = (kw - target).abs() / target;
        pass &= dev <= 0.10;
        println!(
            "    {:<9} c_KW = {kw:.3} (target {target}, off {:.1}%), c_{} = {spectral:.3}",
            net.label(),
            100.0 * dev,
            net.spectral_estimator()
        );
        parts.push(format!("{} c = {kw:.2}", net.label()));
    }
    Verdict::new(pass, parts.join(", "))
}

fn loglog_slopes(tmp: &Path) -> Verdict {
    let report = run(config("fig2e_loglog"), &tmp.join("loglog"));
    let Outcome::LoglogAsymptote(out) = &report.outcome else {
        unreachable!()
    };
    for row in &out.rows {
        println!(
            "    N = {:>5} {:<9} <k> = {:>8.3} tau<k> - 1 = {:+.4}",
            row.n,
            row.network.label(),
            row.mean_degree,
            row.tau_times_k() - 1.0
        );
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for net in [Network::Classical, Network::Quantum] {
        let slope = out.slope(net).expect("log-log fit");
        pass &= (slope + 1.0).abs() <= 0.1;
        parts.push(format!("{} slope = {slope:.4}", net.label()));
    }
    Verdict::new(pass, parts.join(", "))
}

fn method_comparison(tmp: &Path) -> Verdict {
    let cfg = config("figA1_methods");
    let ns = cfg.n_values.clone();
    let report = run(cfg, &tmp.join("methods"));
    let Outcome::MethodCompare(out) = &report.outcome else {
        unreachable!()
    };
    let mut agree = true;
    let mut m1_off = false;
    for n in ns {
        let [m1, m2, m3] = [Method::Annealed, Method::Quenched, Method::FullySampled]
            .map(|m| out.get(n, m).expect("method row"));
        let band23 = m2.ensemble_std.hypot(m3.ensemble_std);
        let band12 = m1.ensemble_std.hypot(m2.ensemble_std);
        let d23 = (m2.ensemble_mean - m3.ensemble_mean).abs();
        let d12 = (m1.ensemble_mean - m2.ensemble_mean).abs();
        agree &= d23 <= band23;
        m1_off |= d12 > band12;
        println!(
            "    N = {n:>3} M1 {:.5} M2 {:.5} M3 {:.5} |M2-M3| {d23:.5} <= {band23:.5}? |M1-M2| {d12:.5} > {band12:.5}?",
            m1.ensemble_mean, m2.ensemble_mean, m3.ensemble_mean
        );
    }
    Verdict::new(
        agree && m1_off,
        format!("M2~M3 at every N: {agree}; M1 outside band at some N: {m1_off}"),
    )
}

fn dynamics_phases(tmp: &Path) -> Verdict {
    let report = run(config("fig3_dynamics"), &tmp.join("dynamics"));
    let Outcome::DynamicsSweep(out) = &report.outcome else {
        unreachable!()
    };
    println!(
        "    N = {} lambda_1 = {:.5} delta_c = {:.5}",
        out.n, out.lambda_1, out.delta_c
    );
    let mut pass = true;
    let mut seen = BTreeSet::new();
    for r in &out.runs {
        let m = r.mnlds.eta_final;
        let d = r.direct_steady;
        let ratio = r.delta_ratio;
        let mut ok = true;
        if ratio == 0.1 {
            ok &= m > 0.5;
        }
        if ratio == 0.5 {
            ok &= m < 0.5 && m > 0.05;
        }
        if ratio == 1.0 {
            ok &= m < 0.01 && r.mnlds.steps <= 10_000;
            ok &= (d - m).abs() <= 0.02;
        }
        if ratio <= 0.3 {
            ok &= (d - m).abs() <= 0.05;
        }
        seen.insert(format!("{ratio}"));
        pass &= ok;
        println!(
            "    delta/delta_c = {ratio:<4} mNLDS {m:.5} ({} steps) direct {d:.5} {}",
            r.mnlds.steps,
            if ok { "ok" } else { "VIOLATED" }
        );
    }
    for needed in ["0.1", "0.3", "0.5", "1"] {
        pass &= seen.contains(needed);
    }
    Verdict::new(pass, format!("delta_c = {:.5}", out.delta_c))
}

/// Cyclic Jacobi rotations; returns all eigenvalues of a symmetric matrix.
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let (head, tail) = a.split_at_mut(q);
                for (apk, aqk) in head[p].iter_mut().zip(tail[0].iter_mut()) {
                    let (x, y) = (*apk, *aqk);
                    *apk = c * x - s * y;
                    *aqk = s * x + c * y;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

fn eigen_oracle() -> (bool, String) {
    let mut rng = rng_from_seed(20_240_917);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let n = rng.random_range(1..=50usize);
        let density: f64 = rng.random_range(0.02..=1.0);
        let binary = case % 4 == 0;
        let mut triples = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < density {
                    let v = if binary {
                        1.0
                    } else {
                        rng.random_range(1e-3..=1.0)
                    };
                    triples.push((i, j, v));
                }
            }
        }
        let kind = if binary {
            AdjacencyKind::Binary
        } else {
            AdjacencyKind::ProbabilityWeighted
        };
        let w = WeightedAdjacency::from_edges(n, kind, triples).unwrap();
        let got = largest_eigenvalue(&w, DEFAULT_TOL, default_max_iter(&w))
            .unwrap()
            .lambda_1;
        let exact = jacobi_eigenvalues(w.to_dense())
            .into_iter()
            .fold(0.0, f64::max);
        let err = if exact == 0.0 {
            got.abs()
        } else {
            (got - exact).abs() / exact
        };
        worst = worst.max(err);
    }
    (worst <= 1e-8, format!("eigen max rel err {worst:.2e}"))
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &(a, b) in edges {
            let v = if a == u {
                b
            } else if b == u {
                a
            } else {
                continue;
            };
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Connected graphs on `n` nodes: (labeled count, one representative per
/// isomorphism class).
fn connected_graphs(n: usize) -> (usize, Vec<Vec<(usize, usize)>>) {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let perms = permutations(n);
    let mut labeled = 0;
    let mut classes = BTreeSet::new();
    let mut reps = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<_> = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        if !connected(n, &edges) {
            continue;
        }
        labeled += 1;
        let canonical = perms
            .iter()
            .map(|p| {
                let mut e: Vec<_> = edges
                    .iter()
                    .map(|&(a, b)| (p[a].min(p[b]), p[a].max(p[b])))
                    .collect();
                e.sort_unstable();
                e
            })
            .min()
            .unwrap();
        if classes.insert(canonical) {
            reps.push(edges);
        }
    }
    (labeled, reps)
}

fn markov_oracle() -> (bool, String) {
    const RUNS: usize = 100_000;
    const T: usize = 4;
    let params = EpidemicParams::new(0.4, 0.3, 0.5).unwrap();
    let mut graphs = Vec::new();
    let mut labeled = Vec::new();
    for n in 1..=4 {
        let (count, reps) = connected_graphs(n);
        labeled.push(count);
        graphs.extend(reps.into_iter().map(|e| (n, e)));
    }
    let classes = graphs.len();
    graphs.push((10, (0..9).map(|i| (i, i + 1)).collect()));
    let mut worst: f64 = 0.0;
    for (k, (n, edges)) in graphs.iter().enumerate() {
        let w = WeightedAdjacency::from_edges(
            *n,
            AdjacencyKind::Binary,
            edges.iter().map(|&(a, b)| (a, b, 1.0)),
        )
        .unwrap();
        let exact = exact_markov_expectation(&w, &params, T).unwrap().eta[T];
        let mc = run_direct_sim(&w, &params, T, RUNS, 500 + k as u64).unwrap();
        let se = mc.eta_std.as_ref().unwrap()[T] / (RUNS as f64).sqrt();
        let z = (mc.eta[T] - exact).abs() / se;
        worst = worst.max(z);
    }
    let pass = labeled == [1, 1, 4, 38] && worst <= 3.0;
    (
        pass,
        format!("markov: labeled {labeled:?}, {classes} classes + path10, max |z| {worst:.2}"),
    )
}

fn rk4(g: f64, delta: f64, eta0: f64, t_end: f64, h: f64) -> Vec<f64> {
    let f = |y: f64| g * y * (1.0 - y) - delta * y;
    let steps = (t_end / h).round() as usize;
    let mut y = eta0;
    let mut out = vec![y];
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f(y + 0.5 * h * k1);
        let k3 = f(y + 0.5 * h * k2);
        let k4 = f(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(y);
    }
    out
}

fn kw_oracle() -> (bool, String) {
    let mean_degree = 10.0;
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for beta in [0.005, 0.02, 0.08] {
        for delta in [0.0, 0.1, 0.4] {
            for eta0 in [0.01, 0.5, 0.99] {
                let params = EpidemicParams::new(beta, delta, eta0).unwrap();
                let grid: Vec<f64> = (0..=200).map(|t| t as f64 * 0.5).collect();
                let closed = kw_solution(&params, mean_degree, eta0, &grid).unwrap();
                let rk = rk4(beta * mean_degree, delta, eta0, 100.0, 0.005);
                for (i, v) in closed.eta.iter().enumerate() {
                    worst = worst.max((v - rk[i * 100]).abs());
                }
                points += 1;
            }
        }
    }
    (
        points == 27 && worst <= 1e-6,
        format!("KW vs RK4 sup {worst:.2e} over {points} points"),
    )
}

fn regular_identity() -> (bool, String) {
    let mut worst_ulps: f64 = 0.0;
    let mut graphs = 0;
    for half in 1..=6usize {
        for extra in [0usize, 1, 5, 17, 60] {
            let k = 2 * half;
            let n = k + 1 + extra;
            let w = WeightedAdjacency::from_edges(
                n,
                AdjacencyKind::Binary,
                (0..n).flat_map(|i| (1..=half).map(move |s| (i, (i + s) % n, 1.0))),
            )
            .unwrap();
            let stats = degree_stats(&w);
            let exact = 1.0 / k as f64;
            for tau in [
                tau_kw(&stats).unwrap().value,
                tau_mfa(&stats).unwrap().value,
                tau_spectral(&w).unwrap().value,
            ] {
                worst_ulps = worst_ulps.max((tau - exact).abs() / (f64::EPSILON * exact));
            }
            graphs += 1;
        }
    }
    (
        worst_ulps <= 4.0,
        format!("regular identity max {worst_ulps:.1} eps over {graphs} graphs"),
    )
}

fn oracles() -> Verdict {
    let checks = [
        eigen_oracle(),
        markov_oracle(),
        kw_oracle(),
        regular_identity(),
    ];
    for (label, (pass, msg)) in ["i", "ii", "iii", "iv"].iter().zip(&checks) {
        println!(
            "    ({label}) {} {msg}",
            if *pass { "ok" } else { "VIOLATED" }
        );
    }
    Verdict::new(
        checks.iter().all(|c| c.0),
        format!("{} of 4 suites hold", checks.iter().filter(|c| c.0).count()),
    )
}

fn photon_sweep(tmp: &Path) -> Verdict {
    let cfg = config("figA2_photon_sweep");
    let n = cfg.n_values[0];
    let r_max = cfg.geo.r_max;
    let photons = cfg.sweep.n_photons.clone();
    let gammas = cfg.sweep.gammas.clone();
    let report = run(cfg, &tmp.join("photons"));
    let Outcome::Sweep(out) = &report.outcome else {
        unreachable!()
    };
    let classical = out
        .classical(n, r_max)
        .expect("classical row")
        .ensemble_mean;
    let q = |g: f64, np: u64| out.quantum(n, r_max, g, np).expect("quantum row");
    let mut monotone = true;
    for &g in &gammas {
        let means: Vec<f64> = photons.iter().map(|&np| q(g, np).ensemble_mean).collect();
        monotone &= means.windows(2).all(|w| w[1] <= w[0]);
        let line: Vec<String> = means.iter().map(|m| format!("{m:.5}")).collect();
        println!("    gamma {g:<4} tau: {}", line.join(" "));
    }
    println!("    classical tau: {classical:.5}");
    let (lo, hi) = (0.1, 0.2);
    let mut close = true;
    for &np in &photons {
        let (a, b) = (q(lo, np), q(hi, np));
        let band = 2.0 * a.std_err().hypot(b.std_err());
        close &= (a.ensemble_mean - b.ensemble_mean).abs() < band;
    }
    let top = *photons.last().unwrap();
    let mut saturated = true;
    for &g in &gammas {
        let ratio = q(g, top).ensemble_mean / classical;
        saturated &= (ratio - 1.0).abs() <= 0.02;
        println!("    gamma {g:<4} n_p = {top}: tau / tau_classical = {ratio:.4}");
    }
    Verdict::new(
        monotone && close && saturated,
        format!("monotone {monotone}; gamma curves within 2 SE {close}; saturated {saturated}"),
    )
}

const SMALL_CONFIGS: [&str; 7] = [
    r#"experiment = "degree-dist"
n_values = [60, 90]
ensemble_size = 4
master_seed = 3"#,
    r#"experiment = "threshold-scaling"
n_values = [60, 90, 120]
ensemble_size = 5
master_seed = 3"#,
    r#"experiment = "loglog-asymptote"
n_values = [60, 90, 120]
ensemble_size = 4
master_seed = 3"#,
    r#"experiment = "dynamics-sweep"
n_values = [80]
delta_ratios = [0.2, 1.0]
master_seed = 3
[dynamics]
t_max = 300
direct_runs = 6
direct_t_max = 60"#,
    r#"experiment = "method-compare"
n_values = [40, 60]
ensemble_size = 5
inner_samples = 4
master_seed = 3"#,
    r#"experiment = "photon-sweep"
n_values = [50]
ensemble_size = 6
master_seed = 3
[sweep]
n_photons = [1, 100, 10000]
gammas = [0.1, 0.2]"#,
    r#"experiment = "radius-sweep"
n_values = [50]
ensemble_size = 6
master_seed = 3
[sweep]
r_max_values = [200.0, 800.0]
gammas = [0.2]"#,
];

fn csv_bytes(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p.file_name().unwrap().into(), bytes)
        })
        .collect()
}

fn determinism(tmp: &Path) -> Verdict {
    let mut pass = true;
    let mut kinds = 0;
    for (k, text) in SMALL_CONFIGS.iter().enumerate() {
        let base = ExperimentConfig::from_toml_str(text, "inline").unwrap();
        let mut outputs = Vec::new();
        for (rep, workers) in [1, 3, 3].into_iter().enumerate() {
            let mut cfg = base.clone();
            cfg.workers = Some(workers);
            let dir = tmp.join(format!("det{k}_{rep}"));
            run(cfg, &dir);
            outputs.push(csv_bytes(&dir));
        }
        let same = !outputs[0].is_empty() && outputs.windows(2).all(|w| w[0] == w[1]);
        println!(
            "    {:<17} {} CSV files, identical across runs and pools: {same}",
            base.experiment,
            outputs[0].len()
        );
        pass &= same;
        kinds += 1;
    }
    Verdict::new(pass, format!("{kinds} experiment kinds"))
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temp dir");
    let tmp = tmp.path();
    let criteria: [(&str, Box<dyn Fn() -> Verdict>); 7] = [
        ("1 scaling constants", Box::new(|| scaling_constants(tmp))),
        ("2 log-log asymptote", Box::new(|| loglog_slopes(tmp))),
        ("3 method comparison", Box::new(|| method_comparison(tmp))),
        ("4 dynamics phases", Box::new(|| dynamics_phases(tmp))),
        ("5 oracle equivalences", Box::new(oracles)),
        ("6 photon sweep", Box::new(|| photon_sweep(tmp))),
        ("7 determinism", Box::new(|| determinism(tmp))),
    ];
    let mut failures = 0;
    for (name, check) in &criteria {
        println!("[{name}]");
        let start = Instant::now();
        let v = check();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "{status} {name}: {} ({:.1} s)",
            v.summary,
            start.elapsed().as_secs_f64()
        );
        failures += usize::from(!v.pass);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
