use rand::Rng as _;
use rayon::prelude::*;

use super::{EpidemicParams, InfectionTrajectory};
use crate::error::{Error, Result};
use crate::graph::WeightedAdjacency;
use crate::seed::{stream_rng, Rng, Stream};
use crate::stats::Summary;

/// Per-node infected flags `sigma_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryState(pub Vec<bool>);

impl BinaryState {
    pub fn healthy(n: usize) -> Self {
        Self(vec![false; n])
    }

    /// Independent Bernoulli draws with the given per-node probabilities.
    pub fn sample(probs: &[f64], rng: &mut Rng) -> Self {
        Self(probs.iter().map(|&p| rng.random::<f64>() < p).collect())
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn n_infected(&self) -> usize {
        self.0.iter().filter(|&&s| s).count()
    }

    pub fn infected_fraction(&self) -> f64 {
        if self.0.is_empty() {
            0.0
        } else {
            self.n_infected() as f64 / self.0.len() as f64
        }
    }
}

fn step_into(
    w: &WeightedAdjacency,
    state: &[bool],
    next: &mut [bool],
    beta: f64,
    delta: f64,
    rng: &mut Rng,
) {
    for (i, out) in next.iter_mut().enumerate() {
        let escape: f64 = w
            .neighbors(i)
            .iter()
            .filter(|&&(j, _)| state[j])
            .map(|&(_, a)| 1.0 - beta * a)
            .product();
        let infected = rng.random::<f64>() < 1.0 - escape;
        let cured = state[i] && rng.random::<f64>() < delta;
        *out = if state[i] {
            infected || !cured
        } else {
            infected
        };
    }
}

/// One stochastic step of the binary-state process.
///
/// Each node is infected by its neighbors with probability
/// `1 - prod_j (1 - beta A_ij sigma_j)`; an infected node is cured with
/// probability `delta`. An infected node turns healthy only if cured and not
/// reinfected in the same step.
pub fn direct_sim_step(
    w: &WeightedAdjacency,
    state: &BinaryState,
    params: &EpidemicParams,
    rng: &mut Rng,
) -> Result<BinaryState> {
    params.check_against(w)?;
    if state.n() != w.n() {
        return Err(Error::invalid(format!(
            "state has {} nodes, graph has {}",
            state.n(),
            w.n()
        )));
    }
    let mut next = vec![false; w.n()];
    step_into(w, &state.0, &mut next, params.beta, params.delta, rng);
    Ok(BinaryState(next))
}

fn single_run(
    w: &WeightedAdjacency,
    p0: &[f64],
    params: &EpidemicParams,
    t_max: usize,
    mut rng: Rng,
) -> Vec<f64> {
    let mut state = BinaryState::sample(p0, &mut rng).0;
    let mut next = vec![false; state.len()];
    let n = state.len().max(1) as f64;
    let mut eta = Vec::with_capacity(t_max + 1);
    let mut infected = state.iter().filter(|&&s| s).count();
    eta.push(infected as f64 / n);
    for _ in 0..t_max {
        if infected == 0 {
            // all-healthy is absorbing
            eta.push(0.0);
            continue;
        }
        step_into(w, &state, &mut next, params.beta, params.delta, &mut rng);
        std::mem::swap(&mut state, &mut next);
        infected = state.iter().filter(|&&s| s).count();
        eta.push(infected as f64 / n);
    }
    eta
}

/// Mean and spread of the infected fraction over `n_runs` independent runs.
///
/// Run `r` draws its initial state and all events from its own seed stream,
/// so the result does not depend on how runs are scheduled.
pub fn run_direct_sim(
    w: &WeightedAdjacency,
    params: &EpidemicParams,
    t_max: usize,
    n_runs: usize,
    master_seed: u64,
) -> Result<InfectionTrajectory> {
    params.check_against(w)?;
    if n_runs == 0 {
        return Err(Error::invalid("n_runs must be >= 1"));
    }
    let p0 = params.initial_probs(w.n())?;
    let runs: Vec<Vec<f64>> = (0..n_runs)
        .into_par_iter()
        .map(|r| {
            let rng = stream_rng(master_seed, r as u64, Stream::DirectSim);
            single_run(w, &p0, params, t_max, rng)
        })
        .collect();

    let mut eta = Vec::with_capacity(t_max + 1);
    let mut eta_std = Vec::with_capacity(t_max + 1);
    let mut column = vec![0.0; n_runs];
    for t in 0..=t_max {
        for (c, run) in column.iter_mut().zip(&runs) {
            *c = run[t];
        }
        let s = Summary::of(&column);
        eta.push(s.mean);
        eta_std.push(s.std);
    }
    let absorbed = runs.iter().all(|r| r[t_max] == 0.0);
    Ok(InfectionTrajectory::from_series(
        eta,
        Some(eta_std),
        absorbed,
    ))
}
