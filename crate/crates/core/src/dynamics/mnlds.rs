use super::{mean, EpidemicParams, InfectionTrajectory};
use crate::error::{Error, Result};
use crate::graph::WeightedAdjacency;

pub const DEFAULT_CONV_TOL: f64 = 1e-8;
pub const DEFAULT_T_MAX: usize = 10_000;

/// One synchronous update; reads only `prev`, writes only `next`.
fn step_into(w: &WeightedAdjacency, prev: &[f64], next: &mut [f64], beta: f64, delta: f64) {
    for (i, out) in next.iter_mut().enumerate() {
        let xi: f64 = w
            .neighbors(i)
            .iter()
            .map(|&(j, a)| 1.0 - beta * a * prev[j])
            .product();
        let p = prev[i];
        let v = 1.0 - (delta * p + (1.0 - p)) * xi;
        debug_assert!((-1e-12..=1.0 + 1e-12).contains(&v), "p = {v}");
        *out = v.clamp(0.0, 1.0);
    }
}

/// Per-node infection probabilities one step after `p_prev`.
///
/// `xi_i = prod_j (1 - beta A_ij p_j)` is the chance node `i` escapes every
/// neighbor; the node is healthy next step if it escapes and was either
/// healthy or got cured.
pub fn mnlds_step(
    w: &WeightedAdjacency,
    p_prev: &[f64],
    params: &EpidemicParams,
) -> Result<Vec<f64>> {
    params.check_against(w)?;
    if p_prev.len() != w.n() {
        return Err(Error::invalid(format!(
            "{} probabilities for {} nodes",
            p_prev.len(),
            w.n()
        )));
    }
    if p_prev.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::invalid("probabilities must lie in [0, 1]"));
    }
    let mut next = vec![0.0; w.n()];
    step_into(w, p_prev, &mut next, params.beta, params.delta);
    Ok(next)
}

/// Iterates [`mnlds_step`] from the initial probabilities until the largest
/// per-node change drops below `conv_tol` or `t_max` steps have run.
pub fn run_mnlds(
    w: &WeightedAdjacency,
    params: &EpidemicParams,
    t_max: usize,
    conv_tol: f64,
) -> Result<InfectionTrajectory> {
    params.check_against(w)?;
    if t_max == 0 {
        return Err(Error::invalid("t_max must be >= 1"));
    }
    let mut prev = params.initial_probs(w.n())?;
    let mut next = vec![0.0; w.n()];
    let mut eta = vec![mean(&prev)];
    let mut converged = false;
    for _ in 0..t_max {
        step_into(w, &prev, &mut next, params.beta, params.delta);
        let change = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut prev, &mut next);
        eta.push(mean(&prev));
        if change < conv_tol {
            converged = true;
            break;
        }
    }
    let mut tr = InfectionTrajectory::from_series(eta, None, converged);
    tr.node_probs = Some(prev);
    Ok(tr)
}
