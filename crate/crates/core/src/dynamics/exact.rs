use super::{EpidemicParams, InfectionTrajectory};
use crate::error::{Error, Result};
use crate::graph::WeightedAdjacency;

pub const EXACT_MAX_NODES: usize = 12;

/// Exact expected infected fraction of the binary-state process.
///
/// Evolves the full distribution over the `2^N` configurations. Given a
/// configuration, nodes update independently, so each row of the transition
/// kernel is a product measure and is expanded in `O(2^N)`.
pub fn exact_markov_expectation(
    w: &WeightedAdjacency,
    params: &EpidemicParams,
    t_max: usize,
) -> Result<InfectionTrajectory> {
    let n = w.n();
    if n > EXACT_MAX_NODES {
        return Err(Error::TooLarge {
            n,
            limit: EXACT_MAX_NODES,
        });
    }
    params.check_against(w)?;
    let p0 = params.initial_probs(n)?;
    let size = 1usize << n;

    let mut dist = vec![1.0; 1];
    for &p in &p0 {
        expand(&mut dist, p);
    }

    let expected = |dist: &[f64]| -> f64 {
        if n == 0 {
            return 0.0;
        }
        dist.iter()
            .enumerate()
            .map(|(s, m)| m * s.count_ones() as f64)
            .sum::<f64>()
            / n as f64
    };

    let mut eta = vec![expected(&dist)];
    let mut next = vec![0.0; size];
    let mut row = Vec::with_capacity(size);
    let mut q = vec![0.0; n];
    for _ in 0..t_max {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (s, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (i, qi) in q.iter_mut().enumerate() {
                let escape: f64 = w
                    .neighbors(i)
                    .iter()
                    .filter(|&&(j, _)| s >> j & 1 == 1)
                    .map(|&(_, a)| 1.0 - params.beta * a)
                    .product();
                *qi = if s >> i & 1 == 1 {
                    1.0 - params.delta * escape
                } else {
                    1.0 - escape
                };
            }
            row.clear();
            row.push(mass);
            for &qi in &q {
                expand(&mut row, qi);
            }
            for (acc, v) in next.iter_mut().zip(&row) {
                *acc += v;
            }
        }
        std::mem::swap(&mut dist, &mut next);
        eta.push(expected(&dist));
    }
    Ok(InfectionTrajectory::from_series(eta, None, false))
}

/// Appends one independent bit with `P(1) = p` as the new highest bit.
fn expand(dist: &mut Vec<f64>, p: f64) {
    let len = dist.len();
    dist.extend_from_within(..);
    for k in 0..len {
        dist[k + len] *= p;
        dist[k] *= 1.0 - p;
    }
}
