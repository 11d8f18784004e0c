use super::{EpidemicParams, InfectionTrajectory};
use crate::error::{Error, Result};

/// Fixed point `max(0, 1 - delta / (beta <k>))` of the mean-degree model.
pub fn kw_steady_state(beta: f64, delta: f64, mean_degree: f64) -> f64 {
    let growth = beta * mean_degree;
    if growth <= 0.0 {
        return 0.0;
    }
    (1.0 - delta / growth).max(0.0)
}

/// Closed-form solution of `d eta/dt = beta <k> eta (1 - eta) - delta eta`.
///
/// With `r = beta <k> - delta` the logistic solution
/// `eta0 eta_inf / (eta0 + (eta_inf - eta0) e^{-rt})` is rewritten as
/// `eta0 / (e^{-rt} + beta <k> eta0 (1 - e^{-rt}) / r)`, which stays finite
/// at `r = 0` and below threshold where `eta_inf` is clamped to zero.
pub fn kw_solution(
    params: &EpidemicParams,
    mean_degree: f64,
    eta0: f64,
    t_grid: &[f64],
) -> Result<InfectionTrajectory> {
    params.validate()?;
    if !(mean_degree > 0.0 && mean_degree.is_finite()) {
        return Err(Error::invalid(format!(
            "mean degree must be > 0, got {mean_degree}"
        )));
    }
    if !(0.0..=1.0).contains(&eta0) {
        return Err(Error::invalid(format!(
            "eta0 must lie in [0, 1], got {eta0}"
        )));
    }
    if t_grid.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::invalid("time grid must be finite and nonnegative"));
    }
    let growth = params.beta * mean_degree;
    let r = growth - params.delta;
    let eta: Vec<f64> = t_grid
        .iter()
        .map(|&t| {
            if eta0 == 0.0 {
                return 0.0;
            }
            let decay = (-r * t).exp();
            // (1 - e^{-rt}) / r, with its t-limit at r -> 0
            let ramp = if (r * t).abs() < 1e-12 {
                t
            } else {
                -(-r * t).exp_m1() / r
            };
            let v = eta0 / (decay + growth * eta0 * ramp);
            if v.is_finite() {
                v.clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    let eta_final = eta.last().copied().unwrap_or(eta0);
    Ok(InfectionTrajectory {
        times: t_grid.to_vec(),
        steps: eta.len(),
        eta,
        eta_std: None,
        node_probs: None,
        converged: true,
        eta_final,
    })
}
