//! SIS infection dynamics on (weighted) networks.

mod direct;
mod exact;
mod kw;
mod mnlds;

pub use direct::{direct_sim_step, run_direct_sim, BinaryState};
pub use exact::{exact_markov_expectation, EXACT_MAX_NODES};
pub use kw::{kw_solution, kw_steady_state};
pub use mnlds::{mnlds_step, run_mnlds, DEFAULT_CONV_TOL, DEFAULT_T_MAX};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedAdjacency;

/// Initial infection probability, shared by all nodes or given per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialInfection {
    Uniform(f64),
    PerNode(Vec<f64>),
}

impl Default for InitialInfection {
    fn default() -> Self {
        InitialInfection::Uniform(0.5)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpidemicParams {
    /// Infection probability per contact per step.
    pub beta: f64,
    /// Curing probability per step.
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub initial_infection: InitialInfection,
}

impl EpidemicParams {
    pub fn new(beta: f64, delta: f64, p0: f64) -> Result<Self> {
        let p = Self {
            beta,
            delta,
            initial_infection: InitialInfection::Uniform(p0),
        };
        p.validate()?;
        Ok(p)
    }

    /// Ratio `beta / delta`.
    pub fn tau(&self) -> f64 {
        self.beta / self.delta
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::invalid(format!(
                "beta must lie in [0, 1], got {}",
                self.beta
            )));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::invalid(format!(
                "delta must lie in [0, 1], got {}",
                self.delta
            )));
        }
        let bad = match &self.initial_infection {
            InitialInfection::Uniform(p) => !(0.0..=1.0).contains(p),
            InitialInfection::PerNode(ps) => ps.iter().any(|p| !(0.0..=1.0).contains(p)),
        };
        if bad {
            return Err(Error::invalid(
                "initial infection probabilities must lie in [0, 1]",
            ));
        }
        Ok(())
    }

    pub fn initial_probs(&self, n: usize) -> Result<Vec<f64>> {
        self.validate()?;
        match &self.initial_infection {
            InitialInfection::Uniform(p) => Ok(vec![*p; n]),
            InitialInfection::PerNode(ps) if ps.len() == n => Ok(ps.clone()),
            InitialInfection::PerNode(ps) => Err(Error::invalid(format!(
                "{} initial probabilities for {n} nodes",
                ps.len()
            ))),
        }
    }

    /// Rejects `beta * A_ij > 1`, which would make a non-infection factor
    /// negative.
    pub(crate) fn check_against(&self, w: &WeightedAdjacency) -> Result<()> {
        self.validate()?;
        let worst = self.beta * w.max_weight();
        if worst > 1.0 {
            return Err(Error::invalid(format!(
                "beta * max weight = {worst} exceeds 1"
            )));
        }
        Ok(())
    }
}

/// Time series of the infected fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct InfectionTrajectory {
    /// Sample times; integer steps for the discrete models.
    pub times: Vec<f64>,
    pub eta: Vec<f64>,
    /// Run-to-run spread, for Monte Carlo trajectories.
    pub eta_std: Option<Vec<f64>>,
    /// Per-node infection probabilities at termination (mNLDS only).
    pub node_probs: Option<Vec<f64>>,
    pub steps: usize,
    pub converged: bool,
    pub eta_final: f64,
}

impl InfectionTrajectory {
    pub(crate) fn from_series(eta: Vec<f64>, eta_std: Option<Vec<f64>>, converged: bool) -> Self {
        let steps = eta.len().saturating_sub(1);
        let eta_final = eta.last().copied().unwrap_or(f64::NAN);
        Self {
            times: (0..eta.len()).map(|t| t as f64).collect(),
            eta,
            eta_std,
            node_probs: None,
            steps,
            converged,
            eta_final,
        }
    }

    pub fn eta0(&self) -> f64 {
        self.eta.first().copied().unwrap_or(f64::NAN)
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}
