//! Epidemic spreading on classical and photonic quantum networks.
//!
//! - [`graph`]: Erdős–Rényi and Waxman topologies, photonic link weights,
//!   degree statistics and the plain-text graph format.
//! - [`spectral`]: KW, MFA and spectral (AM / pAM) thresholds, ensembles.
//! - [`fit`]: `c / N` and log-log scaling fits.
//! - [`dynamics`]: mean-degree ODE, mNLDS recursion, binary-state Monte
//!   Carlo and an exact Markov-chain oracle for tiny graphs.
//! - [`harness`]: config-driven experiment pipelines writing CSV reports.

pub mod dynamics;
pub mod error;
pub mod fit;
pub mod graph;
pub mod harness;
pub mod seed;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
