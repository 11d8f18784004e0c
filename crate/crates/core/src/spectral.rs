//! Epidemic thresholds: degree-based (KW, MFA) and spectral (AM, pAM), plus
//! ensemble estimates under the three link-disorder regimes.

use std::fmt;

use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{
    apply_quantum_weights, expected_adjacency, sample_link_realization_with, sample_positions,
    waxman_with_rng, AdjacencyKind, DegreeStats, GeoParams, PhotonicParams, WeightedAdjacency,
};
use crate::seed::{derive_seed, rng_from_seed, stream_rng, Stream};
use crate::stats::Summary;

pub const DEFAULT_TOL: f64 = 1e-10;

/// `100 N` iterations, raised for small sparse matrices to a fixed work
/// budget of about `1e8` multiply-adds: near-degenerate leading eigenvalues
/// can need `1e5` cheap iterations.
pub fn default_max_iter(w: &WeightedAdjacency) -> usize {
    const WORK_BUDGET: usize = 100_000_000;
    let per_iter = w.n() + 2 * w.n_edges();
    (100 * w.n()).max(WORK_BUDGET / per_iter.max(1)).max(1000)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    Kw,
    Mfa,
    Am,
    Pam,
}

impl Estimator {
    pub fn label(self) -> &'static str {
        match self {
            Estimator::Kw => "KW",
            Estimator::Mfa => "MFA",
            Estimator::Am => "AM",
            Estimator::Pam => "pAM",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// How fiber topology and photonic links are combined into one matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Expected matrix `Pi_ij * p_ij`; no sampling.
    Annealed,
    /// Sampled fiber topology weighted by `p_ij`.
    Quenched,
    /// Sampled fiber topology and Bernoulli-sampled photonic links.
    FullySampled,
}

impl Method {
    pub fn from_number(k: u8) -> Option<Self> {
        match k {
            1 => Some(Method::Annealed),
            2 => Some(Method::Quenched),
            3 => Some(Method::FullySampled),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Annealed => "annealed-1",
            Method::Quenched => "quenched-2",
            Method::FullySampled => "fully-sampled-3",
        }
    }

    pub fn estimator(self) -> Estimator {
        match self {
            Method::Annealed | Method::Quenched => Estimator::Pam,
            Method::FullySampled => Estimator::Am,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdEstimate {
    pub value: f64,
    pub estimator: Estimator,
    pub method: Option<Method>,
    pub ensemble_mean: f64,
    pub ensemble_std: f64,
    /// Instances attempted, including excluded ones.
    pub n_instances: usize,
    pub n_excluded: usize,
}

impl ThresholdEstimate {
    fn single(value: f64, estimator: Estimator) -> Self {
        Self {
            value,
            estimator,
            method: None,
            ensemble_mean: value,
            ensemble_std: 0.0,
            n_instances: 1,
            n_excluded: 0,
        }
    }

    /// Aggregates per-instance thresholds; `None` marks an excluded instance.
    pub fn from_samples(
        samples: &[Option<f64>],
        estimator: Estimator,
        method: Option<Method>,
    ) -> Result<Self> {
        let ok: Vec<f64> = samples.iter().flatten().copied().collect();
        if ok.is_empty() {
            return Err(Error::DegenerateGraph(format!(
                "all {} instances degenerate for {estimator}",
                samples.len()
            )));
        }
        let s = Summary::of(&ok);
        Ok(Self {
            value: s.mean,
            estimator,
            method,
            ensemble_mean: s.mean,
            ensemble_std: s.std,
            n_instances: samples.len(),
            n_excluded: samples.len() - ok.len(),
        })
    }

    pub fn n_used(&self) -> usize {
        self.n_instances - self.n_excluded
    }

    pub fn std_err(&self) -> f64 {
        self.ensemble_std / (self.n_used() as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralResult {
    pub lambda_1: f64,
    pub iterations: usize,
    /// `||A x - lambda x|| / lambda` at the returned unit vector.
    pub residual: f64,
}

pub fn tau_kw(stats: &DegreeStats) -> Result<ThresholdEstimate> {
    if stats.mean_degree <= 0.0 {
        return Err(Error::DegenerateGraph(
            "KW threshold undefined: mean degree is zero".into(),
        ));
    }
    Ok(ThresholdEstimate::single(
        1.0 / stats.mean_degree,
        Estimator::Kw,
    ))
}

pub fn tau_mfa(stats: &DegreeStats) -> Result<ThresholdEstimate> {
    if stats.second_moment <= 0.0 {
        return Err(Error::DegenerateGraph(
            "MFA threshold undefined: second degree moment is zero".into(),
        ));
    }
    Ok(ThresholdEstimate::single(
        stats.mean_degree / stats.second_moment,
        Estimator::Mfa,
    ))
}

const MAX_BASIS: usize = 200;
const CHECK_EVERY: usize = 5;

/// Dominant eigenvalue of a symmetric nonnegative matrix.
///
/// Lanczos iteration with full reorthogonalization, started from the
/// normalized all-ones vector and restarted from the current Ritz vector
/// whenever the basis reaches `MAX_BASIS` vectors. The Krylov space contains
/// every power-iteration iterate from the same start, so the Ritz value is at
/// least as accurate as the Rayleigh quotient after as many products, and it
/// never exceeds `lambda_1`. Stops when the Ritz value changes by at most
/// `tol` (relative) between checks and the Ritz residual is at most `tol`
/// (relative). `iterations` counts matrix-vector products.
pub fn largest_eigenvalue(
    w: &WeightedAdjacency,
    tol: f64,
    max_iter: usize,
) -> Result<SpectralResult> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be > 0, got {tol}")));
    }
    let n = w.n();
    if w.n_edges() == 0 {
        return Ok(SpectralResult {
            lambda_1: 0.0,
            iterations: 0,
            residual: 0.0,
        });
    }

    let start = vec![1.0 / (n as f64).sqrt(); n];
    match lanczos(w, start, tol, max_iter) {
        Ok(r) => Ok(r),
        Err(_) => {
            let mut rng = stream_rng(0, n as u64, Stream::PowerRestart);
            let mut x: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
            normalize(&mut x);
            lanczos(w, x, tol, max_iter)
        }
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = dot(x, x).sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dot product evaluated as if in twice the working precision
/// (error-free product and sum transformations).
fn dot_compensated(a: &[f64], b: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for (x, y) in a.iter().zip(b) {
        let p = x * y;
        let ep = x.mul_add(*y, -p);
        let t = s + p;
        let z = t - s;
        c += ep + ((s - (t - z)) + (p - z));
        s = t;
    }
    s + c
}

/// Largest eigenpair of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`.
fn top_ritz(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let t = nalgebra::DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = nalgebra::SymmetricEigen::new(t);
    let top = eig.eigenvalues.imax();
    let s = eig.eigenvectors.column(top).iter().copied().collect();
    (eig.eigenvalues[top], s)
}

fn lanczos(
    w: &WeightedAdjacency,
    mut start: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<SpectralResult> {
    let n = w.n();
    let cap = MAX_BASIS.min(n);
    let mut products = 0;
    let mut prev = f64::NAN;

    loop {
        let mut basis = vec![std::mem::take(&mut start)];
        let mut alpha = Vec::with_capacity(cap);
        let mut beta: Vec<f64> = Vec::with_capacity(cap);
        loop {
            let q = basis.last().expect("basis is never empty");
            let mut z = vec![0.0; n];
            w.mul_vec(q, &mut z);
            products += 1;
            // Rayleigh quotient of the stored vector, which is unit only to
            // rounding.
            alpha.push(dot_compensated(q, &z) / dot_compensated(q, q));
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &z);
                    z.iter_mut().zip(v).for_each(|(zi, vi)| *zi -= c * vi);
                }
            }
            let b = dot(&z, &z).sqrt();
            let m = alpha.len();
            let full = m == cap;
            let scale = alpha
                .iter()
                .chain(&beta)
                .fold(0.0f64, |acc, a| acc.max(a.abs()));
            let breakdown = b <= 1e3 * f64::EPSILON * scale;
            if !(breakdown || full || m % CHECK_EVERY == 0 || products >= max_iter) {
                beta.push(b);
                z.iter_mut().for_each(|v| *v /= b);
                basis.push(z);
                continue;
            }
            let (theta, s) = top_ritz(&alpha, &beta);
            let size = theta.abs().max(f64::MIN_POSITIVE);
            let residual = b * s[m - 1].abs() / size;
            let settled = (theta - prev).abs() <= tol * size;
            if breakdown || (settled && residual <= tol) {
                return Ok(SpectralResult {
                    lambda_1: theta,
                    iterations: products,
                    residual,
                });
            }
            prev = theta;
            if products >= max_iter {
                return Err(Error::NoConvergence {
                    iterations: products,
                    residual,
                });
            }
            if full {
                let mut x = vec![0.0; n];
                for (v, sk) in basis.iter().zip(&s) {
                    x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += sk * vi);
                }
                normalize(&mut x);
                start = x;
                break;
            }
            beta.push(b);
            z.iter_mut().for_each(|v| *v /= b);
            basis.push(z);
        }
    }
}

/// `1 / lambda_1`; AM for binary matrices, pAM for probability-weighted ones.
pub fn tau_spectral(w: &WeightedAdjacency) -> Result<ThresholdEstimate> {
    let estimator = match w.kind() {
        AdjacencyKind::ProbabilityWeighted => Estimator::Pam,
        AdjacencyKind::Binary | AdjacencyKind::Sampled => Estimator::Am,
    };
    let r = largest_eigenvalue(w, DEFAULT_TOL, default_max_iter(w))?;
    if r.lambda_1 <= 0.0 {
        return Err(Error::DegenerateGraph(format!(
            "{estimator} threshold undefined: largest eigenvalue is zero"
        )));
    }
    Ok(ThresholdEstimate::single(1.0 / r.lambda_1, estimator))
}

/// `Some(1 / lambda_1)`, or `None` for a degenerate (edgeless) matrix.
pub(crate) fn spectral_tau_or_excluded(w: &WeightedAdjacency) -> Result<Option<f64>> {
    match tau_spectral(w) {
        Ok(t) => Ok(Some(t.value)),
        Err(Error::DegenerateGraph(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// One per-instance threshold and the seed that regenerates it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceSample {
    pub outer: usize,
    pub inner: Option<usize>,
    pub seed: u64,
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleThreshold {
    pub estimate: ThresholdEstimate,
    pub samples: Vec<InstanceSample>,
}

/// Seed of the Waxman topology for outer instance `outer`.
pub fn topology_seed(master_seed: u64, outer: usize) -> u64 {
    derive_seed(master_seed, outer as u64, Stream::Topology)
}

/// Seed of inner link realization `inner` on top of a topology seed.
pub fn link_seed(topology_seed: u64, inner: usize) -> u64 {
    derive_seed(topology_seed, inner as u64, Stream::LinkSampling)
}

/// Spectral threshold averaged over a Waxman ensemble.
///
/// Per-instance thresholds `1 / lambda_1` are averaged (not the eigenvalues).
/// Method 1 draws fresh positions per outer instance but samples nothing
/// else; Method 3 draws `n_inner` link realizations per topology.
/// Degenerate instances are excluded and counted.
pub fn ensemble_threshold(
    geo: &GeoParams,
    ph: &PhotonicParams,
    method: Method,
    n_outer: usize,
    n_inner: usize,
    master_seed: u64,
) -> Result<EnsembleThreshold> {
    geo.validate()?;
    ph.validate()?;
    if n_outer == 0 {
        return Err(Error::invalid("n_outer must be >= 1"));
    }
    if method == Method::FullySampled && n_inner == 0 {
        return Err(Error::invalid("method 3 needs n_inner >= 1"));
    }

    let per_outer: Vec<Vec<InstanceSample>> = (0..n_outer)
        .into_par_iter()
        .map(|outer| -> Result<Vec<InstanceSample>> {
            let seed = topology_seed(master_seed, outer);
            let mut rng = rng_from_seed(seed);
            match method {
                Method::Annealed => {
                    // Same stream as the Waxman generator, so positions match
                    // the Method 2 topology of this outer index.
                    let positions = sample_positions(&mut rng, geo.n_nodes, geo.r_max);
                    let m = expected_adjacency(geo, ph, &positions)?;
                    let tau = spectral_tau_or_excluded(&m)?;
                    Ok(vec![InstanceSample {
                        outer,
                        inner: None,
                        seed,
                        tau,
                    }])
                }
                Method::Quenched => {
                    let g = waxman_with_rng(geo, &mut rng);
                    let m = apply_quantum_weights(&g, ph)?;
                    let tau = spectral_tau_or_excluded(&m)?;
                    Ok(vec![InstanceSample {
                        outer,
                        inner: None,
                        seed,
                        tau,
                    }])
                }
                Method::FullySampled => {
                    let g = waxman_with_rng(geo, &mut rng);
                    let m = apply_quantum_weights(&g, ph)?;
                    (0..n_inner)
                        .map(|inner| {
                            let lseed = link_seed(seed, inner);
                            let b = sample_link_realization_with(&m, &mut rng_from_seed(lseed))?;
                            Ok(InstanceSample {
                                outer,
                                inner: Some(inner),
                                seed: lseed,
                                tau: spectral_tau_or_excluded(&b)?,
                            })
                        })
                        .collect()
                }
            }
        })
        .collect::<Result<_>>()?;

    let samples: Vec<InstanceSample> = per_outer.into_iter().flatten().collect();
    let taus: Vec<Option<f64>> = samples.iter().map(|s| s.tau).collect();
    let estimate = ThresholdEstimate::from_samples(&taus, method.estimator(), Some(method))?;
    Ok(EnsembleThreshold { estimate, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::degree_stats;

    fn binary(n: usize, edges: &[(usize, usize)]) -> WeightedAdjacency {
        WeightedAdjacency::from_edges(
            n,
            AdjacencyKind::Binary,
            edges.iter().map(|&(i, j)| (i, j, 1.0)),
        )
        .unwrap()
    }

    fn complete(n: usize) -> WeightedAdjacency {
        let e: Vec<_> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        binary(n, &e)
    }

    fn lambda(w: &WeightedAdjacency) -> f64 {
        largest_eigenvalue(w, DEFAULT_TOL, default_max_iter(w))
            .unwrap()
            .lambda_1
    }

    #[test]
    fn known_spectra() {
        assert!((lambda(&complete(4)) - 3.0).abs() < 1e-9);
        for leaves in [1usize, 3, 4, 9] {
            let e: Vec<_> = (1..=leaves).map(|j| (0, j)).collect();
            let star = binary(leaves + 1, &e);
            assert!(
                (lambda(&star) - (leaves as f64).sqrt()).abs() < 1e-9,
                "star {leaves}"
            );
        }
        let w =
            WeightedAdjacency::from_edges(2, AdjacencyKind::ProbabilityWeighted, [(0, 1, 0.37)])
                .unwrap();
        assert!((lambda(&w) - 0.37).abs() < 1e-12);
    }

    #[test]
    fn near_degenerate_components_are_resolved() {
        // Two disjoint stars whose spectral radii differ by 1e-6.
        let (a, b) = (1.0, 1.0 - 1e-6);
        let w = WeightedAdjacency::from_edges(
            6,
            AdjacencyKind::ProbabilityWeighted,
            [(0, 1, a), (0, 2, a), (3, 4, b), (3, 5, b)],
        )
        .unwrap();
        assert!((lambda(&w) - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn restarts_beyond_the_basis_cap() {
        let n = 3 * MAX_BASIS;
        let e: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let path = binary(n, &e);
        let exact = 2.0 * (std::f64::consts::PI / (n + 1) as f64).cos();
        let r = largest_eigenvalue(&path, 1e-10, default_max_iter(&path)).unwrap();
        assert!(r.iterations > MAX_BASIS);
        assert!(r.residual <= 1e-10);
        assert!((r.lambda_1 - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn zero_matrix_has_zero_eigenvalue() {
        let w = WeightedAdjacency::empty(5, AdjacencyKind::Binary);
        let r = largest_eigenvalue(&w, 1e-10, 10).unwrap();
        assert_eq!(r.lambda_1, 0.0);
        assert!(matches!(tau_spectral(&w), Err(Error::DegenerateGraph(_))));
    }

    #[test]
    fn iteration_budget_is_enforced() {
        let e: Vec<_> = (0..29).map(|i| (i, i + 1)).collect();
        let path = binary(30, &e);
        assert!(matches!(
            largest_eigenvalue(&path, 1e-14, 3),
            Err(Error::NoConvergence { .. })
        ));
        assert!(largest_eigenvalue(&path, 0.0, 3).is_err());
    }

    #[test]
    fn spectral_threshold_labels() {
        let t = tau_spectral(&complete(4)).unwrap();
        assert_eq!(t.estimator, Estimator::Am);
        assert!((t.value - 1.0 / 3.0).abs() < 1e-12);
        let w = WeightedAdjacency::from_edges(2, AdjacencyKind::ProbabilityWeighted, [(0, 1, 0.5)])
            .unwrap();
        let t = tau_spectral(&w).unwrap();
        assert_eq!(t.estimator, Estimator::Pam);
        assert!((t.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degree_thresholds() {
        let single_edge = binary(2, &[(0, 1)]);
        let s = degree_stats(&single_edge);
        assert_eq!(tau_kw(&s).unwrap().value, 1.0);
        assert_eq!(tau_mfa(&s).unwrap().value, 1.0);

        let star = binary(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let s = degree_stats(&star);
        // <k> = 8/5, <k^2> = (16 + 4)/5 = 4.
        assert!((tau_mfa(&s).unwrap().value - 0.4).abs() < 1e-15);
        assert!((tau_kw(&s).unwrap().value - 0.625).abs() < 1e-15);

        let s = degree_stats(&complete(11));
        assert!((tau_kw(&s).unwrap().value - 0.1).abs() < 1e-15);

        let empty = degree_stats(&WeightedAdjacency::empty(3, AdjacencyKind::Binary));
        assert!(matches!(tau_kw(&empty), Err(Error::DegenerateGraph(_))));
        assert!(matches!(tau_mfa(&empty), Err(Error::DegenerateGraph(_))));
    }

    #[test]
    fn aggregation_excludes_degenerate_instances() {
        let t = ThresholdEstimate::from_samples(&[Some(1.0), None, Some(3.0)], Estimator::Am, None)
            .unwrap();
        assert_eq!(t.ensemble_mean, 2.0);
        assert_eq!(t.n_instances, 3);
        assert_eq!(t.n_excluded, 1);
        assert_eq!(t.n_used(), 2);
        assert!(ThresholdEstimate::from_samples(&[None, None], Estimator::Am, None).is_err());
    }

    #[test]
    fn lossless_limit_methods_two_and_three_coincide() {
        let geo = GeoParams::us_backbone(60);
        let ph = PhotonicParams {
            gamma: 0.0,
            n_photons: 1,
        };
        let m2 = ensemble_threshold(&geo, &ph, Method::Quenched, 6, 0, 3).unwrap();
        let m3 = ensemble_threshold(&geo, &ph, Method::FullySampled, 6, 4, 3).unwrap();
        for s3 in &m3.samples {
            assert_eq!(s3.tau, m2.samples[s3.outer].tau);
        }
        let (a, b) = (m2.estimate.ensemble_mean, m3.estimate.ensemble_mean);
        assert!((a - b).abs() <= 1e-12 * a);
        assert_eq!(m2.estimate.n_excluded * 4, m3.estimate.n_excluded);
    }

    #[test]
    fn ensemble_preconditions() {
        let geo = GeoParams::us_backbone(10);
        let ph = PhotonicParams::telecom();
        assert!(ensemble_threshold(&geo, &ph, Method::Quenched, 0, 1, 1).is_err());
        assert!(ensemble_threshold(&geo, &ph, Method::FullySampled, 2, 0, 1).is_err());
    }

    #[test]
    fn all_degenerate_ensemble_is_an_error() {
        // Nodes 1600 km apart at most but alpha tiny: no fiber survives.
        let geo = GeoParams {
            r_max: 1600.0,
            alpha_l: 1e-6,
            beta_l: 1.0,
            n_nodes: 3,
        };
        let ph = PhotonicParams::telecom();
        assert!(matches!(
            ensemble_threshold(&geo, &ph, Method::Quenched, 4, 0, 1),
            Err(Error::DegenerateGraph(_))
        ));
    }
}
