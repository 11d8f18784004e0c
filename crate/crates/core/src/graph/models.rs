use std::f64::consts::{LN_10, PI};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::adjacency::{AdjacencyKind, Edge, WeightedAdjacency};
use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, Rng};

/// Spatial layout and Waxman link parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoParams {
    /// Disk radius in km.
    pub r_max: f64,
    /// Characteristic link length in km.
    pub alpha_l: f64,
    /// Link probability at zero distance.
    pub beta_l: f64,
    pub n_nodes: usize,
}

impl GeoParams {
    /// U.S. fiber backbone values: 1600 km disk, 226 km link length.
    pub fn us_backbone(n_nodes: usize) -> Self {
        Self {
            r_max: 1600.0,
            alpha_l: 226.0,
            beta_l: 1.0,
            n_nodes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::invalid(format!(
                "r_max must be > 0, got {}",
                self.r_max
            )));
        }
        if !(self.alpha_l > 0.0 && self.alpha_l.is_finite()) {
            return Err(Error::invalid(format!(
                "alpha_l must be > 0, got {}",
                self.alpha_l
            )));
        }
        if !(self.beta_l > 0.0 && self.beta_l <= 1.0) {
            return Err(Error::invalid(format!(
                "beta_l must lie in (0, 1], got {}",
                self.beta_l
            )));
        }
        if self.n_nodes == 0 {
            return Err(Error::invalid("n_nodes must be >= 1"));
        }
        Ok(())
    }

    /// Waxman connection probability `beta_l * exp(-d / alpha_l)`.
    pub fn connection_prob(&self, d: f64) -> f64 {
        self.beta_l * (-d / self.alpha_l).exp()
    }
}

/// Fiber attenuation and photons per link attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonicParams {
    /// Attenuation in dB/km.
    pub gamma: f64,
    pub n_photons: u64,
}

impl PhotonicParams {
    /// 1550 nm telecom fiber with 1000 photons per attempt.
    pub fn telecom() -> Self {
        Self {
            gamma: 0.2,
            n_photons: 1000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!(
                "gamma must be >= 0, got {}",
                self.gamma
            )));
        }
        if self.n_photons == 0 {
            return Err(Error::invalid("n_photons must be >= 1"));
        }
        Ok(())
    }

    fn single_photon(&self, d: f64) -> f64 {
        (-self.gamma * d * LN_10 / 10.0).exp()
    }

    /// `1 - (1 - P)^n_p` evaluated as `-expm1(n_p * ln(1 - P))`.
    fn link(&self, d: f64) -> f64 {
        let p = self.single_photon(d);
        -(self.n_photons as f64 * (-p).ln_1p()).exp_m1()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Node positions plus the binary fiber topology.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGraph {
    positions: Vec<Point>,
    adjacency: WeightedAdjacency,
}

impl SpatialGraph {
    pub fn new(positions: Vec<Point>, adjacency: WeightedAdjacency) -> Result<Self> {
        if positions.len() != adjacency.n() {
            return Err(Error::invalid(format!(
                "{} positions for {} nodes",
                positions.len(),
                adjacency.n()
            )));
        }
        if adjacency.kind() != AdjacencyKind::Binary {
            return Err(Error::invalid("fiber topology must be binary"));
        }
        Ok(Self {
            positions,
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn adjacency(&self) -> &WeightedAdjacency {
        &self.adjacency
    }

    /// Euclidean distance between stored positions, in km.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.positions[i].distance(&self.positions[j])
    }

    pub fn into_parts(self) -> (Vec<Point>, WeightedAdjacency) {
        (self.positions, self.adjacency)
    }
}

/// Area-uniform point in a disk: radius `r_max * sqrt(u)`, uniform angle.
fn sample_disk_point(rng: &mut Rng, r_max: f64) -> Point {
    let r = r_max * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    Point {
        x: r * theta.cos(),
        y: r * theta.sin(),
    }
}

pub fn sample_positions(rng: &mut Rng, n: usize, r_max: f64) -> Vec<Point> {
    (0..n).map(|_| sample_disk_point(rng, r_max)).collect()
}

fn connect_pairs<F>(rng: &mut Rng, n: usize, mut prob: F) -> WeightedAdjacency
where
    F: FnMut(usize, usize) -> f64,
{
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < prob(i, j) {
                edges.push(Edge { i, j, weight: 1.0 });
            }
        }
    }
    WeightedAdjacency::from_sorted_edges(n, AdjacencyKind::Binary, edges)
}

/// Erdős–Rényi graph. Positions are drawn in the unit disk but carry no
/// meaning for the topology.
pub fn generate_er(n: usize, p: f64, seed: u64) -> Result<SpatialGraph> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p must lie in [0, 1], got {p}")));
    }
    let mut rng = rng_from_seed(seed);
    let positions = sample_positions(&mut rng, n, 1.0);
    let adjacency = connect_pairs(&mut rng, n, |_, _| p);
    Ok(SpatialGraph {
        positions,
        adjacency,
    })
}

/// Waxman graph on area-uniform positions in a disk of radius `r_max`.
pub fn generate_waxman(geo: &GeoParams, seed: u64) -> Result<SpatialGraph> {
    geo.validate()?;
    let mut rng = rng_from_seed(seed);
    Ok(waxman_with_rng(geo, &mut rng))
}

pub(crate) fn waxman_with_rng(geo: &GeoParams, rng: &mut Rng) -> SpatialGraph {
    let positions = sample_positions(rng, geo.n_nodes, geo.r_max);
    let adjacency = connect_pairs(rng, geo.n_nodes, |i, j| {
        geo.connection_prob(positions[i].distance(&positions[j]))
    });
    SpatialGraph {
        positions,
        adjacency,
    }
}

fn check_distance(d: f64) -> Result<()> {
    if d >= 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("distance must be >= 0, got {d}")))
    }
}

/// Probability that a single photon survives `d` km of fiber.
pub fn photon_success_prob(d: f64, ph: &PhotonicParams) -> Result<f64> {
    check_distance(d)?;
    ph.validate()?;
    Ok(ph.single_photon(d))
}

/// Probability that at least one of `n_photons` photons arrives.
pub fn quantum_link_prob(d: f64, ph: &PhotonicParams) -> Result<f64> {
    check_distance(d)?;
    ph.validate()?;
    Ok(ph.link(d))
}

/// Weights every fiber edge by its photonic link probability (pAM).
pub fn apply_quantum_weights(g: &SpatialGraph, ph: &PhotonicParams) -> Result<WeightedAdjacency> {
    ph.validate()?;
    let edges = g
        .adjacency
        .edges()
        .iter()
        .map(|e| Edge {
            weight: ph.link(g.distance(e.i, e.j)),
            ..*e
        })
        .filter(|e| e.weight > 0.0)
        .collect();
    Ok(WeightedAdjacency::from_sorted_edges(
        g.n(),
        AdjacencyKind::ProbabilityWeighted,
        edges,
    ))
}

/// Expected adjacency: every pair weighted by fiber probability times link
/// probability, with no sampling.
pub fn expected_adjacency(
    geo: &GeoParams,
    ph: &PhotonicParams,
    positions: &[Point],
) -> Result<WeightedAdjacency> {
    geo.validate()?;
    ph.validate()?;
    let n = positions.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = positions[i].distance(&positions[j]);
            let weight = geo.connection_prob(d) * ph.link(d);
            if weight > 0.0 {
                edges.push(Edge { i, j, weight });
            }
        }
    }
    Ok(WeightedAdjacency::from_sorted_edges(
        n,
        AdjacencyKind::ProbabilityWeighted,
        edges,
    ))
}

/// Keeps each weighted edge with probability equal to its weight.
pub fn sample_link_realization(w: &WeightedAdjacency, seed: u64) -> Result<WeightedAdjacency> {
    sample_link_realization_with(w, &mut rng_from_seed(seed))
}

pub fn sample_link_realization_with(
    w: &WeightedAdjacency,
    rng: &mut Rng,
) -> Result<WeightedAdjacency> {
    if w.kind() != AdjacencyKind::ProbabilityWeighted {
        return Err(Error::invalid(format!(
            "link sampling needs a probability-weighted matrix, got {}",
            w.kind()
        )));
    }
    let edges = w
        .edges()
        .iter()
        .filter(|e| rng.random::<f64>() < e.weight)
        .map(|e| Edge { weight: 1.0, ..*e })
        .collect();
    Ok(WeightedAdjacency::from_sorted_edges(
        w.n(),
        AdjacencyKind::Sampled,
        edges,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ph(gamma: f64, n_photons: u64) -> PhotonicParams {
        PhotonicParams { gamma, n_photons }
    }

    #[test]
    fn er_extremes() {
        let empty = generate_er(5, 0.0, 1).unwrap();
        assert_eq!(empty.adjacency().n_edges(), 0);
        let full = generate_er(5, 1.0, 1).unwrap();
        assert_eq!(full.adjacency().n_edges(), 10);
        assert!(generate_er(5, 1.5, 1).is_err());
        assert!(generate_er(0, 0.5, 1).is_err());
    }

    #[test]
    fn waxman_connection_prob_values() {
        let geo = GeoParams::us_backbone(10);
        assert_eq!(geo.connection_prob(0.0), 1.0);
        assert!((geo.connection_prob(226.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((geo.connection_prob(226.0) - 0.36788).abs() < 1e-5);
    }

    #[test]
    fn waxman_positions_inside_disk_and_deterministic() {
        let geo = GeoParams::us_backbone(300);
        let a = generate_waxman(&geo, 9).unwrap();
        let b = generate_waxman(&geo, 9).unwrap();
        assert_eq!(a, b);
        for p in a.positions() {
            assert!(p.x.hypot(p.y) <= geo.r_max);
        }
        let c = generate_waxman(&geo, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn waxman_rejects_bad_params() {
        let mut geo = GeoParams::us_backbone(10);
        geo.beta_l = 0.0;
        assert!(generate_waxman(&geo, 1).is_err());
        geo.beta_l = 1.0;
        geo.alpha_l = -1.0;
        assert!(generate_waxman(&geo, 1).is_err());
        geo.alpha_l = 226.0;
        geo.n_nodes = 0;
        assert!(generate_waxman(&geo, 1).is_err());
    }

    #[test]
    fn photon_success_values() {
        let p = ph(0.2, 1);
        assert_eq!(photon_success_prob(0.0, &p).unwrap(), 1.0);
        assert!((photon_success_prob(50.0, &p).unwrap() - 0.1).abs() < 1e-15);
        assert!((photon_success_prob(100.0, &p).unwrap() - 0.01).abs() < 1e-16);
        assert!(photon_success_prob(-1.0, &p).is_err());
    }

    #[test]
    fn link_prob_values() {
        for d in [0.0, 10.0, 77.0, 300.0] {
            assert!(
                (quantum_link_prob(d, &ph(0.2, 1)).unwrap()
                    - photon_success_prob(d, &ph(0.2, 1)).unwrap())
                .abs()
                    < 1e-15
            );
        }
        // P = 0.1 at 50 km: 1 - 0.9^2.
        assert!((quantum_link_prob(50.0, &ph(0.2, 2)).unwrap() - 0.19).abs() < 1e-15);
        // 1 - 0.99^1000 evaluated at 30 digits: 0.99995682875258934...
        let p = quantum_link_prob(100.0, &ph(0.2, 1000)).unwrap();
        assert!((p - 0.999_956_828_752_589_3).abs() < 1e-13, "{p}");
        assert!((p - 0.9999568).abs() < 1e-7);
        assert!(quantum_link_prob(-0.5, &ph(0.2, 3)).is_err());
        assert!(quantum_link_prob(1.0, &ph(0.2, 0)).is_err());
    }

    #[test]
    fn quantum_weights_on_a_path() {
        let positions = vec![
            Point { x: 0.0, y: 0.0 },
            Point { x: 50.0, y: 0.0 },
            Point { x: 150.0, y: 0.0 },
        ];
        let adj =
            WeightedAdjacency::from_edges(3, AdjacencyKind::Binary, [(0, 1, 1.0), (1, 2, 1.0)])
                .unwrap();
        let g = SpatialGraph::new(positions, adj).unwrap();
        let w = apply_quantum_weights(&g, &ph(0.2, 1)).unwrap();
        assert_eq!(w.kind(), AdjacencyKind::ProbabilityWeighted);
        assert!((w.weight(0, 1) - 0.1).abs() < 1e-15);
        assert!((w.weight(1, 2) - 0.01).abs() < 1e-16);
        assert_eq!(w.weight(0, 2), 0.0);
    }

    #[test]
    fn quantum_weights_edge_cases() {
        let g = generate_er(6, 0.0, 3).unwrap();
        let w = apply_quantum_weights(&g, &PhotonicParams::telecom()).unwrap();
        assert_eq!(w.n_edges(), 0);

        let positions = vec![Point::default(), Point::default()];
        let adj = WeightedAdjacency::from_edges(2, AdjacencyKind::Binary, [(0, 1, 1.0)]).unwrap();
        let g = SpatialGraph::new(positions, adj).unwrap();
        let w = apply_quantum_weights(&g, &ph(0.2, 1)).unwrap();
        assert_eq!(w.weight(0, 1), 1.0);
    }

    #[test]
    fn expected_adjacency_entries() {
        let geo = GeoParams::us_backbone(2);
        let positions = vec![Point::default(), Point { x: 226.0, y: 0.0 }];
        let m = expected_adjacency(&geo, &ph(0.2, 1), &positions).unwrap();
        // e^-1 * 10^-4.52 at 30 digits.
        let expected = 1.110_978_151_266_229_5e-5;
        assert!((m.weight(0, 1) / expected - 1.0).abs() < 1e-13);

        let same = vec![Point::default(), Point::default()];
        let m = expected_adjacency(&geo, &ph(0.2, 1), &same).unwrap();
        assert_eq!(m.weight(0, 1), 1.0);
    }

    #[test]
    fn sampling_requires_weighted_input() {
        let g = generate_er(4, 1.0, 1).unwrap();
        assert!(sample_link_realization(g.adjacency(), 1).is_err());
    }

    #[test]
    fn sampling_extremes() {
        let ones = WeightedAdjacency::from_edges(
            3,
            AdjacencyKind::ProbabilityWeighted,
            [(0, 1, 1.0), (1, 2, 1.0)],
        )
        .unwrap();
        let s = sample_link_realization(&ones, 5).unwrap();
        assert_eq!(s.kind(), AdjacencyKind::Sampled);
        assert_eq!(s.edges(), ones.edges());

        let zeros = WeightedAdjacency::empty(3, AdjacencyKind::ProbabilityWeighted);
        assert_eq!(sample_link_realization(&zeros, 5).unwrap().n_edges(), 0);
    }

    #[test]
    fn sampling_retention_rate() {
        let w = WeightedAdjacency::from_edges(2, AdjacencyKind::ProbabilityWeighted, [(0, 1, 0.5)])
            .unwrap();
        let trials = 10_000u64;
        let kept = (0..trials)
            .filter(|&s| sample_link_realization(&w, s).unwrap().n_edges() == 1)
            .count();
        let frac = kept as f64 / trials as f64;
        assert!((frac - 0.5).abs() <= 0.015, "{frac}");
    }
}
