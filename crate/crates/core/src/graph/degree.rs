use std::collections::BTreeMap;

use super::adjacency::WeightedAdjacency;

/// Degree distribution and its first two moments.
///
/// For weighted matrices the degree of a node is its expected degree (row
/// sum). The histogram floors degrees to integer bins; the moments are taken
/// from the unbinned degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStats {
    pub histogram: BTreeMap<usize, f64>,
    pub mean_degree: f64,
    pub second_moment: f64,
    pub n_nodes: usize,
}

impl DegreeStats {
    pub fn from_degrees(degrees: &[f64]) -> Self {
        let n = degrees.len();
        if n == 0 {
            return Self {
                histogram: BTreeMap::new(),
                mean_degree: 0.0,
                second_moment: 0.0,
                n_nodes: 0,
            };
        }
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &d in degrees {
            *counts.entry(d.floor() as usize).or_default() += 1;
        }
        let histogram = counts
            .into_iter()
            .map(|(k, c)| (k, c as f64 / n as f64))
            .collect();
        let nf = n as f64;
        Self {
            histogram,
            mean_degree: degrees.iter().sum::<f64>() / nf,
            second_moment: degrees.iter().map(|d| d * d).sum::<f64>() / nf,
            n_nodes: n,
        }
    }

    pub fn variance(&self) -> f64 {
        self.second_moment - self.mean_degree * self.mean_degree
    }
}

pub fn node_degrees(w: &WeightedAdjacency) -> Vec<f64> {
    (0..w.n()).map(|i| w.row_sum(i)).collect()
}

pub fn degree_stats(w: &WeightedAdjacency) -> DegreeStats {
    DegreeStats::from_degrees(&node_degrees(w))
}
