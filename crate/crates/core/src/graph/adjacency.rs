use std::fmt;

use crate::error::{Error, Result};

/// How the entries of a [`WeightedAdjacency`] should be interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdjacencyKind {
    /// Classical fiber topology, entries in {0, 1}.
    Binary,
    /// Photonic link success probabilities on existing fibers (pAM).
    ProbabilityWeighted,
    /// One Bernoulli realization of the photonic links, entries in {0, 1}.
    Sampled,
}

impl AdjacencyKind {
    pub fn is_binary(self) -> bool {
        matches!(self, AdjacencyKind::Binary | AdjacencyKind::Sampled)
    }

    /// Token used in the graph file header.
    pub fn file_token(self) -> &'static str {
        match self {
            AdjacencyKind::Binary => "binary",
            AdjacencyKind::ProbabilityWeighted => "weighted",
            AdjacencyKind::Sampled => "sampled",
        }
    }

    pub fn from_file_token(token: &str) -> Option<Self> {
        match token {
            "binary" => Some(AdjacencyKind::Binary),
            "weighted" => Some(AdjacencyKind::ProbabilityWeighted),
            "sampled" => Some(AdjacencyKind::Sampled),
            _ => None,
        }
    }
}

impl fmt::Display for AdjacencyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.file_token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Symmetric, zero-diagonal, nonnegative matrix with entries in `[0, 1]`.
///
/// Stored sparsely: the upper-triangle edge list (sorted by `(i, j)`, zero
/// entries dropped) and a compressed row view holding both directions.
/// Values are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAdjacency {
    n: usize,
    kind: AdjacencyKind,
    edges: Vec<Edge>,
    row_offsets: Vec<usize>,
    row_entries: Vec<(usize, f64)>,
}

impl WeightedAdjacency {
    pub fn empty(n: usize, kind: AdjacencyKind) -> Self {
        Self {
            n,
            kind,
            edges: Vec::new(),
            row_offsets: vec![0; n + 1],
            row_entries: Vec::new(),
        }
    }

    /// Builds a matrix from `(i, j, weight)` triples.
    ///
    /// Each unordered pair may appear at most once, in either orientation.
    /// Zero weights are accepted and dropped.
    pub fn from_edges<I>(n: usize, kind: AdjacencyKind, triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut edges = Vec::new();
        for (a, b, w) in triples {
            if a >= n || b >= n {
                return Err(Error::invalid(format!(
                    "edge ({a}, {b}) out of range for {n} nodes"
                )));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop at node {a}")));
            }
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::invalid(format!(
                    "edge ({a}, {b}) weight {w} outside [0, 1]"
                )));
            }
            if kind.is_binary() && w != 0.0 && w != 1.0 {
                return Err(Error::invalid(format!(
                    "edge ({a}, {b}) weight {w} in a {kind} matrix"
                )));
            }
            if w == 0.0 {
                continue;
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            edges.push(Edge { i, j, weight: w });
        }
        edges.sort_by_key(|e| (e.i, e.j));
        if let Some(dup) = edges
            .windows(2)
            .find(|p| p[0].i == p[1].i && p[0].j == p[1].j)
        {
            return Err(Error::invalid(format!(
                "duplicate edge ({}, {})",
                dup[0].i, dup[0].j
            )));
        }
        Ok(Self::from_sorted_edges(n, kind, edges))
    }

    /// `edges` must already be validated, upper-triangular and sorted.
    pub(crate) fn from_sorted_edges(n: usize, kind: AdjacencyKind, edges: Vec<Edge>) -> Self {
        let mut counts = vec![0usize; n + 1];
        for e in &edges {
            counts[e.i + 1] += 1;
            counts[e.j + 1] += 1;
        }
        for k in 0..n {
            counts[k + 1] += counts[k];
        }
        let row_offsets = counts;
        let mut fill = row_offsets.clone();
        let mut row_entries = vec![(0usize, 0.0f64); 2 * edges.len()];
        // Visiting edges in (i, j) order leaves every row sorted by column:
        // lower-triangle entries of row v arrive before its upper ones.
        for e in &edges {
            row_entries[fill[e.j]] = (e.i, e.weight);
            fill[e.j] += 1;
        }
        for e in &edges {
            row_entries[fill[e.i]] = (e.j, e.weight);
            fill[e.i] += 1;
        }
        Self {
            n,
            kind,
            edges,
            row_offsets,
            row_entries,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> AdjacencyKind {
        self.kind
    }

    /// Nonzero upper-triangle entries, sorted by `(i, j)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Nonzero entries of row `i` as `(column, weight)`, sorted by column.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.row_entries[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let row = self.neighbors(i);
        match row.binary_search_by(|&(c, _)| c.cmp(&j)) {
            Ok(pos) => row[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.neighbors(i).iter().map(|&(_, w)| w).sum()
    }

    pub fn max_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).fold(0.0, f64::max)
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (i, out) in y.iter_mut().enumerate() {
            *out = self.neighbors(i).iter().map(|&(j, w)| w * x[j]).sum();
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for e in &self.edges {
            m[e.i][e.j] = e.weight;
            m[e.j][e.i] = e.weight;
        }
        m
    }

    /// Same sparsity pattern and weights, relabelled with another kind.
    /// Used to treat a binary topology as a matrix of unit weights.
    pub fn with_kind(&self, kind: AdjacencyKind) -> Result<Self> {
        if kind.is_binary() && !self.edges.iter().all(|e| e.weight == 1.0) {
            return Err(Error::invalid(format!(
                "cannot relabel non-binary weights as {kind}"
            )));
        }
        Ok(Self {
            kind,
            ..self.clone()
        })
    }
}
