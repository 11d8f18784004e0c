//! Classical and photonic network models.

mod adjacency;
mod degree;
mod io;
mod models;

pub use adjacency::{AdjacencyKind, Edge, WeightedAdjacency};
pub use degree::{degree_stats, node_degrees, DegreeStats};
pub use io::{load_graph, read_graph, save_graph, write_graph};
pub(crate) use models::waxman_with_rng;
pub use models::{
    apply_quantum_weights, expected_adjacency, generate_er, generate_waxman, photon_success_prob,
    quantum_link_prob, sample_link_realization, sample_link_realization_with, sample_positions,
    GeoParams, PhotonicParams, Point, SpatialGraph,
};
