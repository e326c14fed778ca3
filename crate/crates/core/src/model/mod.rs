//! Point processes and k-nearest-neighbour graphs.

mod grid_index;
mod knn;
mod pointset;
mod region;

pub use grid_index::{Candidate, GridIndex};
pub use knn::{
    brute_force_knn_graph, brute_force_knn_lists, build_knn_graph, knn_candidates, knn_lists,
    longest_edge_length, KnnGraph, BRUTE_FORCE_LIMIT,
};
pub use pointset::{sample_poisson_pointset, sample_poisson_with, uniform_point, PointSet};
pub use region::{Point, Region};
