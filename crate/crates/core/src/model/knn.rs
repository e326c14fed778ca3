use serde::{Deserialize, Serialize};

use super::grid_index::{BestK, Candidate, GridIndex};
use super::pointset::PointSet;
use crate::error::{invalid, LabError, Result};

/// Largest point count the quadratic oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 10_000;

/// Undirected k-nearest-neighbour graph. `adjacency[i]` is sorted and holds
/// no duplicates or self-loops.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnGraph {
    pub k: usize,
    pub adjacency: Vec<Vec<usize>>,
    pub point_count: usize,
}

impl KnnGraph {
    /// Symmetrises directed neighbour lists.
    pub fn from_directed(k: usize, lists: &[Vec<usize>]) -> Self {
        let n = lists.len();
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, list) in lists.iter().enumerate() {
            for &j in list {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
            adj.dedup();
        }
        Self {
            k,
            adjacency,
            point_count: n,
        }
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, adj)| adj.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency
            .get(i)
            .is_some_and(|adj| adj.binary_search(&j).is_ok())
    }
}

/// Directed neighbour candidates of every vertex, nearest first, ties broken
/// by lower index. Uses the grid index.
pub fn knn_candidates(pointset: &PointSet, k: usize) -> Vec<Vec<Candidate>> {
    let pts = &pointset.points;
    if pts.is_empty() {
        return Vec::new();
    }
    let index = GridIndex::new(pts, &pointset.region);
    pts.iter()
        .enumerate()
        .map(|(i, &p)| index.nearest(p, k, Some(i)))
        .collect()
}

/// Directed neighbour lists (indices only).
pub fn knn_lists(pointset: &PointSet, k: usize) -> Vec<Vec<usize>> {
    knn_candidates(pointset, k)
        .into_iter()
        .map(|c| c.into_iter().map(|c| c.index).collect())
        .collect()
}

/// Exact undirected k-NN graph through the grid index.
pub fn build_knn_graph(pointset: &PointSet, k: usize) -> KnnGraph {
    KnnGraph::from_directed(k, &knn_lists(pointset, k))
}

/// Quadratic reference construction with the same tie rule.
pub fn brute_force_knn_lists(pointset: &PointSet, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = pointset.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(LabError::Size(format!(
            "brute-force k-NN refused for {n} points (limit {BRUTE_FORCE_LIMIT})"
        )));
    }
    let pts = &pointset.points;
    Ok((0..n)
        .map(|i| {
            let mut best = BestK::new(k.min(n.saturating_sub(1)));
            for j in (0..n).filter(|&j| j != i) {
                best.offer(Candidate {
                    dist2: pts[i].dist2(pts[j]),
                    index: j,
                });
            }
            best.into_vec().into_iter().map(|c| c.index).collect()
        })
        .collect())
}

pub fn brute_force_knn_graph(pointset: &PointSet, k: usize) -> Result<KnnGraph> {
    Ok(KnnGraph::from_directed(
        k,
        &brute_force_knn_lists(pointset, k)?,
    ))
}

/// Longest Euclidean edge length; 0 for edgeless graphs.
pub fn longest_edge_length(graph: &KnnGraph, pointset: &PointSet) -> Result<f64> {
    if graph.point_count != pointset.len() || graph.adjacency.len() != pointset.len() {
        return invalid(format!(
            "graph has {} vertices but pointset has {} points",
            graph.point_count,
            pointset.len()
        ));
    }
    let pts = &pointset.points;
    Ok(graph
        .edges()
        .map(|(i, j)| pts[i].dist2(pts[j]))
        .fold(0.0f64, f64::max)
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_poisson_pointset, Point, Region};
    use std::collections::BTreeSet;

    fn line(xs: &[f64]) -> PointSet {
        let r = Region::new(-10.0, -10.0, 10.0, 10.0).unwrap();
        PointSet::from_points(xs.iter().map(|&x| Point::new(x, 0.0)).collect(), r).unwrap()
    }

    fn edge_set(g: &KnnGraph) -> BTreeSet<(usize, usize)> {
        g.edges().collect()
    }

    #[test]
    fn two_points_one_edge() {
        let g = build_knn_graph(&line(&[0.0, 1.0]), 1);
        assert_eq!(edge_set(&g), BTreeSet::from([(0, 1)]));
        assert_eq!(brute_force_knn_graph(&line(&[0.0, 1.0]), 1).unwrap(), g);
    }

    #[test]
    fn chain_edge_is_undirected() {
        let ps = line(&[0.0, 1.0, 3.0]);
        let g = build_knn_graph(&ps, 1);
        assert_eq!(edge_set(&g), BTreeSet::from([(0, 1), (1, 2)]));
        assert_eq!(longest_edge_length(&g, &ps).unwrap(), 2.0);
    }

    #[test]
    fn k_at_least_count_gives_complete_graph() {
        let ps = line(&[0.0, 1.0, 3.0, 7.0]);
        for k in [3, 4, 10] {
            let g = build_knn_graph(&ps, k);
            assert_eq!(g.edge_count(), 6);
            assert_eq!(brute_force_knn_graph(&ps, k).unwrap(), g);
        }
    }

    #[test]
    fn k_zero_is_edgeless() {
        let ps = line(&[0.0, 1.0]);
        let g = build_knn_graph(&ps, 0);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(longest_edge_length(&g, &ps).unwrap(), 0.0);
    }

    #[test]
    fn empty_and_singleton() {
        let g = build_knn_graph(&line(&[]), 3);
        assert_eq!(g.point_count, 0);
        let ps = line(&[2.0]);
        let g = build_knn_graph(&ps, 3);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(longest_edge_length(&g, &ps).unwrap(), 0.0);
    }

    #[test]
    fn ties_broken_by_lower_index() {
        // vertex 0 sits equidistant from 1 and 2
        let ps = line(&[0.0, 1.0, -1.0]);
        let lists = knn_lists(&ps, 1);
        assert_eq!(lists[0], vec![1]);
        assert_eq!(brute_force_knn_lists(&ps, 1).unwrap(), lists);
    }

    #[test]
    fn duplicate_points_are_distinct_vertices() {
        let ps = line(&[0.5, 0.5, 0.5, 4.0]);
        let g = build_knn_graph(&ps, 1);
        assert_eq!(g, brute_force_knn_graph(&ps, 1).unwrap());
        assert!(g.has_edge(0, 1));
    }

    #[test]
    fn mismatched_sizes_rejected() {
        let g = build_knn_graph(&line(&[0.0, 1.0]), 1);
        assert!(longest_edge_length(&g, &line(&[0.0])).is_err());
    }

    #[test]
    fn brute_force_guard() {
        let r = Region::new(0.0, 0.0, 110.0, 110.0).unwrap();
        let ps = sample_poisson_pointset(r, 1.0, 3).unwrap();
        assert!(ps.len() > BRUTE_FORCE_LIMIT);
        assert!(matches!(
            brute_force_knn_graph(&ps, 1),
            Err(LabError::Size(_))
        ));
    }

    #[test]
    fn matches_oracle_on_random_instances() {
        let r = Region::new(0.0, 0.0, 25.0, 20.0).unwrap();
        for seed in 0..5 {
            let ps = sample_poisson_pointset(r, 1.0, seed).unwrap();
            let g = build_knn_graph(&ps, 7);
            assert_eq!(g, brute_force_knn_graph(&ps, 7).unwrap());
            let oracle_max = g
                .edges()
                .map(|(i, j)| ps.points[i].dist(ps.points[j]))
                .fold(0.0, f64::max);
            assert_eq!(longest_edge_length(&g, &ps).unwrap(), oracle_max);
        }
    }
}
