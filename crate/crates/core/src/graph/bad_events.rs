use serde::{Deserialize, Serialize};

use super::components::{connected_components, find_close_small_pairs, ComponentSummary};
use super::counting::{
    check_square, counting_field, local_probe, CountingField, CountingGeometry, GridPoint,
    LocalProbe,
};
use crate::error::Result;
use crate::model::{build_knn_graph, longest_edge_length, KnnGraph, PointSet};

/// The seven pathologies that break the correspondence between small
/// components and grid charges.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadEventFlags {
    /// Global edge of length at least `λ√(log n)`.
    pub d1: bool,
    /// Some probed local graph has such an edge.
    pub d2: bool,
    /// Two or more non-small components.
    pub d3: bool,
    /// A small component charged outside Γ.
    pub d4: bool,
    /// Two small components closer than `8λ√(log n)`.
    pub d5: bool,
    /// Ambiguous charge in the global graph.
    pub d6: bool,
    /// Ambiguous charge in some probed local graph.
    pub d7: bool,
}

impl BadEventFlags {
    pub fn any(&self) -> bool {
        self.d1 || self.d2 || self.d3 || self.d4 || self.d5 || self.d6 || self.d7
    }
}

/// Everything derived from one global graph and its probed windows.
#[derive(Clone, Debug)]
pub struct GlobalAnalysis {
    pub components: Vec<ComponentSummary>,
    pub longest_edge: f64,
    pub close_pairs: Vec<(usize, usize)>,
    pub field: CountingField,
    pub probes: Vec<LocalProbe>,
    pub flags: BadEventFlags,
}

impl GlobalAnalysis {
    pub fn small_count(&self) -> usize {
        self.components.iter().filter(|c| c.is_small).count()
    }

    pub fn is_connected(&self) -> bool {
        self.components.len() <= 1
    }
}

/// Analyses a prebuilt global graph on the square of area `n`, probing the
/// local graphs at `probe_points`.
pub fn analyze_global(
    graph: &KnnGraph,
    pointset: &PointSet,
    geometry: &CountingGeometry,
    probe_points: &[GridPoint],
) -> Result<GlobalAnalysis> {
    check_square(pointset, geometry)?;
    let threshold = geometry.small_threshold();
    let components = connected_components(graph, pointset, threshold)?;
    let longest_edge = longest_edge_length(graph, pointset)?;
    let close_pairs = find_close_small_pairs(&components, pointset, geometry.close_threshold());
    let field = counting_field(&components, pointset, geometry);
    let probes = probe_points
        .iter()
        .map(|&x| local_probe(pointset, graph.k, geometry, x))
        .collect::<Result<Vec<_>>>()?;
    let flags = BadEventFlags {
        d1: longest_edge >= threshold,
        d2: probes.iter().any(|p| p.long_edge),
        d3: components.iter().filter(|c| !c.is_small).count() >= 2,
        d4: field.outside_gamma > 0,
        d5: !close_pairs.is_empty(),
        d6: field.ambiguous > 0,
        d7: probes.iter().any(|p| p.ambiguous),
    };
    Ok(GlobalAnalysis {
        components,
        longest_edge,
        close_pairs,
        field,
        probes,
        flags,
    })
}

/// Bad-event flags for `S_{n,k}`. With `probe_points = None` every point
/// of Γ is probed.
pub fn detect_bad_events(
    pointset: &PointSet,
    k: usize,
    geometry: &CountingGeometry,
    probe_points: Option<&[GridPoint]>,
) -> Result<BadEventFlags> {
    let graph = build_knn_graph(pointset, k);
    let all: Vec<GridPoint>;
    let probes = match probe_points {
        Some(p) => p,
        None => {
            all = geometry.gamma_points().collect();
            &all
        }
    };
    Ok(analyze_global(&graph, pointset, geometry, probes)?.flags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Point;

    fn geo() -> CountingGeometry {
        CountingGeometry::new(10_000.0, std::f64::consts::E.powi(2)).unwrap()
    }

    #[test]
    fn empty_pointset_has_no_bad_events() {
        let g = geo();
        let ps = PointSet::from_points(vec![], g.square()).unwrap();
        let flags = detect_bad_events(&ps, 3, &g, None).unwrap();
        assert!(!flags.any());
    }

    #[test]
    fn short_edge_does_not_fire_d1() {
        let g = geo();
        let ps = PointSet::from_points(
            vec![Point::new(50.0, 50.2), Point::new(51.0, 50.2)],
            g.square(),
        )
        .unwrap();
        let flags = detect_bad_events(&ps, 1, &g, Some(&[])).unwrap();
        assert!(!flags.d1);
        assert!(!flags.d5);
    }

    #[test]
    fn separated_clusters_fire_d5_and_d4() {
        let g = geo();
        let t = g.small_threshold();
        let cluster = |cx: f64, cy: f64| {
            vec![
                Point::new(cx, cy),
                Point::new(cx + 0.3, cy + 0.1),
                Point::new(cx + 0.1, cy + 0.35),
            ]
        };
        let mut pts = cluster(30.2, 30.3);
        pts.extend(cluster(30.2 + 2.0 * t, 30.3));
        let ps = PointSet::from_points(pts, g.square()).unwrap();
        let flags = detect_bad_events(&ps, 2, &g, Some(&[])).unwrap();
        assert!(flags.d5);
        assert!(flags.d4, "cluster at (30, 30) is charged outside Γ");
        assert!(!flags.d1);
    }

    #[test]
    fn long_edge_fires_d1_and_d3() {
        let g = geo();
        let t = g.small_threshold();
        let ps = PointSet::from_points(
            vec![
                Point::new(5.0, 5.0),
                Point::new(5.0 + 1.5 * t, 5.0),
                Point::new(5.0, 60.0),
                Point::new(5.0 + 1.5 * t, 60.0),
            ],
            g.square(),
        )
        .unwrap();
        let flags = detect_bad_events(&ps, 1, &g, Some(&[])).unwrap();
        assert!(flags.d1);
        assert!(flags.d3);
    }

    #[test]
    fn half_integer_bottom_vertex_fires_d6() {
        let g = geo();
        let ps = PointSet::from_points(
            vec![Point::new(50.5, 50.2), Point::new(51.0, 50.7)],
            g.square(),
        )
        .unwrap();
        let flags = detect_bad_events(&ps, 1, &g, Some(&[])).unwrap();
        assert!(flags.d6);
        // the same component seen from a probed window
        let flags = detect_bad_events(&ps, 1, &g, Some(&[GridPoint::new(50, 50)])).unwrap();
        assert!(flags.d7);
    }
}
