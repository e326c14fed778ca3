use serde::{Deserialize, Serialize};

use super::union_find::UnionFind;
use crate::error::{invalid, Result};
use crate::model::{KnnGraph, Point, PointSet, Region};

/// Above this size the diameter is taken over the convex hull only.
const PAIRWISE_DIAMETER_LIMIT: usize = 5000;

/// One connected component of a geometric graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub component_id: usize,
    pub vertex_indices: Vec<usize>,
    pub size: usize,
    /// Largest pairwise distance between member points, or `+inf` when it
    /// is known to reach the small-component threshold.
    pub diameter: f64,
    /// Bounding box; may be degenerate for components of one point.
    pub bbox: Region,
    pub bottom_most_vertex: usize,
    /// `false` when another member shares the minimal y-coordinate.
    pub bottom_most_unique: bool,
    pub is_small: bool,
}

/// Vertex labels: `labels[v]` is the component id of `v`. Ids are assigned
/// in order of each component's smallest vertex.
pub fn component_labels(graph: &KnnGraph) -> (Vec<usize>, usize) {
    let n = graph.point_count;
    let mut uf = UnionFind::new(n);
    for (i, j) in graph.edges() {
        uf.union(i, j);
    }
    let mut root_label = vec![usize::MAX; n];
    let mut labels = vec![0; n];
    let mut next = 0;
    for (v, label) in labels.iter_mut().enumerate() {
        let r = uf.find(v);
        if root_label[r] == usize::MAX {
            root_label[r] = next;
            next += 1;
        }
        *label = root_label[r];
    }
    (labels, next)
}

/// Connected components with geometric summaries. `small_threshold` is the
/// strict upper bound on the diameter of a small component.
pub fn connected_components(
    graph: &KnnGraph,
    pointset: &PointSet,
    small_threshold: f64,
) -> Result<Vec<ComponentSummary>> {
    if graph.point_count != pointset.len() {
        return invalid("graph and pointset sizes differ");
    }
    if !(small_threshold > 0.0) {
        return invalid(format!(
            "small threshold must be positive, got {small_threshold}"
        ));
    }
    let (labels, count) = component_labels(graph);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (v, &c) in labels.iter().enumerate() {
        members[c].push(v);
    }
    let pts = &pointset.points;
    Ok(members
        .into_iter()
        .enumerate()
        .map(|(id, verts)| summarize(id, verts, pts, small_threshold))
        .collect())
}

fn summarize(id: usize, verts: Vec<usize>, pts: &[Point], threshold: f64) -> ComponentSummary {
    let bbox = Region::bounding(verts.iter().map(|&v| pts[v])).expect("components are nonempty");
    let mut bottom = verts[0];
    let mut unique = true;
    for &v in &verts[1..] {
        if pts[v].y < pts[bottom].y {
            bottom = v;
            unique = true;
        } else if pts[v].y == pts[bottom].y {
            unique = false;
        }
    }
    let diameter = capped_diameter(&verts, pts, threshold);
    ComponentSummary {
        component_id: id,
        size: verts.len(),
        vertex_indices: verts,
        diameter,
        bbox,
        bottom_most_vertex: bottom,
        bottom_most_unique: unique,
        is_small: diameter < threshold,
    }
}

/// Exact diameter when below `threshold`, `+inf` otherwise.
fn capped_diameter(verts: &[usize], pts: &[Point], threshold: f64) -> f64 {
    if verts.len() <= 1 {
        return 0.0;
    }
    let bbox = Region::bounding(verts.iter().map(|&v| pts[v])).unwrap();
    if bbox.width().max(bbox.height()) >= threshold {
        return f64::INFINITY;
    }
    let cap2 = threshold * threshold;
    let scan = |ids: &[Point]| -> f64 {
        let mut best = 0.0f64;
        for (a, &p) in ids.iter().enumerate() {
            for &q in &ids[a + 1..] {
                let d2 = p.dist2(q);
                if d2 >= cap2 {
                    return f64::INFINITY;
                }
                best = best.max(d2);
            }
        }
        best.sqrt()
    };
    if verts.len() <= PAIRWISE_DIAMETER_LIMIT {
        let member_pts: Vec<Point> = verts.iter().map(|&v| pts[v]).collect();
        scan(&member_pts)
    } else {
        scan(&convex_hull(verts.iter().map(|&v| pts[v]).collect()))
    }
}

/// Andrew's monotone chain; returns hull vertices (collinear points dropped).
pub(crate) fn convex_hull(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross =
        |o: Point, a: Point, b: Point| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for &p in pts.iter().chain(pts.iter().rev().skip(1)) {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Unordered pairs `(a, b)`, `a < b`, of distinct small components having
/// two member points at distance strictly below `close_threshold`.
pub fn find_close_small_pairs(
    components: &[ComponentSummary],
    pointset: &PointSet,
    close_threshold: f64,
) -> Vec<(usize, usize)> {
    let small: Vec<&ComponentSummary> = components.iter().filter(|c| c.is_small).collect();
    let pts = &pointset.points;
    let t2 = close_threshold * close_threshold;
    let mut pairs = Vec::new();
    for (i, a) in small.iter().enumerate() {
        for b in &small[i + 1..] {
            if a.bbox.distance_to(&b.bbox) >= close_threshold {
                continue;
            }
            let close = a
                .vertex_indices
                .iter()
                .any(|&u| b.vertex_indices.iter().any(|&v| pts[u].dist2(pts[v]) < t2));
            if close {
                let (x, y) = (a.component_id, b.component_id);
                pairs.push((x.min(y), x.max(y)));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// True iff the graph has at most one component.
pub fn is_connected(graph: &KnnGraph) -> bool {
    component_labels(graph).1 <= 1
}
