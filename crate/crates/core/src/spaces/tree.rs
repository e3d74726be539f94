//! Finite weighted metric trees with exact path-sum distances.
//!
//! Points live either on a vertex or strictly inside an edge, so all
//! distances are sums of edge weights and offsets along the unique
//! path — there is no ambient embedding and no iterative solving.
//! This makes trees the exact (delta = 0) reference space: inequality
//! margins of exactly zero are meaningful here.

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::metric::{GeodesicSpace, SpaceKind};

/// A point of a metric tree: a vertex, or a position strictly inside
/// an edge (`offset` measured from the edge's `u` endpoint).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreePoint {
    Vertex(usize),
    OnEdge { edge: usize, offset: f64 },
}

/// A connected acyclic weighted graph, rooted at vertex 0 for LCA
/// bookkeeping. Immutable after construction.
#[derive(Debug, Clone)]
pub struct MetricTree {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    /// parent[v] = (parent vertex, connecting edge) for v != 0.
    parent: Vec<Option<(usize, usize)>>,
    /// Number of edges from the root.
    hops: Vec<usize>,
    /// Cumulative edge lengths, for length-proportional sampling.
    cum_len: Vec<f64>,
    total_len: f64,
    /// Smallest incident edge id per vertex (for point encoding).
    anchor_edge: Vec<Option<usize>>,
}

// Snap tolerance for deciding that an offset has reached an edge
// endpoint during geodesic walks, relative to the scale of the walk.
fn snap_eps(scale: f64) -> f64 {
    1e-12 * (1.0 + scale.abs())
}

impl MetricTree {
    /// Build a tree on `n` vertices from `n - 1` weighted edges.
    /// Rejects disconnected inputs, bad indices, and nonpositive
    /// weights; connected + (n-1) edges implies acyclicity.
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("tree needs at least one vertex"));
        }
        if edges.len() != n - 1 {
            return Err(Error::invalid(format!(
                "tree on {n} vertices needs {} edges, got {}",
                n - 1,
                edges.len()
            )));
        }
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (i, &(u, v, w)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge {i} touches vertex out of range: ({u}, {v}) with {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::invalid(format!("edge {i} is a self-loop at {u}")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::invalid(format!(
                    "edge {i} has nonpositive or non-finite length {w}"
                )));
            }
            adj[u].push((v, i));
            adj[v].push((u, i));
        }
        // BFS from the root to orient the tree and verify connectivity.
        let mut parent = vec![None; n];
        let mut hops = vec![0usize; n];
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        let mut visited = 1;
        while let Some(u) = queue.pop_front() {
            for &(v, e) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    visited += 1;
                    parent[v] = Some((u, e));
                    hops[v] = hops[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        if visited != n {
            return Err(Error::invalid("tree edge list is not connected"));
        }
        let mut cum_len = Vec::with_capacity(edges.len());
        let mut total_len = 0.0;
        for &(_, _, w) in edges {
            total_len += w;
            cum_len.push(total_len);
        }
        let anchor_edge = (0..n)
            .map(|v| adj[v].iter().map(|&(_, e)| e).min())
            .collect();
        Ok(MetricTree {
            n,
            edges: edges.to_vec(),
            parent,
            hops,
            cum_len,
            total_len,
            anchor_edge,
        })
    }

    /// Parse the edge-list text format: one `u v weight` triple per
    /// line; blank lines and lines starting with `#` are skipped. The
    /// vertex count is `1 + max index`.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let edges = parse_edge_lines(text)?;
        if edges.is_empty() {
            return Err(Error::parse("edge list is empty"));
        }
        let n = edges
            .iter()
            .map(|&(u, v, _)| u.max(v))
            .max()
            .unwrap()
            + 1;
        MetricTree::new(n, &edges)
    }

    /// The path 0 - 1 - ... - (n-1) with constant edge length `step`.
    pub fn line(n: usize, step: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("line tree needs at least two vertices"));
        }
        let edges: Vec<(usize, usize, f64)> = (0..n - 1).map(|i| (i, i + 1, step)).collect();
        MetricTree::new(n, &edges)
    }

    /// Random tree: vertex i attaches to a uniformly random earlier
    /// vertex with edge length in [0.5, 2).
    pub fn random(n: usize, rng: &mut dyn RngCore) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("tree needs at least one vertex"));
        }
        let mut edges = Vec::with_capacity(n.saturating_sub(1));
        for i in 1..n {
            let p = rng.gen_range(0..i);
            let w = rng.gen_range(0.5..2.0);
            edges.push((p, i, w));
        }
        MetricTree::new(n, &edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: usize) -> Option<(usize, usize, f64)> {
        self.edges.get(e).copied()
    }

    pub fn total_length(&self) -> f64 {
        self.total_len
    }

    /// Checked vertex point.
    pub fn vertex(&self, v: usize) -> Result<TreePoint> {
        if v >= self.n {
            return Err(Error::invalid(format!(
                "vertex {v} out of range (tree has {} vertices)",
                self.n
            )));
        }
        Ok(TreePoint::Vertex(v))
    }

    /// Checked interior edge point; offsets must be strictly inside.
    pub fn point_on_edge(&self, e: usize, offset: f64) -> Result<TreePoint> {
        let Some(&(_, _, w)) = self.edges.get(e) else {
            return Err(Error::invalid(format!("edge {e} out of range")));
        };
        if !(offset > 0.0 && offset < w) || !offset.is_finite() {
            return Err(Error::invalid(format!(
                "offset {offset} not strictly inside edge {e} of length {w}"
            )));
        }
        Ok(TreePoint::OnEdge { edge: e, offset })
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while self.hops[a] > self.hops[b] {
            a = self.parent[a].expect("non-root has a parent").0;
        }
        while self.hops[b] > self.hops[a] {
            b = self.parent[b].expect("non-root has a parent").0;
        }
        while a != b {
            a = self.parent[a].expect("non-root has a parent").0;
            b = self.parent[b].expect("non-root has a parent").0;
        }
        a
    }

    /// Exact path-sum distance between vertices: edge weights are
    /// accumulated in a fixed order (u-side chain, then v-side), so
    /// equal queries always produce bitwise-equal results.
    pub fn vertex_distance(&self, u: usize, v: usize) -> f64 {
        let l = self.lca(u, v);
        let mut d = 0.0;
        let mut a = u;
        while a != l {
            let (p, e) = self.parent[a].expect("non-root has a parent");
            d += self.edges[e].2;
            a = p;
        }
        let mut b = v;
        while b != l {
            let (p, e) = self.parent[b].expect("non-root has a parent");
            d += self.edges[e].2;
            b = p;
        }
        d
    }

    /// The oriented edge sequence of the path a -> b:
    /// (from_vertex, edge, to_vertex) triples.
    fn path_edges(&self, a: usize, b: usize) -> Vec<(usize, usize, usize)> {
        let l = self.lca(a, b);
        let mut up = Vec::new();
        let mut x = a;
        while x != l {
            let (p, e) = self.parent[x].expect("non-root has a parent");
            up.push((x, e, p));
            x = p;
        }
        let mut down = Vec::new();
        let mut y = b;
        while y != l {
            let (p, e) = self.parent[y].expect("non-root has a parent");
            down.push((p, e, y));
            y = p;
        }
        down.reverse();
        up.extend(down);
        up
    }

    /// Exit options of a point: (vertex, cost to reach it). A vertex
    /// point exits through itself at cost 0; an interior edge point
    /// exits through either endpoint.
    fn anchors(&self, p: &TreePoint) -> Vec<(usize, f64)> {
        match *p {
            TreePoint::Vertex(v) => vec![(v, 0.0)],
            TreePoint::OnEdge { edge, offset } => {
                let (u, v, w) = self.edges[edge];
                vec![(u, offset), (v, w - offset)]
            }
        }
    }

    /// Best (cost, p-anchor, q-anchor) combination realizing the
    /// distance; ties resolved by iteration order, so deterministic.
    fn best_route(&self, p: &TreePoint, q: &TreePoint) -> (f64, (usize, f64), (usize, f64)) {
        let pa = self.anchors(p);
        let qa = self.anchors(q);
        let mut best: Option<(f64, (usize, f64), (usize, f64))> = None;
        for &(va, ca) in &pa {
            for &(vb, cb) in &qa {
                let d = ca + self.vertex_distance(va, vb) + cb;
                if best.map_or(true, |(bd, _, _)| d < bd) {
                    best = Some((d, (va, ca), (vb, cb)));
                }
            }
        }
        best.expect("anchor sets are nonempty")
    }

    pub fn distance(&self, p: &TreePoint, q: &TreePoint) -> f64 {
        match (p, q) {
            (TreePoint::Vertex(a), TreePoint::Vertex(b)) => self.vertex_distance(*a, *b),
            (
                TreePoint::OnEdge { edge: e1, offset: o1 },
                TreePoint::OnEdge { edge: e2, offset: o2 },
            ) if e1 == e2 => (o1 - o2).abs(),
            _ => self.best_route(p, q).0,
        }
    }

    /// Point at arclength `t` from `p` along the unique path to `q`,
    /// with `t` clamped into [0, d(p, q)].
    pub fn geodesic_point(&self, p: &TreePoint, q: &TreePoint, t: f64) -> TreePoint {
        let d = self.distance(p, q);
        let t = t.clamp(0.0, d);
        let eps = snap_eps(d);
        if t <= eps {
            return *p;
        }
        if t >= d - eps {
            return *q;
        }
        // Both strictly inside the same edge: pure offset arithmetic.
        if let (
            TreePoint::OnEdge { edge: e1, offset: o1 },
            TreePoint::OnEdge { edge: e2, offset: o2 },
        ) = (p, q)
        {
            if e1 == e2 {
                let dir = if o2 >= o1 { 1.0 } else { -1.0 };
                return TreePoint::OnEdge { edge: *e1, offset: o1 + dir * t };
            }
        }
        let (_, (va, ca), (vb, cb)) = self.best_route(p, q);
        // Still inside p's own edge, moving toward the exit vertex.
        if t < ca - eps {
            let TreePoint::OnEdge { edge, offset } = *p else {
                unreachable!("vertex anchors have cost 0 < t");
            };
            let (u, _, _) = self.edges[edge];
            let o = if va == u { offset - t } else { offset + t };
            return self.snap_offset(edge, o);
        }
        let mut r = t - ca;
        if r <= eps {
            return TreePoint::Vertex(va);
        }
        // Walk the vertex path between the two exit vertices.
        for (from, e, to) in self.path_edges(va, vb) {
            let w = self.edges[e].2;
            if r <= eps {
                return TreePoint::Vertex(from);
            }
            if r < w - eps {
                let (u, _, _) = self.edges[e];
                let o = if from == u { r } else { w - r };
                return self.snap_offset(e, o);
            }
            if r <= w + eps {
                return TreePoint::Vertex(to);
            }
            r -= w;
        }
        // Residual travel happens inside q's edge, entering from vb.
        if r <= eps {
            return TreePoint::Vertex(vb);
        }
        let TreePoint::OnEdge { edge, offset } = *q else {
            // q is a vertex; its anchor cost is 0, so r should be 0.
            return *q;
        };
        let (u, _, w) = self.edges[edge];
        let o = if vb == u { r } else { w - r };
        if (o - offset).abs() <= eps.max(snap_eps(cb)) {
            return *q;
        }
        self.snap_offset(edge, o)
    }

    fn snap_offset(&self, e: usize, o: f64) -> TreePoint {
        let (u, v, w) = self.edges[e];
        let eps = snap_eps(w);
        if o <= eps {
            TreePoint::Vertex(u)
        } else if o >= w - eps {
            TreePoint::Vertex(v)
        } else {
            TreePoint::OnEdge { edge: e, offset: o }
        }
    }
}

impl GeodesicSpace for MetricTree {
    type Point = TreePoint;

    fn kind(&self) -> SpaceKind {
        SpaceKind::MetricTree
    }

    fn distance(&self, a: &TreePoint, b: &TreePoint) -> f64 {
        MetricTree::distance(self, a, b)
    }

    fn geodesic_point(&self, a: &TreePoint, b: &TreePoint, t: f64) -> TreePoint {
        MetricTree::geodesic_point(self, a, b, t)
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> TreePoint {
        if self.edges.is_empty() {
            return TreePoint::Vertex(0);
        }
        // Edge chosen proportionally to length, then a uniform offset.
        let r = rng.gen_range(0.0..self.total_len);
        let e = match self.cum_len.partition_point(|&c| c <= r) {
            i if i >= self.edges.len() => self.edges.len() - 1,
            i => i,
        };
        let prev = if e == 0 { 0.0 } else { self.cum_len[e - 1] };
        self.snap_offset(e, r - prev)
    }

    fn delta_hint(&self) -> Option<f64> {
        Some(0.0)
    }

    fn point_coords(&self, p: &TreePoint) -> Vec<f64> {
        match *p {
            TreePoint::OnEdge { edge, offset } => vec![edge as f64, offset],
            TreePoint::Vertex(v) => match self.anchor_edge[v] {
                Some(e) => {
                    let (u, _, w) = self.edges[e];
                    vec![e as f64, if u == v { 0.0 } else { w }]
                }
                // Single-vertex tree: no edges to anchor to.
                None => vec![-1.0, v as f64],
            },
        }
    }

    fn coord_names(&self) -> &'static [&'static str] {
        &["edge", "offset"]
    }

    fn point_from_coords(&self, coords: &[f64]) -> Result<TreePoint> {
        if coords.len() != 2 {
            return Err(Error::parse(format!(
                "tree points need 2 coordinates, got {}",
                coords.len()
            )));
        }
        if coords[0] < 0.0 {
            return self.vertex(coords[1] as usize);
        }
        let e = coords[0].round() as usize;
        let Some(&(u, v, w)) = self.edges.get(e) else {
            return Err(Error::parse(format!("edge index {e} out of range")));
        };
        let o = coords[1];
        if !(0.0..=w).contains(&o) {
            return Err(Error::parse(format!(
                "offset {o} outside edge {e} of length {w}"
            )));
        }
        let eps = snap_eps(w);
        if o <= eps {
            Ok(TreePoint::Vertex(u))
        } else if o >= w - eps {
            Ok(TreePoint::Vertex(v))
        } else {
            Ok(TreePoint::OnEdge { edge: e, offset: o })
        }
    }
}

/// Shared edge-list line parser (`u v weight` per line) used by both
/// trees and graph spaces.
pub(crate) fn parse_edge_lines(text: &str) -> Result<Vec<(usize, usize, f64)>> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(Error::parse(format!(
                "line {}: expected `u v weight`, got {line:?}",
                lineno + 1
            )));
        }
        let u: usize = tokens[0]
            .parse()
            .map_err(|_| Error::parse(format!("line {}: bad vertex {:?}", lineno + 1, tokens[0])))?;
        let v: usize = tokens[1]
            .parse()
            .map_err(|_| Error::parse(format!("line {}: bad vertex {:?}", lineno + 1, tokens[1])))?;
        let w: f64 = tokens[2]
            .parse()
            .map_err(|_| Error::parse(format!("line {}: bad weight {:?}", lineno + 1, tokens[2])))?;
        edges.push((u, v, w));
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Tripod: center 0, legs to 1 (length 3), 2 (length 4), 3 (length 5).
    fn tripod() -> MetricTree {
        MetricTree::new(4, &[(0, 1, 3.0), (0, 2, 4.0), (0, 3, 5.0)]).unwrap()
    }

    #[test]
    fn tripod_distances_match_hand_path_sums() {
        let t = tripod();
        let v = TreePoint::Vertex;
        assert_eq!(t.distance(&v(1), &v(2)), 7.0);
        assert_eq!(t.distance(&v(1), &v(3)), 8.0);
        assert_eq!(t.distance(&v(2), &v(3)), 9.0);
        assert_eq!(t.distance(&v(1), &v(1)), 0.0);
        // Interior points: 1 unit from the center on two legs.
        let a = t.point_on_edge(0, 2.0).unwrap(); // 2 from 0, 1 from 1
        let b = t.point_on_edge(1, 1.0).unwrap(); // 1 from 0
        assert_eq!(t.distance(&a, &b), 3.0);
        assert_eq!(t.distance(&a, &v(0)), 2.0);
        assert_eq!(t.distance(&b, &a), 3.0);
    }

    #[test]
    fn same_edge_distance_is_offset_difference() {
        let t = tripod();
        let a = t.point_on_edge(2, 1.25).unwrap();
        let b = t.point_on_edge(2, 4.5).unwrap();
        assert_eq!(t.distance(&a, &b), 3.25);
        assert_eq!(t.geodesic_point(&a, &b, 1.0), t.point_on_edge(2, 2.25).unwrap());
    }

    #[test]
    fn geodesic_point_walks_across_the_center() {
        let t = tripod();
        let a = t.point_on_edge(0, 2.0).unwrap(); // on leg to 1, 2 from center
        let b = t.point_on_edge(1, 3.0).unwrap(); // on leg to 2, 3 from center
        let d = t.distance(&a, &b);
        assert_eq!(d, 5.0);
        assert_eq!(t.geodesic_point(&a, &b, 0.0), a);
        assert_eq!(t.geodesic_point(&a, &b, 5.0), b);
        assert_eq!(t.geodesic_point(&a, &b, 1.0), t.point_on_edge(0, 3.0).unwrap());
        assert_eq!(t.geodesic_point(&a, &b, 2.0), TreePoint::Vertex(0));
        assert_eq!(t.geodesic_point(&a, &b, 3.5), t.point_on_edge(1, 1.5).unwrap());
    }

    #[test]
    fn geodesic_parametrization_invariants_hold_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = MetricTree::random(24, &mut rng).unwrap();
        for _ in 0..500 {
            let p = t.sample_point(&mut rng);
            let q = t.sample_point(&mut rng);
            let d = t.distance(&p, &q);
            for frac in [0.0, 0.17, 0.5, 0.83, 1.0] {
                let s = frac * d;
                let g = t.geodesic_point(&p, &q, s);
                assert!((t.distance(&p, &g) - s).abs() < 1e-9);
                assert!((t.distance(&g, &q) - (d - s)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn metric_axioms_hold_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = MetricTree::random(16, &mut rng).unwrap();
        for _ in 0..2000 {
            let x = t.sample_point(&mut rng);
            let y = t.sample_point(&mut rng);
            let z = t.sample_point(&mut rng);
            assert_eq!(t.distance(&x, &x), 0.0);
            assert_eq!(t.distance(&x, &y), t.distance(&y, &x));
            assert!(t.distance(&x, &z) <= t.distance(&x, &y) + t.distance(&y, &z) + 1e-9);
        }
    }

    #[test]
    fn constructor_rejects_malformed_trees() {
        assert!(MetricTree::new(0, &[]).is_err());
        assert!(MetricTree::new(3, &[(0, 1, 1.0)]).is_err()); // missing edge
        assert!(MetricTree::new(2, &[(0, 0, 1.0)]).is_err()); // self-loop
        assert!(MetricTree::new(2, &[(0, 5, 1.0)]).is_err()); // bad index
        assert!(MetricTree::new(2, &[(0, 1, 0.0)]).is_err()); // zero length
        assert!(MetricTree::new(2, &[(0, 1, f64::NAN)]).is_err());
        // 4 vertices, 3 edges, but disconnected (duplicate edge).
        assert!(MetricTree::new(4, &[(0, 1, 1.0), (0, 1, 2.0), (2, 3, 1.0)]).is_err());
    }

    #[test]
    fn edge_list_roundtrip_and_errors() {
        let t = MetricTree::from_edge_list("# comment\n0 1 2.5\n\n1 2 1.0\n").unwrap();
        assert_eq!(t.vertex_count(), 3);
        assert_eq!(
            t.distance(&TreePoint::Vertex(0), &TreePoint::Vertex(2)),
            3.5
        );
        assert!(MetricTree::from_edge_list("").is_err());
        assert!(MetricTree::from_edge_list("0 1").is_err());
        assert!(MetricTree::from_edge_list("0 1 x").is_err());
    }

    #[test]
    fn point_on_edge_requires_strict_interior() {
        let t = tripod();
        assert!(t.point_on_edge(0, 0.0).is_err());
        assert!(t.point_on_edge(0, 3.0).is_err());
        assert!(t.point_on_edge(0, -1.0).is_err());
        assert!(t.point_on_edge(9, 0.5).is_err());
        assert!(t.point_on_edge(0, 1.5).is_ok());
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let t = tripod();
        let collect = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..32).map(|_| t.sample_point(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(collect(9), collect(9));
        assert_ne!(collect(9), collect(10));
    }

    #[test]
    fn coords_roundtrip_for_both_point_kinds() {
        let t = tripod();
        let pts = [
            TreePoint::Vertex(0),
            TreePoint::Vertex(3),
            t.point_on_edge(1, 0.75).unwrap(),
        ];
        for p in pts {
            let c = t.point_coords(&p);
            let back = t.point_from_coords(&c).unwrap();
            assert_eq!(t.distance(&p, &back), 0.0, "{p:?} -> {c:?} -> {back:?}");
        }
        assert!(t.point_from_coords(&[0.0]).is_err());
        assert!(t.point_from_coords(&[7.0, 0.5]).is_err());
        assert!(t.point_from_coords(&[0.0, 99.0]).is_err());
    }
}
