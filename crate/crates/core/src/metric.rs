//! Core metric abstractions: the geodesic-space trait, discrete point
//! sets with a resolution tag, and the hyperbolicity / Hausdorff /
//! projection operations everything else is built on.

use rand::RngCore;

use crate::error::{Error, Result};

/// Which model space a handle refers to. Mostly used for labeling
/// reports; all numeric code is generic over [`GeodesicSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    HyperbolicPlane,
    MetricTree,
    Graph,
}

impl SpaceKind {
    pub fn label(self) -> &'static str {
        match self {
            SpaceKind::HyperbolicPlane => "h2",
            SpaceKind::MetricTree => "tree",
            SpaceKind::Graph => "graph",
        }
    }
}

impl std::fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A geodesic metric space we can compute in: exact distances, points
/// along geodesics, and random points for sampling experiments.
///
/// `geodesic_point(a, b, t)` returns the point at arclength `t` from `a`
/// on a geodesic from `a` to `b`. Implementations clamp `t` into
/// `[0, d(a, b)]` and return `a` when `a == b`; the space-specific
/// checked wrappers (`h2_geodesic_point`, `MetricTree::geodesic_point_checked`)
/// reject out-of-range `t` instead of clamping.
pub trait GeodesicSpace {
    type Point: Clone + PartialEq + std::fmt::Debug;

    fn kind(&self) -> SpaceKind;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64;

    fn geodesic_point(&self, a: &Self::Point, b: &Self::Point, t: f64) -> Self::Point;

    /// Draw a random point from the space's sampling region.
    fn sample_point(&self, rng: &mut dyn RngCore) -> Self::Point;

    /// Known hyperbolicity constant, when the space has one for free
    /// (trees: exactly 0). `None` means "estimate it".
    fn delta_hint(&self) -> Option<f64> {
        None
    }

    /// Numeric coordinates for one point, used by the CSV path format.
    fn point_coords(&self, p: &Self::Point) -> Vec<f64>;

    /// Column names matching [`GeodesicSpace::point_coords`].
    fn coord_names(&self) -> &'static [&'static str];

    /// Rebuild a point from its CSV coordinates.
    fn point_from_coords(&self, coords: &[f64]) -> Result<Self::Point>;
}

/// A finite point cloud standing in for a subset of the space, tagged
/// with the sampling resolution that produced it.
///
/// Invariants (enforced by the constructor): the cloud is nonempty and
/// `resolution > 0`. The resolution is the guaranteed sampling density —
/// every point of the idealized subset is within `resolution` of some
/// listed point — and downstream checks use it to size their numeric
/// slack.
#[derive(Debug, Clone)]
pub struct PointSet<P> {
    points: Vec<P>,
    resolution: f64,
}

impl<P: Clone> PointSet<P> {
    pub fn new(points: Vec<P>, resolution: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("point set must be nonempty"));
        }
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::invalid(format!(
                "point set resolution must be positive and finite, got {resolution}"
            )));
        }
        Ok(PointSet { points, resolution })
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // nonempty by construction
    }
}

/// Gromov product (x . y)_w = (d(x,w) + d(y,w) - d(x,y)) / 2, clamped
/// at zero against rounding (the exact value is nonnegative by the
/// triangle inequality).
pub fn gromov_product<S: GeodesicSpace>(
    space: &S,
    x: &S::Point,
    y: &S::Point,
    w: &S::Point,
) -> f64 {
    let v = 0.5 * (space.distance(x, w) + space.distance(y, w) - space.distance(x, y));
    v.max(0.0)
}

/// Worst four-point hyperbolicity defect over the given quadruples:
/// for each (x, y, z, w) the defect is
/// `min((x.y)_w, (y.z)_w) - (x.z)_w`, and the estimate is the maximum
/// of these clamped at zero. A space is delta-hyperbolic iff the
/// supremum of this quantity over all quadruples is at most delta, so
/// the sampled maximum is a lower bound for the true constant.
pub fn estimate_delta<S: GeodesicSpace>(
    space: &S,
    quadruples: &[[S::Point; 4]],
) -> Result<f64> {
    if quadruples.is_empty() {
        return Err(Error::invalid("estimate_delta needs at least one quadruple"));
    }
    let mut worst = 0.0_f64;
    for [x, y, z, w] in quadruples {
        let a = gromov_product(space, x, y, w);
        let b = gromov_product(space, y, z, w);
        let c = gromov_product(space, x, z, w);
        worst = worst.max(a.min(b) - c);
    }
    Ok(worst.max(0.0))
}

/// Draw `n` independent quadruples from the space's sampling region.
pub fn sample_quadruples<S: GeodesicSpace>(
    space: &S,
    n: usize,
    rng: &mut dyn RngCore,
) -> Vec<[S::Point; 4]> {
    (0..n)
        .map(|_| {
            [
                space.sample_point(rng),
                space.sample_point(rng),
                space.sample_point(rng),
                space.sample_point(rng),
            ]
        })
        .collect()
}

/// Distance from `x` to the nearest point of `y`.
///
/// `y` is nonempty by construction, so this is total.
pub fn infdist<S: GeodesicSpace>(space: &S, x: &S::Point, y: &PointSet<S::Point>) -> f64 {
    y.points()
        .iter()
        .map(|q| space.distance(x, q))
        .fold(f64::INFINITY, f64::min)
}

/// Directed Hausdorff distance sup_{a in A} inf_{b in B} d(a, b).
pub fn directed_hausdorff<S: GeodesicSpace>(
    space: &S,
    a: &PointSet<S::Point>,
    b: &PointSet<S::Point>,
) -> f64 {
    a.points()
        .iter()
        .map(|p| infdist(space, p, b))
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance: the max of the two directed ones.
pub fn hausdorff_distance<S: GeodesicSpace>(
    space: &S,
    a: &PointSet<S::Point>,
    b: &PointSet<S::Point>,
) -> f64 {
    directed_hausdorff(space, a, b).max(directed_hausdorff(space, b, a))
}

/// All points of `y` within `tol` of realizing the infimum distance
/// from `x`. The infimum is attained on the finite cloud, so the
/// result is nonempty; it inherits `y`'s resolution.
pub fn proj_set<S: GeodesicSpace>(
    space: &S,
    x: &S::Point,
    y: &PointSet<S::Point>,
    tol: f64,
) -> PointSet<S::Point> {
    let d = infdist(space, x, y);
    let reps: Vec<S::Point> = y
        .points()
        .iter()
        .filter(|q| space.distance(x, q) <= d + tol)
        .cloned()
        .collect();
    // Nonempty: the minimizer itself passes the filter for any tol >= 0.
    PointSet::new(reps, y.resolution()).expect("projection set inherits nonemptiness")
}

/// First index of `y` attaining the infimum distance from `x` (within
/// 1e-12 absolute). Used where a canonical representative is needed.
pub fn proj_index<S: GeodesicSpace>(space: &S, x: &S::Point, y: &PointSet<S::Point>) -> usize {
    let d = infdist(space, x, y);
    y.points()
        .iter()
        .position(|q| space.distance(x, q) <= d + 1e-12)
        .expect("infimum is attained on a finite set")
}

/// Sampled quasiconvexity defect of the set `y`: draw `pair_samples`
/// random pairs of points of `y`, walk `t_samples` interior points of
/// the geodesic between each pair, and return the largest distance
/// from any of those geodesic points back to `y`.
///
/// Zero sample counts are allowed and give a defect of 0 (nothing was
/// checked). The result is a lower bound for the true quasiconvexity
/// constant of the underlying set.
pub fn quasiconvexity_defect<S: GeodesicSpace>(
    space: &S,
    y: &PointSet<S::Point>,
    pair_samples: usize,
    t_samples: usize,
    rng: &mut dyn RngCore,
) -> f64 {
    use rand::Rng;
    let n = y.len();
    let mut defect = 0.0_f64;
    for _ in 0..pair_samples {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        let (p, q) = (&y.points()[i], &y.points()[j]);
        let d = space.distance(p, q);
        if d == 0.0 {
            continue;
        }
        for k in 1..=t_samples {
            let t = d * k as f64 / (t_samples as f64 + 1.0);
            let g = space.geodesic_point(p, q, t);
            defect = defect.max(infdist(space, &g, y));
        }
    }
    defect
}

/// Discretize the geodesic from `a` to `b` at spacing at most
/// `resolution` (endpoints included). The returned set's resolution is
/// half the realized spacing: every point of the continuous geodesic
/// is within that of a sample.
pub fn discretize_geodesic<S: GeodesicSpace>(
    space: &S,
    a: &S::Point,
    b: &S::Point,
    resolution: f64,
) -> Result<PointSet<S::Point>> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::invalid(format!(
            "discretization resolution must be positive and finite, got {resolution}"
        )));
    }
    let d = space.distance(a, b);
    if d == 0.0 {
        return PointSet::new(vec![a.clone()], resolution);
    }
    let segments = (d / resolution).ceil().max(1.0) as usize;
    let step = d / segments as f64;
    let mut pts = Vec::with_capacity(segments + 1);
    for k in 0..=segments {
        pts.push(space.geodesic_point(a, b, step * k as f64));
    }
    PointSet::new(pts, 0.5 * step)
}

/// Default discretization resolution for a region of diameter `len` in
/// a space of hyperbolicity `delta`: fine enough both for the geometry
/// (delta/10) and for the region (len/1000). A `delta` of zero (trees)
/// falls back to the length-based term alone.
pub fn default_resolution(delta: f64, len: f64) -> f64 {
    let by_len = (len / 1000.0).max(1e-9);
    if delta > 0.0 {
        (delta / 10.0).min(by_len)
    } else {
        by_len
    }
}
