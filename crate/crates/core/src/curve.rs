//! Closed curves on the unit sphere sampled at `N` cyclically ordered nodes.
//!
//! Node `k` sits at parameter `θ_k = k/N` on `S¹ = R/Z`, so the grid step is
//! `h = 1/N`. Derivatives use five-point cyclic central differences. Segment
//! geometry (lengths, interpolation stations, intersections) uses the great
//! arcs of the round metric between neighbouring nodes.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConformalMetric;
use crate::real::{norm, Real};

pub const MIN_NODES: usize = 16;
pub const DEFAULT_NODES: usize = 256;
/// Default clearance for self-contact detection, in chord units.
pub const DEFAULT_CLEARANCE: f64 = 1e-4;
/// Node unit-norm tolerance.
pub const NODE_UNIT_TOL: f64 = 1e-10;
/// Relative segment-length spread at which resampling stops.
const RESAMPLE_TOL: f64 = 1e-14;
const RESAMPLE_MAX_PASSES: usize = 60;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 3]>", into = "Vec<[f64; 3]>")]
pub struct DiscreteCurve {
    nodes: Vec<Vector3<f64>>,
}

impl TryFrom<Vec<[f64; 3]>> for DiscreteCurve {
    type Error = Error;
    fn try_from(v: Vec<[f64; 3]>) -> Result<Self> {
        Self::new(v.into_iter().map(Vector3::from).collect())
    }
}

impl From<DiscreteCurve> for Vec<[f64; 3]> {
    fn from(c: DiscreteCurve) -> Self {
        c.nodes.iter().map(|p| [p.x, p.y, p.z]).collect()
    }
}

impl DiscreteCurve {
    pub fn new(nodes: Vec<Vector3<f64>>) -> Result<Self> {
        if nodes.len() < MIN_NODES {
            return Err(Error::InvalidCurve(format!("{} nodes given, at least {MIN_NODES} required", nodes.len())));
        }
        for (k, p) in nodes.iter().enumerate() {
            let n = p.norm();
            if !n.is_finite() || (n - 1.0).abs() > NODE_UNIT_TOL {
                return Err(Error::InvalidCurve(format!("node {k} has norm {n}")));
            }
        }
        let n = nodes.len();
        for k in 0..n {
            if nodes[k] == nodes[(k + 1) % n] {
                return Err(Error::InvalidCurve(format!("nodes {k} and {} coincide", (k + 1) % n)));
            }
        }
        Ok(Self { nodes })
    }

    /// Projects every node radially onto the sphere before validating.
    pub fn from_points(points: Vec<Vector3<f64>>) -> Result<Self> {
        let mut nodes = Vec::with_capacity(points.len());
        for (k, p) in points.into_iter().enumerate() {
            let n = p.norm();
            if !(n.is_finite() && n > 0.0) {
                return Err(Error::InvalidCurve(format!("node {k} cannot be projected to the sphere")));
            }
            nodes.push(p / n);
        }
        Self::new(nodes)
    }

    /// Uniformly sampled circle of geodesic radius `radius` about `axis`,
    /// traversed counter-clockwise as seen from the axis, so the cap around
    /// `axis` lies to the left. Node `k` sits at azimuth `phase + 2πk/n`.
    pub fn circle(axis: &Vector3<f64>, radius: f64, n: usize, phase: f64) -> Result<Self> {
        let a = axis.try_normalize(1e-300).ok_or_else(|| Error::Domain("circle axis must be non-zero".into()))?;
        let (e1, e2) = orthonormal_basis(&a);
        let (sr, cr) = radius.sin_cos();
        let pts = (0..n)
            .map(|k| {
                let psi = phase + TAU * k as f64 / n as f64;
                a * cr + (e1 * psi.cos() + e2 * psi.sin()) * sr
            })
            .collect();
        Self::from_points(pts)
    }

    pub fn nodes(&self) -> &[Vector3<f64>] {
        &self.nodes
    }

    pub fn into_nodes(self) -> Vec<Vector3<f64>> {
        self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Parameter step `h = 1/N`.
    pub fn step(&self) -> f64 {
        1.0 / self.nodes.len() as f64
    }

    pub fn node(&self, k: isize) -> &Vector3<f64> {
        &self.nodes[k.rem_euclid(self.nodes.len() as isize) as usize]
    }

    /// `(θ*γ)(t) = γ(t + θ)` for `θ = m/N`: node `k` of the result is node `k + m`.
    pub fn shifted(&self, m: isize) -> Self {
        let n = self.len();
        let nodes = (0..n).map(|k| *self.node(k as isize + m)).collect();
        Self { nodes }
    }

    /// Opposite traversal, keeping node 0 fixed.
    pub fn reversed(&self) -> Self {
        let n = self.len();
        let nodes = (0..n).map(|k| self.nodes[(n - k) % n]).collect();
        Self { nodes }
    }

    /// The five-node window centred on `k`.
    pub(crate) fn window(&self, k: usize) -> [Vector3<f64>; 5] {
        let k = k as isize;
        [*self.node(k - 2), *self.node(k - 1), *self.node(k), *self.node(k + 1), *self.node(k + 2)]
    }
}

/// Right-handed orthonormal basis `(e1, e2)` of the plane orthogonal to unit `a`,
/// with `e1 × e2 = a`.
pub fn orthonormal_basis(a: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if a.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = (helper - a * helper.dot(a)).normalize();
    let e2 = a.cross(&e1);
    (e1, e2)
}

/// Five-point cyclic central differences: `(γ̇, γ̈)` at the window centre.
#[inline]
pub(crate) fn stencil<S: Real>(w: &[Vector3<S>; 5], h: f64) -> (Vector3<S>, Vector3<S>) {
    let c1 = S::cst(1.0 / (12.0 * h));
    let c2 = S::cst(1.0 / (12.0 * h * h));
    let v = (w[3] - w[1]) * (S::cst(8.0) * c1) - (w[4] - w[0]) * c1;
    let a = (w[3] + w[1]) * (S::cst(16.0) * c2) - (w[4] + w[0]) * c2 - w[2] * (S::cst(30.0) * c2);
    (v, a)
}

/// Round-metric differential data at one node.
pub(crate) struct NodeFrame<S> {
    pub p: Vector3<S>,
    /// Tangent-projected acceleration, i.e. the round covariant derivative of `γ̇`.
    pub accel: Vector3<S>,
    pub speed: S,
    pub tangent: Vector3<S>,
    /// `p × tangent`, pointing to the left of the direction of travel.
    pub normal: Vector3<S>,
}

pub(crate) fn node_frame<S: Real>(w: &[Vector3<S>; 5], h: f64) -> Option<NodeFrame<S>> {
    let p = w[2];
    let (v, a) = stencil(w, h);
    let velocity = v - p * v.dot(&p);
    let accel = a - p * a.dot(&p);
    let speed = norm(&velocity);
    if !(speed.re() > 0.0) || !speed.re().is_finite() {
        return None;
    }
    let tangent = velocity / speed;
    let normal = p.cross(&tangent);
    Some(NodeFrame { p, accel, speed, tangent, normal })
}

/// Geodesic curvature of `g_t` at a node with frame `f`:
/// `e^{-tφ/2} (κ_can - (t/2) ∂_n φ)` with `n` the left normal.
pub(crate) fn node_curvature<S: Real>(f: &NodeFrame<S>, metric: &ConformalMetric) -> S {
    let kappa_can = f.accel.dot(&f.normal) / (f.speed * f.speed);
    if metric.is_round() {
        return kappa_can;
    }
    let t = metric.t();
    let (phi, grad) = metric.phi().value_and_gradient(&f.p);
    (S::cst(-0.5 * t) * phi).exp() * (kappa_can - S::cst(0.5 * t) * grad.dot(&f.normal))
}

/// Great-arc angle between two unit vectors.
#[inline]
pub(crate) fn arc<S: Real>(a: &Vector3<S>, b: &Vector3<S>) -> S {
    norm(&a.cross(b)).atan2(a.dot(b))
}

/// `g_t`-length of the great arc `a → b`, midpoint rule for the conformal weight.
#[inline]
pub(crate) fn segment_length<S: Real>(a: &Vector3<S>, b: &Vector3<S>, metric: &ConformalMetric) -> S {
    let ang = arc(a, b);
    if metric.is_round() {
        return ang;
    }
    let m = *a + *b;
    let mid = m / norm(&m);
    metric.scale(&mid) * ang
}

/// Per-segment `g_t`-lengths; entry `k` is the segment `k → k+1`.
pub fn segment_lengths(curve: &DiscreteCurve, metric: &ConformalMetric) -> Vec<f64> {
    let n = curve.len();
    (0..n).map(|k| segment_length(&curve.nodes[k], &curve.nodes[(k + 1) % n], metric)).collect()
}

/// Raw difference quotients `(γ̇_k, γ̈_k)`, not yet projected to the tangent planes.
pub fn derivatives(curve: &DiscreteCurve) -> (Vec<Vector3<f64>>, Vec<Vector3<f64>>) {
    let h = curve.step();
    (0..curve.len()).map(|k| stencil(&curve.window(k), h)).unzip()
}

/// `g_t`-length `∫ e^{tφ/2}|γ̇| dθ`, by the periodic trapezoid rule on the
/// five-point velocities. The great-arc polygon is only second-order accurate
/// (it cuts every corner), which is too coarse for length comparisons at 1e-6.
pub fn length(curve: &DiscreteCurve, metric: &ConformalMetric) -> f64 {
    let h = curve.step();
    let total: f64 = (0..curve.len())
        .map(|k| match node_frame(&curve.window(k), h) {
            Some(f) => metric.scale(&f.p) * f.speed,
            None => 0.0,
        })
        .sum();
    total * h
}

/// Length of the great-arc polygon, `Σ_k e^{tφ(m_k)/2}·|arc_k|`.
pub fn polygon_length(curve: &DiscreteCurve, metric: &ConformalMetric) -> f64 {
    segment_lengths(curve, metric).iter().sum()
}

/// `(max ℓ - min ℓ) / mean ℓ` over the `g_t`-segment lengths.
pub fn speed_variation(curve: &DiscreteCurve, metric: &ConformalMetric) -> f64 {
    spread(&segment_lengths(curve, metric))
}

fn spread(seg: &[f64]) -> f64 {
    let (lo, hi, sum) =
        seg.iter().fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, s), &x| (lo.min(x), hi.max(x), s + x));
    (hi - lo) / (sum / seg.len() as f64)
}

/// Geodesic curvature of the curve in `g_t` at every node.
pub fn geodesic_curvature(curve: &DiscreteCurve, metric: &ConformalMetric) -> Result<Vec<f64>> {
    let h = curve.step();
    (0..curve.len())
        .map(|k| {
            node_frame(&curve.window(k), h)
                .map(|f| node_curvature(&f, metric))
                .ok_or_else(|| Error::Degenerate(format!("zero velocity at node {k}")))
        })
        .collect()
}

/// Re-places the nodes at `N` equal `g_t`-arclength stations.
///
/// Stations are measured along the current great-arc polygon and the new
/// nodes are read off a cubic interpolant through the four nearest nodes,
/// parametrised by cumulative length, then projected back to the sphere.
/// The pass repeats until the segment lengths agree to rounding; station 0
/// stays on node 0.
pub fn resample_constant_speed(curve: &DiscreteCurve, metric: &ConformalMetric) -> Result<DiscreteCurve> {
    let n = curve.len();
    let mut cur = curve.clone();
    for _ in 0..RESAMPLE_MAX_PASSES {
        let seg = segment_lengths(&cur, metric);
        let total: f64 = seg.iter().sum();
        if !(total >= 1e-8) {
            return Err(Error::Degenerate(format!("curve length {total:e} below 1e-8")));
        }
        if seg.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::Degenerate("zero-length segment".into()));
        }
        if spread(&seg) <= RESAMPLE_TOL {
            break;
        }
        let mut cum = Vec::with_capacity(n + 1);
        cum.push(0.0);
        for s in &seg {
            cum.push(cum.last().unwrap() + s);
        }
        // Knot parameter of node k for any integer k, unwrapped around the loop.
        let knot = |k: isize| -> f64 {
            let q = k.div_euclid(n as isize) as f64;
            let r = k.rem_euclid(n as isize) as usize;
            cum[r] + q * total
        };
        let mut out = Vec::with_capacity(n);
        let mut i = 0usize;
        for j in 0..n {
            let s = total * j as f64 / n as f64;
            while i + 1 < n && cum[i + 1] <= s {
                i += 1;
            }
            let ii = i as isize;
            let ks = [ii - 1, ii, ii + 1, ii + 2];
            let xs = ks.map(knot);
            let mut p = Vector3::zeros();
            for (a, &ka) in ks.iter().enumerate() {
                let mut w = 1.0;
                for (b, &xb) in xs.iter().enumerate() {
                    if a != b {
                        w *= (s - xb) / (xs[a] - xb);
                    }
                }
                p += cur.node(ka) * w;
            }
            out.push(p.normalize());
        }
        cur = DiscreteCurve::new(out)?;
    }
    Ok(cur)
}

/// Outcome of a self-contact scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub embedded: bool,
    /// Offending segment pairs `(i, j, chord distance)` with `i < j`; segment
    /// `i` joins nodes `i` and `i+1`.
    pub pairs: Vec<(usize, usize, f64)>,
    /// Smallest chord distance over all non-adjacent segment pairs.
    pub min_distance: f64,
}

/// Tests every pair of segments that share no node for crossing or for
/// approaching closer than `clearance`.
pub fn self_intersects(curve: &DiscreteCurve, clearance: f64) -> IntersectionReport {
    let n = curve.len();
    let p = &curve.nodes;
    // Bounding balls (chord centre and radius) for cheap rejection.
    let balls: Vec<(Vector3<f64>, f64)> = (0..n)
        .map(|i| {
            let a = p[i];
            let b = p[(i + 1) % n];
            let c = (a + b) * 0.5;
            (c, (a - c).norm())
        })
        .collect();
    let mut pairs = Vec::new();
    let mut min_distance = f64::INFINITY;
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (ci, ri) = balls[i];
            let (cj, rj) = balls[j];
            // The chord ball underestimates the arc bulge by at most r²; pad generously.
            let gap = (ci - cj).norm() - ri - rj - ri * ri - rj * rj;
            if gap > clearance && gap > min_distance {
                continue;
            }
            let d = arc_arc_distance(&p[i], &p[(i + 1) % n], &p[j], &p[(j + 1) % n]);
            min_distance = min_distance.min(d);
            if d < clearance {
                pairs.push((i, j, d));
            }
        }
    }
    IntersectionReport { embedded: pairs.is_empty(), pairs, min_distance }
}

fn arcs_cross(a0: &Vector3<f64>, a1: &Vector3<f64>, b0: &Vector3<f64>, b1: &Vector3<f64>) -> bool {
    let na = a0.cross(a1);
    let nb = b0.cross(b1);
    let s0 = na.dot(b0);
    let s1 = na.dot(b1);
    let t0 = nb.dot(a0);
    let t1 = nb.dot(a1);
    if s0 * s1 > 0.0 || t0 * t1 > 0.0 {
        return false;
    }
    // Both great circles meet at ±x; the arcs share the copy on their own side.
    let x = na.cross(&nb);
    let sa = x.dot(&(a0 + a1));
    let sb = x.dot(&(b0 + b1));
    sa * sb > 0.0 || x.norm() == 0.0
}

fn point_arc_distance(q: &Vector3<f64>, b0: &Vector3<f64>, b1: &Vector3<f64>) -> f64 {
    let ends = (q - b0).norm().min((q - b1).norm());
    let nrm = b0.cross(b1);
    let nn = nrm.norm();
    if nn < 1e-300 {
        return ends;
    }
    let nh = nrm / nn;
    let proj = q - nh * q.dot(&nh);
    let pn = proj.norm();
    if pn < 1e-300 {
        return ends;
    }
    let u = proj / pn;
    if b0.cross(&u).dot(&nrm) >= 0.0 && u.cross(b1).dot(&nrm) >= 0.0 {
        (q - u).norm().min(ends)
    } else {
        ends
    }
}

fn arc_arc_distance(a0: &Vector3<f64>, a1: &Vector3<f64>, b0: &Vector3<f64>, b1: &Vector3<f64>) -> f64 {
    if arcs_cross(a0, a1, b0, b1) {
        return 0.0;
    }
    point_arc_distance(a0, b0, b1)
        .min(point_arc_distance(a1, b0, b1))
        .min(point_arc_distance(b0, a0, a1))
        .min(point_arc_distance(b1, a0, a1))
}

/// Discrete `S¹`-orbit distance: the smallest sup-norm node distance over all
/// cyclic relabelings of `b` in both traversal directions.
pub fn aligned_distance(a: &DiscreteCurve, b: &DiscreteCurve) -> Result<f64> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::Domain(format!("node counts differ ({n} vs {}); resample first", b.len())));
    }
    let mut best = f64::INFINITY;
    for reversed in [false, true] {
        for shift in 0..n {
            let mut worst = 0.0f64;
            for k in 0..n {
                let j = if reversed { (shift + n - k) % n } else { (shift + k) % n };
                let d = (a.nodes[k] - b.nodes[j]).norm_squared();
                if d > worst {
                    worst = d;
                    if worst >= best {
                        break;
                    }
                }
            }
            best = best.min(worst);
        }
    }
    Ok(best.sqrt())
}

/// Pole used for polar integration over the region to the left of the curve.
fn region_pole(curve: &DiscreteCurve) -> Vector3<f64> {
    let n = curve.len();
    let s: Vector3<f64> = (0..n).map(|k| curve.nodes[k].cross(&curve.nodes[(k + 1) % n])).sum();
    s.try_normalize(1e-12).unwrap_or_else(|| {
        let c: Vector3<f64> = curve.nodes.iter().sum();
        c.try_normalize(1e-12).unwrap_or_else(Vector3::z)
    })
}

/// Round area of the great-arc polygon's left region, by a signed fan of
/// spherical triangles from `pole`.
fn polygon_left_area(curve: &DiscreteCurve, pole: &Vector3<f64>) -> f64 {
    let n = curve.len();
    let mut total = 0.0;
    for k in 0..n {
        let a = &curve.nodes[k];
        let b = &curve.nodes[(k + 1) % n];
        let num = pole.dot(&a.cross(b));
        let den = 1.0 + pole.dot(a) + a.dot(b) + b.dot(pole);
        total += 2.0 * num.atan2(den);
    }
    total.rem_euclid(4.0 * PI)
}

/// Gauss–Legendre nodes and weights on [-1, 1].
fn gauss_legendre() -> &'static [(f64, f64)] {
    const ORDER: usize = 20;
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut rule = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        rule
    })
}

/// `∫∫_Ω K_{g_t} dA_{g_t}` over the region `Ω` to the left of the curve.
///
/// Uses `K_{g_t} dA_{g_t} = (1 - (t/2) Δ_can φ) dA_can`. The constant part is
/// the exact round area of the great-arc polygon. The `Δφ` part is integrated
/// in polar coordinates about a pole inside the region: `2·grid_resolution`
/// meridians (midpoint rule in longitude), each cut exactly at its crossings
/// with the polygon, with Gauss–Legendre quadrature along the inside runs.
pub fn enclosed_gauss_integral(curve: &DiscreteCurve, metric: &ConformalMetric, grid_resolution: usize) -> Result<f64> {
    if !self_intersects(curve, DEFAULT_CLEARANCE).embedded {
        return Err(Error::NotEmbedded);
    }
    let pole = region_pole(curve);
    let area = polygon_left_area(curve, &pole);
    if metric.is_round() {
        return Ok(area);
    }
    let correction = polar_integral(curve, &pole, grid_resolution.max(1), |p| metric.curvature_density(p) - 1.0);
    Ok(area + correction)
}

fn polar_integral<F: Fn(&Vector3<f64>) -> f64>(
    curve: &DiscreteCurve,
    pole: &Vector3<f64>,
    grid_resolution: usize,
    f: F,
) -> f64 {
    let n = curve.len();
    let cols = 2 * grid_resolution;
    let (e1, e2) = orthonormal_basis(pole);
    let dpsi = TAU / cols as f64;
    let rule = gauss_legendre();

    // Crossing lists per meridian: (θ, leaving) where leaving = moving away
    // from the pole crosses from the left region into the right one.
    let mut meridians: Vec<Vec<(f64, bool)>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let psi = dpsi * (j as f64 + 0.5);
        let e = e1 * psi.cos() + e2 * psi.sin();
        let nu = pole.cross(&e);
        let mut hits = Vec::new();
        for k in 0..n {
            let a = &curve.nodes[k];
            let b = &curve.nodes[(k + 1) % n];
            let sa = nu.dot(a);
            let sb = nu.dot(b);
            if (sa < 0.0) == (sb < 0.0) {
                continue;
            }
            let x = (a * sb - b * sa) / (sb - sa);
            let x = x.normalize();
            let xe = x.dot(&e);
            if xe <= 0.0 {
                continue;
            }
            let theta = xe.atan2(x.dot(pole));
            let e_theta = e * theta.cos() - pole * theta.sin();
            let left = x.cross(&(b - a));
            hits.push((theta, e_theta.dot(&left) < 0.0));
        }
        hits.sort_by(|u, v| u.0.total_cmp(&v.0));
        meridians.push(hits);
    }
    // Whether the pole lies in the left region, decided by majority vote of the
    // first crossings (they agree for an embedded curve).
    let votes: (usize, usize) = meridians.iter().filter_map(|m| m.first()).fold((0, 0), |acc, h| {
        if h.1 {
            (acc.0 + 1, acc.1)
        } else {
            (acc.0, acc.1 + 1)
        }
    });
    let pole_inside = votes.0 >= votes.1;

    let mut total = 0.0;
    for (j, hits) in meridians.iter().enumerate() {
        let psi = dpsi * (j as f64 + 0.5);
        let e = e1 * psi.cos() + e2 * psi.sin();
        let mut inside = pole_inside;
        let mut start = 0.0;
        let mut column = 0.0;
        let mut runs = |lo: f64, hi: f64| {
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            let mut acc = 0.0;
            for &(x, w) in rule {
                let th = mid + half * x;
                let p = pole * th.cos() + e * th.sin();
                acc += w * f(&p) * th.sin();
            }
            column += acc * half;
        };
        for &(theta, _) in hits {
            if inside {
                runs(start, theta);
            }
            inside = !inside;
            start = theta;
        }
        if inside {
            runs(start, PI);
        }
        total += column;
    }
    total * dpsi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::HarmonicTerm;

    fn lat(r: f64, n: usize) -> DiscreteCurve {
        DiscreteCurve::circle(&Vector3::z(), r, n, 0.0).unwrap()
    }

    #[test]
    fn construction_rejects_bad_input() {
        let short = lat(1.0, 16).into_nodes()[..10].to_vec();
        assert!(DiscreteCurve::new(short).is_err());
        let mut off = lat(1.0, 32).into_nodes();
        off[3] *= 1.001;
        assert!(DiscreteCurve::new(off).is_err());
        let mut dup = lat(1.0, 32).into_nodes();
        dup[5] = dup[4];
        assert!(DiscreteCurve::new(dup).is_err());
    }

    #[test]
    fn great_circle_velocity_is_two_pi() {
        let c = lat(PI / 2.0, 256);
        let (v, a) = derivatives(&c);
        for (vk, ak) in v.iter().zip(&a) {
            assert!((vk.norm() - TAU).abs() < 1e-6);
            // γ̈ = -(2π)² γ for a unit-speed-in-angle great circle.
            assert!((ak.norm() - TAU * TAU).abs() < 1e-5);
        }
    }

    #[test]
    fn derivatives_commute_with_shift() {
        let c = DiscreteCurve::circle(&Vector3::new(1.0, 2.0, 0.5), 0.7, 40, 0.3).unwrap();
        let (v, a) = derivatives(&c);
        let (vs, as_) = derivatives(&c.shifted(7));
        for k in 0..40 {
            assert_eq!(vs[k], v[(k + 7) % 40]);
            assert_eq!(as_[k], a[(k + 7) % 40]);
        }
    }

    #[test]
    fn length_examples() {
        let round = ConformalMetric::round();
        assert!((length(&lat(PI / 2.0, 256), &round) - TAU).abs() < 1e-6);
        let l = length(&lat(PI / 4.0, 256), &round);
        assert!((l - PI * 2f64.sqrt()).abs() < 1e-7);
        // The inscribed polygon is short by O(N⁻²).
        let lp = polygon_length(&lat(PI / 4.0, 256), &round);
        assert!(lp < l && l - lp < 1e-4);
        let two = ConformalMetric::new(vec![HarmonicTerm::new(0, 0, 2.0 * (4.0 * PI).sqrt())], 1.0).unwrap();
        assert!((length(&lat(PI / 2.0, 256), &two) - TAU * std::f64::consts::E).abs() < 1e-5);
    }

    #[test]
    fn uniform_circle_is_a_resampling_fixed_point() {
        let c = lat(PI / 2.0, 128);
        let r = resample_constant_speed(&c, &ConformalMetric::round()).unwrap();
        for (a, b) in c.nodes().iter().zip(r.nodes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn clustered_great_circle_becomes_uniform() {
        let n = 128;
        let pts = (0..n)
            .map(|k| {
                let u = k as f64 / n as f64;
                let psi = TAU * (u + 0.12 * (TAU * u).sin() / TAU * 2.0);
                Vector3::new(psi.cos(), psi.sin(), 0.0)
            })
            .collect();
        let c = DiscreteCurve::new(pts).unwrap();
        let r = resample_constant_speed(&c, &ConformalMetric::round()).unwrap();
        let seg = segment_lengths(&r, &ConformalMetric::round());
        for s in seg {
            assert!((s - TAU / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn resampling_rejects_tiny_curves() {
        let c = DiscreteCurve::circle(&Vector3::z(), 1e-10, 32, 0.0).unwrap();
        assert!(matches!(resample_constant_speed(&c, &ConformalMetric::round()), Err(Error::Degenerate(_))));
    }

    #[test]
    fn latitude_circle_curvature() {
        let round = ConformalMetric::round();
        for (r, expect) in [(PI / 4.0, 1.0), (PI / 3.0, 1.0 / 3f64.sqrt())] {
            let k = geodesic_curvature(&lat(r, 256), &round).unwrap();
            for v in k {
                assert!((v - expect).abs() < 1e-7, "{v} vs {expect}");
            }
        }
        let k = geodesic_curvature(&lat(PI / 2.0, 256), &round).unwrap();
        assert!(k.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn aligned_distance_examples() {
        let g = DiscreteCurve::circle(&Vector3::new(0.2, 0.1, 1.0), 1.1, 64, 0.4).unwrap();
        assert_eq!(aligned_distance(&g, &g.shifted(17)).unwrap(), 0.0);
        assert_eq!(aligned_distance(&g, &g.reversed()).unwrap(), 0.0);
        let d = aligned_distance(&lat(PI / 2.0, 64), &lat(PI / 4.0, 64)).unwrap();
        assert!((d - 2.0 * (PI / 8.0).sin()).abs() < 1e-12);
        assert!(aligned_distance(&lat(1.0, 32), &lat(1.0, 64)).is_err());
    }

    #[test]
    fn circles_are_embedded() {
        for r in [0.05, 0.8, PI / 2.0, 2.5] {
            let rep = self_intersects(&lat(r, 128), DEFAULT_CLEARANCE);
            assert!(rep.embedded, "r = {r}");
        }
    }

    #[test]
    fn enclosed_integral_on_round_sphere() {
        let round = ConformalMetric::round();
        let eq = enclosed_gauss_integral(&lat(PI / 2.0, 256), &round, 128).unwrap();
        assert!((eq - TAU).abs() < 1e-12);
        let cap = enclosed_gauss_integral(&lat(PI / 4.0, 256), &round, 128).unwrap();
        let exact = TAU * (1.0 - (PI / 4.0).cos());
        // The inscribed polygon misses O(N⁻²) of the cap.
        assert!((cap - exact).abs() < 2e-4, "{cap} vs {exact}");
        assert!((cap - 1.8403).abs() < 1e-3);
    }
}
