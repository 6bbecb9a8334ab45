//! Multi-component compact sets and their boundaries.
//!
//! Every component is a continuum of positive diameter: a closed disk, a
//! straight segment, an open polyline arc or a closed Jordan polygon (the
//! filled domain). Boundaries are parametrized by normalized arclength
//! `t ∈ [0, 1]`, positively oriented for closed shapes.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative separation below which two components count as touching.
pub const MIN_RELATIVE_SEPARATION: f64 = 1e-6;

/// Samples per component used for the separation and diameter checks.
const VALIDATION_SAMPLES: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShapeKind {
    /// Closed disk. `phase` is the angle of the boundary point at `t = 0`.
    Disk { center: C64, radius: f64, phase: f64 },
    Segment { a: C64, b: C64 },
    /// Open simple polyline.
    Arc { points: Vec<C64> },
    /// Simple closed polygon, stored counterclockwise without a repeated endpoint.
    Jordan { points: Vec<C64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentShape {
    pub kind: ShapeKind,
    pub quasismooth_hint: bool,
    /// Cumulative arclength at each polyline vertex (closing vertex included
    /// for Jordan polygons). Empty for disks.
    cumulative: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySample {
    pub point: C64,
    pub arclength: f64,
    /// Normalized boundary parameter of the sample.
    pub param: f64,
}

pub fn point_segment_distance(z: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = ((z - a) * d.conj()).re / len2;
    let t = t.clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_intersect(p1: C64, p2: C64, q1: C64, q2: C64) -> bool {
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let scale = (p2 - p1).norm().max((q2 - q1).norm());
    let tol = 1e-14 * scale;
    (d1.abs() <= tol * scale && point_segment_distance(p1, q1, q2) <= tol)
        || (d2.abs() <= tol * scale && point_segment_distance(p2, q1, q2) <= tol)
        || (d3.abs() <= tol * scale && point_segment_distance(q1, p1, p2) <= tol)
        || (d4.abs() <= tol * scale && point_segment_distance(q2, p1, p2) <= tol)
}

pub fn signed_area(points: &[C64]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| cross(points[i], points[(i + 1) % n]))
        .sum::<f64>()
        / 2.0
}

fn cumulative_lengths(points: &[C64], closed: bool) -> Vec<f64> {
    let n = points.len();
    let edges = if closed { n } else { n - 1 };
    let mut cum = Vec::with_capacity(edges + 1);
    cum.push(0.0);
    for i in 0..edges {
        let l = (points[(i + 1) % n] - points[i]).norm();
        cum.push(cum[i] + l);
    }
    cum
}

fn check_simple(points: &[C64], closed: bool) -> Result<()> {
    let n = points.len();
    let edges = if closed { n } else { n - 1 };
    for i in 0..edges {
        let (a1, a2) = (points[i], points[(i + 1) % n]);
        if (a2 - a1).norm() == 0.0 {
            return Err(Error::InvalidShape(format!("repeated vertex at index {i}")));
        }
        for j in (i + 1)..edges {
            let adjacent = j == i + 1 || (closed && i == 0 && j == edges - 1);
            if adjacent {
                continue;
            }
            let (b1, b2) = (points[j], points[(j + 1) % n]);
            if segments_intersect(a1, a2, b1, b2) {
                return Err(Error::InvalidShape(format!(
                    "polyline is not simple: edges {i} and {j} intersect"
                )));
            }
        }
    }
    // Adjacent edges folding back onto each other.
    for i in 0..edges.saturating_sub(1) + usize::from(closed) {
        let p0 = points[i];
        let p1 = points[(i + 1) % n];
        let p2 = points[(i + 2) % n];
        let (u, v) = (p1 - p0, p2 - p1);
        if cross(u, v).abs() <= 1e-14 * u.norm() * v.norm() && (u * v.conj()).re < 0.0 {
            return Err(Error::InvalidShape(format!(
                "polyline folds back at vertex {}",
                (i + 1) % n
            )));
        }
    }
    Ok(())
}

impl ComponentShape {
    pub fn disk(center: C64, radius: f64) -> Result<Self> {
        Self::disk_with_phase(center, radius, 0.0)
    }

    pub fn disk_with_phase(center: C64, radius: f64, phase: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::DegenerateShape(format!("disk radius {radius}")));
        }
        Ok(Self {
            kind: ShapeKind::Disk { center, radius, phase },
            quasismooth_hint: true,
            cumulative: Vec::new(),
        })
    }

    pub fn segment(a: C64, b: C64) -> Result<Self> {
        if !((b - a).norm() > 0.0) {
            return Err(Error::DegenerateShape("segment endpoints coincide".into()));
        }
        Ok(Self {
            cumulative: vec![0.0, (b - a).norm()],
            kind: ShapeKind::Segment { a, b },
            quasismooth_hint: true,
        })
    }

    pub fn arc(points: Vec<C64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidShape("arc needs at least 2 points".into()));
        }
        check_simple(&points, false)?;
        let cumulative = cumulative_lengths(&points, false);
        let mut shape = Self {
            kind: ShapeKind::Arc { points },
            quasismooth_hint: true,
            cumulative,
        };
        shape.check_diameter()?;
        Ok(shape)
    }

    /// Closed polygon; orientation is normalized to counterclockwise and a
    /// repeated closing vertex is dropped.
    pub fn jordan(mut points: Vec<C64>) -> Result<Self> {
        if points.len() >= 2 && points.first() == points.last() {
            points.pop();
        }
        if points.len() < 3 {
            return Err(Error::InvalidShape("jordan polygon needs at least 3 vertices".into()));
        }
        check_simple(&points, true)?;
        let area = signed_area(&points);
        if area == 0.0 {
            return Err(Error::DegenerateShape("polygon has zero area".into()));
        }
        if area < 0.0 {
            points.reverse();
        }
        let cumulative = cumulative_lengths(&points, true);
        let mut shape = Self {
            kind: ShapeKind::Jordan { points },
            quasismooth_hint: true,
            cumulative,
        };
        shape.check_diameter()?;
        Ok(shape)
    }

    pub fn with_quasismooth_hint(mut self, hint: bool) -> Self {
        self.quasismooth_hint = hint;
        self
    }

    fn check_diameter(&mut self) -> Result<()> {
        if !(self.diameter() > 0.0) {
            return Err(Error::DegenerateShape("zero diameter".into()));
        }
        Ok(())
    }

    pub fn is_closed(&self) -> bool {
        matches!(self.kind, ShapeKind::Disk { .. } | ShapeKind::Jordan { .. })
    }

    pub fn length(&self) -> f64 {
        match &self.kind {
            ShapeKind::Disk { radius, .. } => TAU * radius,
            _ => *self.cumulative.last().unwrap(),
        }
    }

    /// Polyline vertices (segment endpoints for a segment); empty for disks.
    pub fn vertices(&self) -> &[C64] {
        match &self.kind {
            ShapeKind::Disk { .. } => &[],
            ShapeKind::Segment { .. } => &[],
            ShapeKind::Arc { points } | ShapeKind::Jordan { points } => points,
        }
    }

    /// Normalized arclength parameters of the polyline vertices, including
    /// both ends (`0` and `1`).
    pub fn vertex_params(&self) -> Vec<f64> {
        if matches!(self.kind, ShapeKind::Disk { .. }) {
            return vec![0.0, 1.0];
        }
        let total = self.length();
        self.cumulative.iter().map(|c| c / total).collect()
    }

    /// Boundary point at normalized arclength `t` (wrapped for closed shapes).
    pub fn point_at(&self, t: f64) -> C64 {
        match &self.kind {
            ShapeKind::Disk { center, radius, phase } => {
                center + C64::from_polar(*radius, phase + TAU * t)
            }
            ShapeKind::Segment { a, b } => a + (b - a) * t.clamp(0.0, 1.0),
            ShapeKind::Arc { points } | ShapeKind::Jordan { points } => {
                let closed = self.is_closed();
                let t = if closed { t.rem_euclid(1.0) } else { t.clamp(0.0, 1.0) };
                let target = t * self.length();
                let cum = &self.cumulative;
                let i = match cum.binary_search_by(|c| c.partial_cmp(&target).unwrap()) {
                    Ok(i) => i.min(cum.len() - 2),
                    Err(i) => i.saturating_sub(1).min(cum.len() - 2),
                };
                let n = points.len();
                let (p, q) = (points[i], points[(i + 1) % n]);
                let seg = cum[i + 1] - cum[i];
                let local = if seg > 0.0 { (target - cum[i]) / seg } else { 0.0 };
                p + (q - p) * local
            }
        }
    }

    /// Unit tangent in the direction of increasing parameter.
    pub fn tangent_at(&self, t: f64) -> C64 {
        match &self.kind {
            ShapeKind::Disk { phase, .. } => C64::from_polar(1.0, phase + TAU * t) * C64::i(),
            _ => {
                let h = 1e-9;
                let d = self.point_at(t + h) - self.point_at(t - h);
                d / d.norm()
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.kind {
            ShapeKind::Disk { radius, .. } => 2.0 * radius,
            ShapeKind::Segment { a, b } => (b - a).norm(),
            ShapeKind::Arc { points } | ShapeKind::Jordan { points } => {
                let mut d: f64 = 0.0;
                for (i, p) in points.iter().enumerate() {
                    for q in &points[i + 1..] {
                        d = d.max((p - q).norm());
                    }
                }
                d
            }
        }
    }

    /// Parameters of `m` boundary samples: uniform in arclength, both
    /// endpoints included for arcs. With `cluster`, arcs use Chebyshev
    /// spacing toward their endpoints.
    pub fn sample_params(&self, m: usize, cluster: bool) -> Vec<f64> {
        if self.is_closed() {
            (0..m).map(|k| k as f64 / m as f64).collect()
        } else if cluster {
            (0..m)
                .map(|k| 0.5 * (1.0 - (PI * k as f64 / (m - 1) as f64).cos()))
                .collect()
        } else {
            (0..m).map(|k| k as f64 / (m - 1) as f64).collect()
        }
    }

    pub fn boundary_sample(&self, m: usize) -> Result<Vec<BoundarySample>> {
        let min = if self.is_closed() { 4 } else { 2 };
        if m < min {
            return Err(Error::InvalidArgument(format!(
                "boundary_sample needs at least {min} points, got {m}"
            )));
        }
        let total = self.length();
        Ok(self
            .sample_params(m, false)
            .into_iter()
            .map(|t| BoundarySample { point: self.point_at(t), arclength: t * total, param: t })
            .collect())
    }

    /// Parameters of panel breakpoints for the equilibrium discretization:
    /// roughly `m` panels, graded toward arc endpoints, with every polyline
    /// vertex kept as a breakpoint. The returned list starts at 0 and ends at 1.
    pub fn panel_breaks(&self, m: usize) -> Vec<f64> {
        let mut grid: Vec<f64> = if self.is_closed() {
            (0..=m).map(|k| k as f64 / m as f64).collect()
        } else {
            (0..=m)
                .map(|k| 0.5 * (1.0 - (PI * k as f64 / m as f64).cos()))
                .collect()
        };
        if matches!(self.kind, ShapeKind::Disk { .. } | ShapeKind::Segment { .. }) {
            return grid;
        }
        let vertices = self.vertex_params();
        // Drop grid points that crowd an interior vertex, then merge the
        // vertices in. Arc endpoints keep their grading.
        let min_gap = 0.3 / m as f64;
        let interior = &vertices[1..vertices.len() - 1];
        grid.retain(|t| interior.iter().all(|v| (t - v).abs() >= min_gap));
        grid.extend(vertices);
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        grid
    }

    pub fn contains(&self, z: C64) -> bool {
        match &self.kind {
            ShapeKind::Disk { center, radius, .. } => (z - center).norm() <= *radius,
            ShapeKind::Jordan { points } => point_in_polygon(z, points),
            _ => false,
        }
    }

    /// Exact Euclidean distance from `z` to the component (0 inside a domain).
    pub fn distance(&self, z: C64) -> f64 {
        match &self.kind {
            ShapeKind::Disk { center, radius, .. } => ((z - center).norm() - radius).max(0.0),
            ShapeKind::Segment { a, b } => point_segment_distance(z, *a, *b),
            ShapeKind::Arc { points } => points
                .windows(2)
                .map(|w| point_segment_distance(z, w[0], w[1]))
                .fold(f64::INFINITY, f64::min),
            ShapeKind::Jordan { points } => {
                if point_in_polygon(z, points) {
                    return 0.0;
                }
                let n = points.len();
                (0..n)
                    .map(|i| point_segment_distance(z, points[i], points[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Boundary point at `t = 0` together with a unit direction pointing
    /// away from the component; the starting ray for level-curve traces.
    pub fn start_ray(&self) -> (C64, C64) {
        match &self.kind {
            ShapeKind::Disk { center, radius, phase } => {
                let dir = C64::from_polar(1.0, *phase);
                (center + dir * radius, dir)
            }
            ShapeKind::Segment { a, b } => (*a, (a - b) / (a - b).norm()),
            ShapeKind::Arc { points } => {
                let d = points[0] - points[1];
                (points[0], d / d.norm())
            }
            ShapeKind::Jordan { points } => {
                let n = points.len();
                let p = points[0];
                let e_in = p - points[n - 1];
                let e_out = points[1] - p;
                // Outward normals of a counterclockwise polygon.
                let n_in = -C64::i() * e_in / e_in.norm();
                let n_out = -C64::i() * e_out / e_out.norm();
                let d = n_in + n_out;
                let d = if d.norm() > 1e-12 { d / d.norm() } else { n_out };
                (p, d)
            }
        }
    }

    /// Applies `z ↦ a·z + b` (a similarity) to the shape, keeping the
    /// parametrization covariant.
    pub fn transformed(&self, a: C64, b: C64) -> Result<Self> {
        let map = |z: &C64| a * z + b;
        let shape = match &self.kind {
            ShapeKind::Disk { center, radius, phase } => {
                Self::disk_with_phase(map(center), radius * a.norm(), phase + a.arg())?
            }
            ShapeKind::Segment { a: p, b: q } => Self::segment(map(p), map(q))?,
            ShapeKind::Arc { points } => Self::arc(points.iter().map(map).collect())?,
            ShapeKind::Jordan { points } => Self::jordan(points.iter().map(map).collect())?,
        };
        Ok(shape.with_quasismooth_hint(self.quasismooth_hint))
    }
}

fn point_in_polygon(z: C64, points: &[C64]) -> bool {
    let n = points.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (points[i], points[j]);
        if (pi.im > z.im) != (pj.im > z.im) {
            let x = pj.re + (z.im - pj.im) * (pi.re - pj.re) / (pi.im - pj.im);
            if z.re < x {
                inside = !inside;
            }
        }
        j = i;
    }
    if inside {
        return true;
    }
    // Points on the boundary belong to the closed domain.
    (0..n).any(|i| point_segment_distance(z, points[i], points[(i + 1) % n]) == 0.0)
}

/// Lower estimate of the Lavrentiev constant: the largest ratio of shorter
/// arc length to chord over pairs of `m` boundary samples.
pub fn quasismooth_constant(shape: &ComponentShape, m: usize) -> Result<f64> {
    if m < 16 {
        return Err(Error::InvalidArgument(format!("quasismooth_constant needs m >= 16, got {m}")));
    }
    let params = shape.sample_params(m, false);
    let total = shape.length();
    let points: Vec<C64> = params.iter().map(|&t| shape.point_at(t)).collect();
    let noise = 1e-12 * shape.diameter();
    let mut best: f64 = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            let chord = (points[j] - points[i]).norm();
            if chord <= noise {
                continue;
            }
            let along = (params[j] - params[i]) * total;
            let arc = if shape.is_closed() { along.min(total - along) } else { along };
            best = best.max(arc / chord);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactSet {
    pub components: Vec<ComponentShape>,
    /// Smallest gap between components (`∞` for one component, stored as `null`).
    #[serde(deserialize_with = "infinite_if_null")]
    pub separation: f64,
    pub diam: f64,
}

impl CompactSet {
    pub fn new(components: Vec<ComponentShape>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("compact set has no components".into()));
        }
        let samples: Vec<Vec<C64>> = components
            .iter()
            .map(|c| {
                let mut pts: Vec<C64> = c
                    .sample_params(VALIDATION_SAMPLES, false)
                    .into_iter()
                    .map(|t| c.point_at(t))
                    .collect();
                pts.extend_from_slice(c.vertices());
                pts
            })
            .collect();
        let all: Vec<C64> = samples.iter().flatten().copied().collect();
        let mut diam: f64 = 0.0;
        for (i, p) in all.iter().enumerate() {
            for q in &all[i + 1..] {
                diam = diam.max((p - q).norm());
            }
        }
        let mut separation = f64::INFINITY;
        for i in 0..components.len() {
            for j in (i + 1)..components.len() {
                let d_ij = samples[i]
                    .iter()
                    .map(|&z| components[j].distance(z))
                    .fold(f64::INFINITY, f64::min);
                let d_ji = samples[j]
                    .iter()
                    .map(|&z| components[i].distance(z))
                    .fold(f64::INFINITY, f64::min);
                let d = d_ij.min(d_ji);
                if d < MIN_RELATIVE_SEPARATION * diam {
                    return Err(Error::NotDisjoint(i, j, d));
                }
                separation = separation.min(d);
            }
        }
        Ok(Self { components, separation, diam })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: GeometryDoc = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::Json(format!("{} at `{}`", e.inner(), e.path())))?;
        let components = doc
            .components
            .into_iter()
            .map(ShapeDoc::into_shape)
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    pub fn to_json(&self) -> String {
        let comps: Vec<serde_json::Value> = self
            .components
            .iter()
            .map(|c| {
                let xy = |z: &C64| serde_json::json!([z.re, z.im]);
                match &c.kind {
                    ShapeKind::Disk { center, radius, .. } => {
                        serde_json::json!({"kind": "disk", "center": xy(center), "radius": radius})
                    }
                    ShapeKind::Segment { a, b } => {
                        serde_json::json!({"kind": "segment", "a": xy(a), "b": xy(b)})
                    }
                    ShapeKind::Arc { points } => serde_json::json!({
                        "kind": "arc", "points": points.iter().map(xy).collect::<Vec<_>>()
                    }),
                    ShapeKind::Jordan { points } => serde_json::json!({
                        "kind": "jordan", "points": points.iter().map(xy).collect::<Vec<_>>()
                    }),
                }
            })
            .collect();
        serde_json::to_string_pretty(&serde_json::json!({ "components": comps })).unwrap()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn distance(&self, z: C64) -> f64 {
        self.components
            .iter()
            .map(|c| c.distance(z))
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the component nearest to `z` together with the distance.
    pub fn nearest_component(&self, z: C64) -> (usize, f64) {
        self.components
            .iter()
            .enumerate()
            .map(|(j, c)| (j, c.distance(z)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
    }

    pub fn transformed(&self, a: C64, b: C64) -> Result<Self> {
        Self::new(
            self.components
                .iter()
                .map(|c| c.transformed(a, b))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn is_quasismooth(&self) -> bool {
        self.components.iter().all(|c| c.quasismooth_hint)
    }
}

fn infinite_if_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

pub fn distance_to_set(z: C64, set: &CompactSet) -> f64 {
    set.distance(z)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryDoc {
    components: Vec<ShapeDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum ShapeDoc {
    Disk { center: [f64; 2], radius: f64 },
    Segment { a: [f64; 2], b: [f64; 2] },
    Arc { points: Vec<[f64; 2]> },
    Jordan { points: Vec<[f64; 2]> },
}

impl ShapeDoc {
    fn into_shape(self) -> Result<ComponentShape> {
        let c = |p: [f64; 2]| C64::new(p[0], p[1]);
        match self {
            ShapeDoc::Disk { center, radius } => ComponentShape::disk(c(center), radius),
            ShapeDoc::Segment { a, b } => ComponentShape::segment(c(a), c(b)),
            ShapeDoc::Arc { points } => ComponentShape::arc(points.into_iter().map(c).collect()),
            ShapeDoc::Jordan { points } => {
                ComponentShape::jordan(points.into_iter().map(c).collect())
            }
        }
    }
}
