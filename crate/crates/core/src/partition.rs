//! Degree allocation and equal-measure splitting of level curves.
//!
//! On a traced curve `K_s^j` the equilibrium measure of `K_s` is
//! `ω_j dθ / 2π`, so arcs of equal `θ` length carry equal mass and the
//! centroid of an arc is the plain `θ`-average of `z`.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, CompactSet};
use crate::potential::panel::gl8;
use crate::potential::{ChargeModel, LevelCurve};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeAllocation {
    pub n: usize,
    pub n_j: Vec<usize>,
    /// `10 / min ω_j`, the admissibility threshold of the construction.
    pub n1: f64,
    /// `n ≤ n1`: allocation is still returned, but outside the proven regime.
    pub below_n1: bool,
}

impl DegreeAllocation {
    /// `n_m − n·ω_m`, which lies in `[0, m − 1]`.
    pub fn last_excess(&self, masses: &[f64]) -> f64 {
        let m = masses.len();
        self.n_j[m - 1] as f64 - self.n as f64 * masses[m - 1]
    }
}

/// `n_j = ⌊n ω_j⌋` for all but the last component, which takes the rest.
pub fn allocate_degrees(masses: &[f64], n: usize) -> Result<DegreeAllocation> {
    if masses.is_empty() {
        return Err(Error::InvalidArgument("empty mass vector".into()));
    }
    if masses.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidArgument(format!("masses must be positive: {masses:?}")));
    }
    let total: f64 = masses.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!("masses sum to {total}, not 1")));
    }
    let m = masses.len();
    // The slack absorbs products such as 10 × 0.6 = 6.000000000000001.
    let mut n_j: Vec<usize> = masses[..m - 1].iter().map(|w| (n as f64 * w + 1e-9).floor() as usize).collect();
    let used: usize = n_j.iter().sum();
    if used > n {
        return Err(Error::DegreeBelowN1(format!("n = {n} cannot cover {m} components")));
    }
    n_j.push(n - used);
    if let Some(j) = n_j.iter().position(|&d| d == 0) {
        return Err(Error::DegreeBelowN1(format!(
            "n = {n} gives component {j} (mass {:.4}) no roots",
            masses[j]
        )));
    }
    let n1 = 10.0 / masses.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(DegreeAllocation { n, n_j, n1, below_n1: (n as f64) <= n1 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionArc {
    /// Relative angles bounding the arc (`theta_end − theta_start = 2π/n_j`).
    pub theta_start: f64,
    pub theta_end: f64,
    pub start: C64,
    /// Endpoint `ξ_k`.
    pub endpoint: C64,
    pub centroid: C64,
    pub mass: f64,
    pub arclength: f64,
    pub diam: f64,
    pub dist_to_k: f64,
    /// Polyline through the trace nodes on the arc.
    #[serde(skip)]
    pub points: Vec<C64>,
}

impl PartitionArc {
    /// Distance from `z` to the arc polyline.
    pub fn distance(&self, z: C64) -> f64 {
        if self.points.len() < 2 {
            return self.points.first().map_or(f64::INFINITY, |p| (z - p).norm());
        }
        self.points
            .windows(2)
            .map(|w| point_segment_distance(z, w[0], w[1]))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub component: usize,
    pub level: f64,
    /// Rotation of the split relative to the trace start.
    pub phase: f64,
    pub arcs: Vec<PartitionArc>,
}

impl Partition {
    pub fn centroids(&self) -> Vec<C64> {
        self.arcs.iter().map(|a| a.centroid).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.arcs.iter().map(|a| a.mass).sum()
    }
}

/// Splits `curve` into `n_j` arcs of equal `θ` length anchored at the trace
/// start.
pub fn partition_level_curve(curve: &LevelCurve, n_j: usize, set: &CompactSet) -> Result<Partition> {
    partition_with_phase(curve, n_j, set, 0.0)
}

/// As [`partition_level_curve`], with the first arc starting at relative
/// angle `phase`.
pub fn partition_with_phase(curve: &LevelCurve, n_j: usize, set: &CompactSet, phase: f64) -> Result<Partition> {
    if n_j == 0 {
        return Err(Error::InvalidArgument("partition needs at least one arc".into()));
    }
    if curve.nodes.len() < 8 * n_j {
        return Err(Error::RefineTrace(format!(
            "{} nodes for {n_j} arcs; need at least {}",
            curve.nodes.len(),
            8 * n_j
        )));
    }
    let span = curve.theta_span().abs();
    let mass = curve.mass();
    let step = TAU / n_j as f64;
    let phase = phase.rem_euclid(step);
    let arcs = (0..n_j)
        .map(|k| {
            let a = phase + k as f64 * step;
            let b = a + step;
            let pieces = wrap_pieces(a, b, span);
            let mut integral = C64::new(0.0, 0.0);
            let mut arclength = 0.0;
            let mut points = Vec::new();
            for &(lo, hi) in &pieces {
                let (int, len, pts) = arc_piece(curve, lo, hi);
                integral += int;
                arclength += len;
                points.extend(pts);
            }
            let diam = points
                .iter()
                .enumerate()
                .flat_map(|(i, p)| points[i + 1..].iter().map(move |q| (p - q).norm()))
                .fold(0.0, f64::max);
            let dist_to_k = points.iter().map(|p| set.distance(*p)).fold(f64::INFINITY, f64::min);
            PartitionArc {
                theta_start: a,
                theta_end: b,
                start: curve.point_at_theta(wrap(a, span)),
                endpoint: curve.point_at_theta(wrap(b, span)),
                centroid: integral / step,
                mass: mass * step / TAU,
                arclength,
                diam,
                dist_to_k,
                points,
            }
        })
        .collect();
    Ok(Partition { component: curve.component, level: curve.level, phase, arcs })
}

fn wrap(t: f64, span: f64) -> f64 {
    if t > span {
        t - span
    } else {
        t
    }
}

/// `[a, b]` with `0 ≤ a < span`, `b ≤ a + span`, split at the seam.
fn wrap_pieces(a: f64, b: f64, span: f64) -> Vec<(f64, f64)> {
    if b <= span {
        vec![(a, b)]
    } else if a >= span {
        vec![(a - span, b - span)]
    } else {
        vec![(a, span), (0.0, b - span)]
    }
}

/// `∫ z dθ`, arclength and sample points over relative angles `[lo, hi]`.
/// Integrates the Hermite interpolant exactly, node interval by interval.
fn arc_piece(curve: &LevelCurve, lo: f64, hi: f64) -> (C64, f64, Vec<C64>) {
    let mut knots = vec![lo];
    let n = curve.nodes.len();
    let first = {
        let (mut a, mut b) = (0, n);
        while a < b {
            let mid = (a + b) / 2;
            if curve.relative_theta(mid) > lo {
                b = mid;
            } else {
                a = mid + 1;
            }
        }
        a
    };
    for i in first..n {
        let t = curve.relative_theta(i);
        if t >= hi {
            break;
        }
        knots.push(t);
    }
    knots.push(hi);
    let (gx, gw) = gl8();
    let mut integral = C64::new(0.0, 0.0);
    let mut length = 0.0;
    let mut points = Vec::with_capacity(knots.len());
    let mut prev = curve.hermite_at_theta(lo);
    points.push(prev.0);
    for w in knots.windows(2) {
        let h = w[1] - w[0];
        if h <= 0.0 {
            continue;
        }
        let next = curve.hermite_at_theta(w[1]);
        integral += (prev.0 + next.0) * (0.5 * h) + (prev.1 - next.1) * (h * h / 12.0);
        length += gx
            .iter()
            .zip(gw)
            .map(|(x, wt)| wt * curve.hermite_at_theta(w[0] + 0.5 * h * (x + 1.0)).1.norm())
            .sum::<f64>()
            * 0.5
            * h;
        points.push(next.0);
        prev = next;
    }
    (integral, length, points)
}

/// Arc masses recomputed as `(1/2π) ∫ |∇g| ds` along chords between trace
/// points, with `|∇g|` evaluated afresh from the model.
pub fn flux_masses(partition: &Partition, curve: &LevelCurve, model: &ChargeModel) -> Vec<f64> {
    let span = curve.theta_span().abs();
    partition
        .arcs
        .iter()
        .map(|arc| {
            wrap_pieces(arc.theta_start, arc.theta_end, span)
                .into_iter()
                .map(|(lo, hi)| {
                    let (_, _, pts) = arc_piece(curve, lo, hi);
                    let grad: Vec<f64> = pts.iter().map(|p| model.eval(*p).gradient().norm()).collect();
                    pts.windows(2)
                        .zip(grad.windows(2))
                        .map(|(p, g)| 0.5 * (g[0] + g[1]) * (p[1] - p[0]).norm())
                        .sum::<f64>()
                })
                .sum::<f64>()
                / TAU
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcScaleReport {
    /// `max_k |I_k| / d(I_k, K)`.
    pub length_ratio: f64,
    /// `max_k diam(I_k) / |ξ_k − ξ_{k−1}|`.
    pub chord_ratio: f64,
    /// `max_k |ζ_k − ξ_k| / d(I_k, K)`.
    pub pullback_ratio: f64,
    /// `|I_k| ≤ 0.1 d(I_k, K)` for every arc.
    pub length_bound_holds: bool,
    /// `|ζ_k − ξ_k| ≤ 0.2 d(I_k, K)` for every arc.
    pub pullback_bound_holds: bool,
    /// Smallest `c` for which the length bound would hold, from `ratio ∝ 1/c`.
    pub minimal_c: f64,
}

/// Geometric ratios behind the root-placement estimates, for a partition
/// built at level `s = c/n`.
pub fn arc_scale_diagnostics(partition: &Partition, set: &CompactSet, c: f64) -> ArcScaleReport {
    let mut length_ratio: f64 = 0.0;
    let mut chord_ratio: f64 = 0.0;
    let mut pullback_ratio: f64 = 0.0;
    for arc in &partition.arcs {
        let d = arc.dist_to_k.min(set.distance(arc.endpoint));
        length_ratio = length_ratio.max(arc.arclength / d);
        let chord = (arc.endpoint - arc.start).norm();
        if chord > 0.0 {
            chord_ratio = chord_ratio.max(arc.diam / chord);
        }
        pullback_ratio = pullback_ratio.max((arc.centroid - arc.endpoint).norm() / d);
    }
    if partition.arcs.len() == 1 {
        chord_ratio = f64::INFINITY;
    }
    ArcScaleReport {
        length_ratio,
        chord_ratio,
        pullback_ratio,
        length_bound_holds: length_ratio <= 0.1,
        pullback_bound_holds: pullback_ratio <= 0.2,
        minimal_c: c * length_ratio / 0.1,
    }
}
