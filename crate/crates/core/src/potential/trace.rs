//! Predictor–corrector tracing of Green level curves `{g = s}`.
//!
//! Nodes carry `θ = (g̃(z) − g̃(z₀))/ω_j`, the argument of `φ_j = Φ^{1/ω_j}`,
//! accumulated from per-panel conjugate increments. Over a closed trace the
//! increments of every panel of component `j` sum to one full turn, so the
//! net change of `θ` is `2π` up to rounding.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::ChargeModel;
use crate::error::{Error, Result};

/// Upper bound returned by [`estimate_s0`] (and its answer for one component).
pub const S0_CAP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    /// Largest admissible increment of `θ` between nodes.
    pub max_dtheta: f64,
    /// Step length never exceeds this fraction of the distance to `K`.
    pub distance_fraction: f64,
    pub max_nodes: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self { max_dtheta: 0.01, distance_fraction: 0.25, max_nodes: 500_000 }
    }
}

impl TraceOptions {
    pub fn with_step(max_dtheta: f64) -> Self {
        Self { max_dtheta, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceNode {
    pub z: C64,
    pub theta: f64,
    /// `dz/dθ` along the curve.
    pub dz_dtheta: C64,
    /// `|∇g|` at the node.
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelCurve {
    pub component: usize,
    pub level: f64,
    /// Closed trace: the last node repeats the first with `θ` advanced by
    /// (nominally) `2π`.
    pub nodes: Vec<TraceNode>,
    /// Raw change of `g̃` over the trace (`2π ω_j` in theory).
    pub conjugate_change: f64,
}

impl LevelCurve {
    pub fn theta_span(&self) -> f64 {
        self.nodes.last().unwrap().theta - self.nodes[0].theta
    }

    /// Same curve traversed backwards with `θ` negated.
    pub fn reversed(&self) -> Self {
        let nodes = self
            .nodes
            .iter()
            .rev()
            .map(|n| TraceNode { z: n.z, theta: -n.theta, dz_dtheta: -n.dz_dtheta, grad_norm: n.grad_norm })
            .collect();
        Self { nodes, conjugate_change: -self.conjugate_change, ..self.clone() }
    }

    pub fn points(&self) -> Vec<C64> {
        self.nodes.iter().map(|n| n.z).collect()
    }

    /// Index `i` with `θ_i ≤ θ ≤ θ_{i+1}` (θ measured in the direction of
    /// traversal, relative to the first node).
    fn bracket(&self, theta: f64) -> usize {
        let sign = self.direction();
        let key = |n: &TraceNode| sign * (n.theta - self.nodes[0].theta);
        let t = theta;
        let idx = self.nodes.partition_point(|n| key(n) <= t);
        idx.clamp(1, self.nodes.len() - 1) - 1
    }

    fn direction(&self) -> f64 {
        if self.theta_span() >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Cubic Hermite interpolation of the curve at relative angle `theta`
    /// (`0 ≤ theta ≤ |span|`, measured along the traversal).
    pub fn point_at_theta(&self, theta: f64) -> C64 {
        self.hermite_at_theta(theta).0
    }

    /// Interpolated point and `dz/dθ` (with respect to the relative angle).
    pub fn hermite_at_theta(&self, theta: f64) -> (C64, C64) {
        let i = self.bracket(theta);
        let sign = self.direction();
        let (a, b) = (&self.nodes[i], &self.nodes[i + 1]);
        let ta = sign * (a.theta - self.nodes[0].theta);
        let tb = sign * (b.theta - self.nodes[0].theta);
        let h = tb - ta;
        if h <= 0.0 {
            return (a.z, sign * a.dz_dtheta);
        }
        let u = ((theta - ta) / h).clamp(0.0, 1.0);
        let (da, db) = (sign * a.dz_dtheta * h, sign * b.dz_dtheta * h);
        let (u2, u3) = (u * u, u * u * u);
        let z = a.z * (2.0 * u3 - 3.0 * u2 + 1.0)
            + da * (u3 - 2.0 * u2 + u)
            + b.z * (-2.0 * u3 + 3.0 * u2)
            + db * (u3 - u2);
        let dz = a.z * (6.0 * u2 - 6.0 * u)
            + da * (3.0 * u2 - 4.0 * u + 1.0)
            + b.z * (-6.0 * u2 + 6.0 * u)
            + db * (3.0 * u2 - 2.0 * u);
        (z, dz / h)
    }

    /// Relative angle of node `i` along the traversal.
    pub fn relative_theta(&self, i: usize) -> f64 {
        self.direction() * (self.nodes[i].theta - self.nodes[0].theta)
    }

    /// `ω_j` recovered from the trace (`conjugate_change / span`).
    pub fn mass(&self) -> f64 {
        (self.conjugate_change / self.theta_span()).abs()
    }

    /// Node spacing statistics: largest distance between consecutive nodes.
    pub fn max_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| (w[1].z - w[0].z).norm()).fold(0.0, f64::max)
    }
}

struct Probe {
    z: C64,
    grad: C64,
    args: Vec<f64>,
}

fn probe(model: &ChargeModel, z: C64) -> Probe {
    let mut args = Vec::with_capacity(model.panels.len());
    let e = model.eval_with_args(z, &mut args);
    Probe { z, grad: e.gradient(), args }
}

fn node(p: &Probe, theta: f64, mass: f64) -> TraceNode {
    let gn = p.grad.norm();
    // tangent i·∇g/|∇g|, speed |dz/dθ| = ω_j/|∇g|
    let dz = C64::i() * p.grad / gn * (mass / gn);
    TraceNode { z: p.z, theta, dz_dtheta: dz, grad_norm: gn }
}

/// Point on the ray from the component's start point where `g = s`.
fn find_start(model: &ChargeModel, j: usize, s: f64) -> Result<C64> {
    let (p, dir) = model.set.components[j].start_ray();
    let diam = model.set.diam;
    let f = |r: f64| model.green(p + dir * r) - s;
    // Grow geometrically from the boundary so the bracket holds the first crossing.
    let mut hi = (1e-3 * s * diam).max(1e-12 * diam);
    let mut lo = 0.0;
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 1.5;
        if hi > 1e3 * diam {
            return Err(Error::LevelExceedsS0(s, "no level crossing on the start ray".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(p + dir * (0.5 * (lo + hi)))
}

fn newton_to_level(model: &ChargeModel, mut z: C64, s: f64, tol: f64) -> Option<Probe> {
    for _ in 0..40 {
        let e = model.eval(z);
        let grad = e.gradient();
        let err = e.green - s;
        if err.abs() <= tol {
            return Some(probe(model, z));
        }
        let gn2 = grad.norm_sqr();
        if gn2 == 0.0 || !gn2.is_finite() {
            return None;
        }
        z -= grad * (err / gn2);
    }
    None
}

/// Traces the level curve `K_s^j` surrounding component `j`.
pub fn trace_level_curve(model: &ChargeModel, j: usize, s: f64, opts: &TraceOptions) -> Result<LevelCurve> {
    trace_guarded(model, j, s, opts, |_| true)
}

fn trace_guarded(
    model: &ChargeModel,
    j: usize,
    s: f64,
    opts: &TraceOptions,
    keep: impl Fn(C64) -> bool,
) -> Result<LevelCurve> {
    if j >= model.component_count() {
        return Err(Error::InvalidArgument(format!("component index {j} out of range")));
    }
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("level must be positive, got {s}")));
    }
    let mass = model.masses[j];
    let diam = model.set.diam;
    let tol = 1e-12 * s.max(1.0);
    let start = find_start(model, j, s)?;
    let first = newton_to_level(model, start, s, tol).ok_or_else(|| Error::CorrectorDiverged(s, format!("{start}")))?;
    let z0 = first.z;
    let mut nodes = vec![node(&first, 0.0, mass)];
    let mut cur = first;
    let mut theta = 0.0;
    let mut raw = 0.0;
    let mut last_h = f64::INFINITY;

    loop {
        let gn = cur.grad.norm();
        let dist = model.set.distance(cur.z);
        let h_cap = (opts.max_dtheta * mass / gn).min(opts.distance_fraction * dist);
        if theta > PI && (cur.z - z0).norm() <= 1.5 * h_cap {
            let closing = probe(model, z0);
            let d = model.conjugate_increment(&cur.args, &closing.args);
            if d <= 0.0 {
                return Err(Error::LevelExceedsS0(s, "trace overshot its start point".into()));
            }
            raw += d;
            theta += d / mass;
            nodes.push(node(&closing, theta, mass));
            break;
        }
        let mut h = h_cap.min(2.0 * last_h);
        let tangent = C64::i() * cur.grad / gn;
        let next = loop {
            if h < 1e-13 * diam {
                return Err(Error::CorrectorDiverged(s, format!("{} (θ = {theta:.4})", cur.z)));
            }
            let predicted = cur.z + tangent * h;
            match newton_to_level(model, predicted, s, tol) {
                Some(p) if (p.z - predicted).norm() <= 0.5 * h => {
                    let d = model.conjugate_increment(&cur.args, &p.args);
                    if d > 0.0 && d / mass <= 3.0 * opts.max_dtheta {
                        break (p, d);
                    }
                }
                _ => {}
            }
            h *= 0.5;
        };
        last_h = h;
        let (p, d) = next;
        raw += d;
        theta += d / mass;
        nodes.push(node(&p, theta, mass));
        cur = p;
        if !keep(cur.z) {
            return Err(Error::LevelExceedsS0(s, format!("level curve of component {j} left its region")));
        }
        if theta > TAU + 0.5 {
            return Err(Error::LevelExceedsS0(
                s,
                format!("θ passed 2π without closing (curve encloses more than component {j})"),
            ));
        }
        if nodes.len() > opts.max_nodes {
            return Err(Error::LevelExceedsS0(s, BUDGET_MSG.into()));
        }
    }
    if (theta - TAU).abs() > 1e-6 {
        return Err(Error::LevelExceedsS0(s, format!("net θ change {theta} ≠ 2π")));
    }
    Ok(LevelCurve { component: j, level: s, nodes, conjugate_change: raw })
}

const BUDGET_MSG: &str = "trace did not close within the node budget";

/// Node budget for feasibility traces in [`estimate_s0`].
const S0_NODE_BUDGET: usize = 20_000;

fn level_admissible(model: &ChargeModel, s: f64, opts: &TraceOptions) -> Result<bool> {
    for j in 0..model.component_count() {
        let own = |z: C64| {
            let (nearest, dist) = model.set.nearest_component(z);
            nearest == j || model.set.components[j].distance(z) <= dist
        };
        let start_ok = find_start(model, j, s).map(&own).unwrap_or(false);
        if !start_ok {
            return Ok(false);
        }
        match trace_guarded(model, j, s, opts, own) {
            Ok(_) => {}
            Err(Error::LevelExceedsS0(_, msg)) if msg == BUDGET_MSG => {
                return Err(Error::LevelExceedsS0(s, "s0 is below the trace resolution".into()));
            }
            Err(_) => return Ok(false),
        }
    }
    Ok(true)
}

/// Safe `s₀`: half the largest level at which every component has its own
/// closed level curve whose points are nearest to that component.
pub fn estimate_s0(model: &ChargeModel, opts: &TraceOptions) -> Result<f64> {
    if model.component_count() == 1 {
        return Ok(S0_CAP);
    }
    let coarse = TraceOptions {
        max_dtheta: opts.max_dtheta.max(0.1),
        max_nodes: opts.max_nodes.min(S0_NODE_BUDGET),
        ..*opts
    };
    if level_admissible(model, S0_CAP, &coarse)? {
        return Ok(S0_CAP / 2.0);
    }
    let mut hi = S0_CAP;
    let mut lo = S0_CAP / 2.0;
    while !level_admissible(model, lo, &coarse)? {
        hi = lo;
        lo /= 2.0;
        if lo < 1e-8 {
            return Err(Error::LevelExceedsS0(lo, "no admissible level found".into()));
        }
    }
    while hi - lo > 0.01 * lo {
        let mid = 0.5 * (lo + hi);
        if level_admissible(model, mid, &coarse)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CompactSet, ComponentShape};
    use crate::potential::{solve_equilibrium, EquilibriumConfig};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn model(shapes: Vec<ComponentShape>, panels: usize) -> ChargeModel {
        solve_equilibrium(&CompactSet::new(shapes).unwrap(), &EquilibriumConfig::with_panels(panels)).unwrap()
    }

    #[test]
    fn disk_level_curve_is_circle() {
        let m = model(vec![ComponentShape::disk(c(0.0, 0.0), 1.0).unwrap()], 256);
        let curve = trace_level_curve(&m, 0, 0.5, &TraceOptions::default()).unwrap();
        for n in &curve.nodes {
            assert_abs_diff_eq!(n.z.norm(), 0.5f64.exp(), epsilon = 1e-5);
            // θ is the polar angle for the disk
            let ang = n.z.arg().rem_euclid(TAU);
            let th = n.theta.rem_euclid(TAU);
            assert!((ang - th).abs() < 1e-6 || (ang - th).abs() > TAU - 1e-6);
        }
        assert_abs_diff_eq!(curve.theta_span(), TAU, epsilon = 1e-6);
        assert!(curve.nodes.windows(2).all(|w| w[1].theta > w[0].theta));
        assert!((curve.nodes[0].z - curve.nodes.last().unwrap().z).norm() < 1e-14);
    }

    #[test]
    fn interval_level_curve_is_bernstein_ellipse() {
        let m = model(vec![ComponentShape::segment(c(-1.0, 0.0), c(1.0, 0.0)).unwrap()], 512);
        let curve = trace_level_curve(&m, 0, 0.3, &TraceOptions::default()).unwrap();
        let (a, b) = (0.3f64.cosh(), 0.3f64.sinh());
        let xmax = curve.nodes.iter().map(|n| n.z.re.abs()).fold(0.0, f64::max);
        let ymax = curve.nodes.iter().map(|n| n.z.im.abs()).fold(0.0, f64::max);
        assert_abs_diff_eq!(xmax, a, epsilon = 1e-3);
        assert_abs_diff_eq!(ymax, b, epsilon = 1e-3);
        for n in &curve.nodes {
            let r = (n.z.re / a).powi(2) + (n.z.im / b).powi(2);
            assert_abs_diff_eq!(r, 1.0, epsilon = 2e-3);
        }
    }

    #[test]
    fn net_change_matches_mass() {
        let m = model(
            vec![
                ComponentShape::disk(c(-3.0, 0.0), 1.0).unwrap(),
                ComponentShape::segment(c(2.0, 0.0), c(3.0, 1.0)).unwrap(),
            ],
            128,
        );
        for j in 0..2 {
            let curve = trace_level_curve(&m, j, 0.1, &TraceOptions::default()).unwrap();
            assert_abs_diff_eq!(curve.conjugate_change, TAU * m.masses[j], epsilon = 1e-6);
            for n in &curve.nodes {
                assert_abs_diff_eq!(m.green(n.z), 0.1, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn merged_level_rejected() {
        let m = model(
            vec![
                ComponentShape::disk(c(-1.5, 0.0), 1.0).unwrap(),
                ComponentShape::disk(c(1.5, 0.0), 1.0).unwrap(),
            ],
            128,
        );
        let err = trace_level_curve(&m, 0, 1.5, &TraceOptions::default()).unwrap_err();
        assert!(matches!(err, Error::LevelExceedsS0(..)), "{err}");
    }

    #[test]
    fn s0_estimates() {
        let single = model(vec![ComponentShape::disk(c(0.0, 0.0), 1.0).unwrap()], 64);
        assert_eq!(estimate_s0(&single, &TraceOptions::default()).unwrap(), S0_CAP);

        let pair = model(
            vec![
                ComponentShape::disk(c(-3.0, 0.0), 1.0).unwrap(),
                ComponentShape::disk(c(3.0, 0.0), 1.0).unwrap(),
            ],
            128,
        );
        let s0 = estimate_s0(&pair, &TraceOptions::default()).unwrap();
        assert!(s0 > 0.0);
        let a = trace_level_curve(&pair, 0, s0, &TraceOptions::default()).unwrap();
        let b = trace_level_curve(&pair, 1, s0, &TraceOptions::default()).unwrap();
        let gap = a
            .nodes
            .iter()
            .flat_map(|p| b.nodes.iter().map(move |q| (p.z - q.z).norm()))
            .fold(f64::INFINITY, f64::min);
        assert!(gap > 0.0);

        let close = model(
            vec![
                ComponentShape::disk(c(-1.25, 0.0), 1.0).unwrap(),
                ComponentShape::disk(c(1.25, 0.0), 1.0).unwrap(),
            ],
            128,
        );
        let small = estimate_s0(&close, &TraceOptions::default()).unwrap();
        assert!(small > 0.0 && small < s0, "{small} vs {s0}");
    }

    #[test]
    fn two_interval_s0_matches_saddle_value() {
        // g(0) = ½·g_{[1/4,1]}(0) = ½·log 3 is the merge level.
        let m = model(
            vec![
                ComponentShape::segment(c(-1.0, 0.0), c(-0.5, 0.0)).unwrap(),
                ComponentShape::segment(c(0.5, 0.0), c(1.0, 0.0)).unwrap(),
            ],
            256,
        );
        let s0 = estimate_s0(&m, &TraceOptions::default()).unwrap();
        let merge = 0.5 * 3f64.ln();
        assert!(2.0 * s0 <= merge + 1e-3 && 2.0 * s0 > 0.8 * merge, "s0 = {s0}");
    }

    #[test]
    fn hermite_interpolation_on_circle() {
        let m = model(vec![ComponentShape::disk(c(0.0, 0.0), 1.0).unwrap()], 256);
        let curve = trace_level_curve(&m, 0, 0.2, &TraceOptions::with_step(0.05)).unwrap();
        for k in 0..50 {
            let th = TAU * (k as f64 + 0.37) / 50.0;
            let z = curve.point_at_theta(th);
            assert_abs_diff_eq!((z - C64::from_polar(0.2f64.exp(), th)).norm(), 0.0, epsilon = 1e-6);
        }
        let rev = curve.reversed();
        assert_abs_diff_eq!(rev.theta_span(), TAU, epsilon = 1e-6);
        assert!(rev.nodes.windows(2).all(|w| w[1].theta > w[0].theta));
        let z = rev.point_at_theta(1.0);
        assert_abs_diff_eq!((z - C64::from_polar(0.2f64.exp(), -1.0)).norm(), 0.0, epsilon = 1e-6);
    }
}
