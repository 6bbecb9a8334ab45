//! Green's function, capacity and equilibrium masses of a compact set.
//!
//! The equilibrium measure is discretized as a piecewise-constant density on
//! boundary panels. Panel masses `q_i` and the Robin constant `F` solve the
//! collocation system `Σ q_i U_i(z_c) + F = 0` at panel midpoints with
//! `Σ q_i = 1`, where `U_i` is the mean log-kernel of panel `i`. Green's
//! function is then `g(z) = Σ q_i U_i(z) + F` and `κ(K) = e^{−F}`.

pub mod panel;
pub mod trace;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CompactSet, ShapeKind};
pub use panel::Panel;
pub use trace::{estimate_s0, trace_level_curve, LevelCurve, TraceNode, TraceOptions};

/// Condition estimate above which the collocation system is rejected.
pub const MAX_CONDITION: f64 = 1e13;

/// Traced levels must exceed the model residual by this factor.
pub const RESOLUTION_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumConfig {
    /// Panels per component.
    pub panels: usize,
    /// Tikhonov weight on the panel masses (0 disables).
    pub regularization: f64,
    /// Maximum admissible `sup |g|` on held-out boundary points.
    pub residual_tol: f64,
}

impl Default for EquilibriumConfig {
    fn default() -> Self {
        Self { panels: 256, regularization: 0.0, residual_tol: 2e-2 }
    }
}

impl EquilibriumConfig {
    pub fn with_panels(panels: usize) -> Self {
        Self { panels, ..Self::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChargeModel {
    pub set: CompactSet,
    pub panels: Vec<Panel>,
    /// Component index of each panel.
    pub component: Vec<usize>,
    /// Panel masses `q_i`, summing to one.
    pub weights: Vec<f64>,
    /// Robin constant `F`; the capacity is `e^{−F}`.
    pub robin: f64,
    /// Equilibrium mass `ω_j` of each component.
    pub masses: Vec<f64>,
    /// `sup |g|` over boundary points not used for collocation.
    pub validation_residual: f64,
    /// Number of panels with a negative mass.
    pub negative_weights: usize,
    pub condition_estimate: f64,
}

fn build_panels(set: &CompactSet, per_component: usize) -> (Vec<Panel>, Vec<usize>) {
    let mut panels = Vec::new();
    let mut component = Vec::new();
    for (j, shape) in set.components.iter().enumerate() {
        let breaks = shape.panel_breaks(per_component);
        match shape.kind {
            ShapeKind::Disk { center, radius, phase } => {
                for w in breaks.windows(2) {
                    panels.push(Panel::CircleArc {
                        center,
                        radius,
                        t0: phase + 2.0 * PI * w[0],
                        t1: phase + 2.0 * PI * w[1],
                    });
                    component.push(j);
                }
            }
            _ => {
                for w in breaks.windows(2) {
                    panels.push(Panel::Line { a: shape.point_at(w[0]), b: shape.point_at(w[1]) });
                    component.push(j);
                }
            }
        }
    }
    (panels, component)
}

/// Solves for the discrete equilibrium measure of `set`.
pub fn solve_equilibrium(set: &CompactSet, config: &EquilibriumConfig) -> Result<ChargeModel> {
    if config.panels < 32 {
        return Err(Error::InvalidArgument(format!(
            "need at least 32 panels per component, got {}",
            config.panels
        )));
    }
    if config.regularization < 0.0 {
        return Err(Error::InvalidArgument("regularization must be nonnegative".into()));
    }
    let (panels, component) = build_panels(set, config.panels);
    let n = panels.len();
    let colloc: Vec<C64> = panels.iter().map(Panel::midpoint).collect();

    // rows: collocation points, columns: panels
    let rows: Vec<Vec<f64>> = colloc
        .par_iter()
        .map(|&z| panels.iter().map(|p| p.log_potential(z)).collect())
        .collect();

    // Eliminate q_{n-1} = 1 − Σ_{i<n-1} q_i; unknowns are (q_0..q_{n-2}, F).
    let extra = if config.regularization > 0.0 { n - 1 } else { 0 };
    let mut a = DMatrix::<f64>::zeros(n + extra, n);
    let mut rhs = DVector::<f64>::zeros(n + extra);
    for (c, row) in rows.iter().enumerate() {
        let last = row[n - 1];
        for i in 0..n - 1 {
            a[(c, i)] = row[i] - last;
        }
        a[(c, n - 1)] = 1.0;
        rhs[c] = -last;
    }
    let lambda = config.regularization.sqrt();
    for i in 0..extra {
        a[(n + i, i)] = lambda;
    }

    let qr = a.qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..n).map(|i| r[(i, i)].abs()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if dmin > 0.0 { dmax / dmin } else { f64::INFINITY };
    if !(condition < MAX_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }
    let qtb = qr.q().transpose() * rhs;
    let x = r
        .solve_upper_triangular(&qtb)
        .ok_or(Error::IllConditioned(condition))?;

    let mut weights: Vec<f64> = x.iter().take(n - 1).copied().collect();
    let partial: f64 = weights.iter().sum();
    weights.push(1.0 - partial);
    let robin = x[n - 1];

    let mut masses = vec![0.0; set.len()];
    for (q, &j) in weights.iter().zip(&component) {
        masses[j] += q;
    }
    let negative_weights = weights.iter().filter(|&&q| q < 0.0).count();

    let mut model = ChargeModel {
        set: set.clone(),
        panels,
        component,
        weights,
        robin,
        masses,
        validation_residual: 0.0,
        negative_weights,
        condition_estimate: condition,
    };
    // Held-out points at the quarter points of every panel.
    let probes: Vec<C64> = model
        .panels
        .iter()
        .flat_map(|p| [p.point(0.25), p.point(0.75)])
        .collect();
    model.validation_residual = probes
        .par_iter()
        .map(|&z| model.green(z).abs())
        .reduce(|| 0.0, f64::max);
    if model.validation_residual > config.residual_tol {
        return Err(Error::InsufficientResolution(model.validation_residual));
    }
    Ok(model)
}

/// Per-point evaluation of the complex potential.
#[derive(Debug, Clone, Copy)]
pub struct ComplexEval {
    /// Green's function value.
    pub green: f64,
    /// `F'(z)` for `F = g + i·g̃`; the gradient of `g` is `conj(F')`.
    pub derivative: C64,
}

impl ComplexEval {
    pub fn gradient(&self) -> C64 {
        self.derivative.conj()
    }
}

impl ChargeModel {
    /// Rejects levels too close to the discretization error of `g` on `∂K`.
    pub fn check_resolution(&self, s: f64) -> Result<()> {
        if s < RESOLUTION_FACTOR * self.validation_residual {
            return Err(Error::LevelBelowResolution { s, residual: self.validation_residual, factor: RESOLUTION_FACTOR });
        }
        Ok(())
    }

    pub fn capacity(&self) -> f64 {
        (-self.robin).exp()
    }

    pub fn component_count(&self) -> usize {
        self.masses.len()
    }

    /// Panel midpoints; the nominal charge locations.
    pub fn charge_points(&self) -> Vec<C64> {
        self.panels.iter().map(Panel::midpoint).collect()
    }

    /// Green's function with pole at infinity.
    pub fn green(&self, z: C64) -> f64 {
        self.panels
            .iter()
            .zip(&self.weights)
            .map(|(p, q)| q * p.log_potential(z))
            .sum::<f64>()
            + self.robin
    }

    /// Like [`ChargeModel::green`] but rejects points of `K`.
    pub fn green_checked(&self, z: C64) -> Result<f64> {
        let g = self.green(z);
        if self.set.distance(z) == 0.0 || g < -1e-8 {
            return Err(Error::InsideSet(format!("{z}"), g));
        }
        Ok(g)
    }

    pub fn eval(&self, z: C64) -> ComplexEval {
        let mut g = self.robin;
        let mut der = C64::new(0.0, 0.0);
        for (p, q) in self.panels.iter().zip(&self.weights) {
            let (v, d) = p.complex_potential(z);
            g += q * v.re;
            der += q * d;
        }
        ComplexEval { green: g, derivative: der }
    }

    /// Like [`ChargeModel::eval`], also writing the per-panel conjugate
    /// potentials (each defined modulo `2π`) into `args`.
    pub fn eval_with_args(&self, z: C64, args: &mut Vec<f64>) -> ComplexEval {
        args.clear();
        let mut g = self.robin;
        let mut der = C64::new(0.0, 0.0);
        for (p, q) in self.panels.iter().zip(&self.weights) {
            let (v, d) = p.complex_potential(z);
            g += q * v.re;
            der += q * d;
            args.push(v.im);
        }
        ComplexEval { green: g, derivative: der }
    }

    /// Change of the conjugate function `g̃` between two nearby points whose
    /// per-panel arguments are `from` and `to`.
    pub fn conjugate_increment(&self, from: &[f64], to: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(from.iter().zip(to))
            .map(|(q, (a, b))| {
                let mut d = b - a;
                d -= 2.0 * PI * (d / (2.0 * PI)).round();
                q * d
            })
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))
    }
}

/// Ratio `κ(K_s) / (e^s κ(K))` from a fresh equilibrium solve on the traced
/// level curves, resampled at `panels` equal-measure vertices per component.
pub fn level_capacity_check(model: &ChargeModel, s: f64, panels: usize) -> Result<f64> {
    let s0 = estimate_s0(model, &TraceOptions::default())?;
    if !(s > 0.0 && s <= s0) {
        return Err(Error::InvalidArgument(format!("level {s} outside (0, s0 = {s0:.4}]")));
    }
    let opts = TraceOptions::default();
    let mut shapes = Vec::new();
    for j in 0..model.component_count() {
        let curve = trace_level_curve(model, j, s, &opts)?;
        let pts: Vec<C64> = (0..panels)
            .map(|k| curve.point_at_theta(2.0 * PI * k as f64 / panels as f64))
            .collect();
        shapes.push(crate::geometry::ComponentShape::jordan(pts)?);
    }
    let level_set = CompactSet::new(shapes)?;
    let level_model = solve_equilibrium(&level_set, &EquilibriumConfig::with_panels(panels))?;
    Ok(level_model.capacity() / (s.exp() * model.capacity()))
}
