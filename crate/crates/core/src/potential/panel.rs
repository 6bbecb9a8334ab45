//! Boundary panels carrying a uniform (per unit length) charge density.
//!
//! Each panel contributes the mean of `Log(z - y)` over its points. The real
//! part is the logarithmic potential; the imaginary part is only defined up to
//! multiples of `2π` and is meant to be differenced between nearby points.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
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
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

pub(crate) fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

/// Distance (in panel lengths) beyond which a line panel is integrated by
/// an 8-point rule instead of the closed form, which cancels badly far away.
const FAR_FIELD: f64 = 20.0;
const MAX_DEPTH: u32 = 52;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Panel {
    Line { a: C64, b: C64 },
    /// Arc of the circle `center + radius·e^{it}`, `t ∈ [t0, t1]`.
    CircleArc { center: C64, radius: f64, t0: f64, t1: f64 },
}

/// `u·Log(u) − u`, continuous at 0.
fn ulogu(u: C64) -> C64 {
    if u == C64::new(0.0, 0.0) {
        C64::new(0.0, 0.0)
    } else {
        u * u.ln() - u
    }
}

fn re_ulogu(u: C64) -> f64 {
    let r = u.norm();
    if r == 0.0 {
        0.0
    } else {
        u.re * r.ln() - u.im * u.im.atan2(u.re) - u.re
    }
}

impl Panel {
    pub fn length(&self) -> f64 {
        match *self {
            Panel::Line { a, b } => (b - a).norm(),
            Panel::CircleArc { radius, t0, t1, .. } => radius * (t1 - t0),
        }
    }

    /// Point at local parameter `u ∈ [0, 1]`, uniform in arclength.
    pub fn point(&self, u: f64) -> C64 {
        match *self {
            Panel::Line { a, b } => a + (b - a) * u,
            Panel::CircleArc { center, radius, t0, t1 } => {
                center + C64::from_polar(radius, t0 + (t1 - t0) * u)
            }
        }
    }

    pub fn midpoint(&self) -> C64 {
        self.point(0.5)
    }

    /// Mean of `log|z − y|` over the panel.
    pub fn log_potential(&self, z: C64) -> f64 {
        match *self {
            Panel::Line { a, b } => {
                let d = b - a;
                let u0 = (z - a) / d;
                if (u0 - 0.5).norm() > FAR_FIELD {
                    let (x, w) = gl8();
                    return x
                        .iter()
                        .zip(w)
                        .map(|(&xi, &wi)| 0.5 * wi * (z - self.point(0.5 * (xi + 1.0))).norm().ln())
                        .sum();
                }
                let u1 = u0 - 1.0;
                d.norm().ln() + re_ulogu(u0) - re_ulogu(u1)
            }
            Panel::CircleArc { center, radius, t0, t1 } => {
                let rho = (z - center).norm();
                if (rho - radius).abs() <= 1e-13 * radius {
                    return circle_log_potential(radius, (z - center).arg(), t0, t1);
                }
                let mut acc = 0.0;
                self.arc_quadrature(z, t0, t1, 0, &mut |y, w| acc += w * (z - y).norm().ln());
                acc / (t1 - t0)
            }
        }
    }

    /// Mean of `Log(z − y)` (imaginary part up to `2πk`) and mean of `1/(z − y)`.
    pub fn complex_potential(&self, z: C64) -> (C64, C64) {
        match *self {
            Panel::Line { a, b } => {
                let d = b - a;
                let u0 = (z - a) / d;
                if (u0 - 0.5).norm() > FAR_FIELD {
                    let mid = self.midpoint();
                    let reference = (z - mid).ln();
                    let (x, w) = gl8();
                    let mut val = C64::new(0.0, 0.0);
                    let mut der = C64::new(0.0, 0.0);
                    for (&xi, &wi) in x.iter().zip(w) {
                        let dz = z - self.point(0.5 * (xi + 1.0));
                        val += 0.5 * wi * (dz / (z - mid)).ln();
                        der += 0.5 * wi / dz;
                    }
                    return (reference + val, der);
                }
                let u1 = u0 - 1.0;
                let val = d.ln() + ulogu(u0) - ulogu(u1);
                let der = (u0.ln() - u1.ln()) / d;
                (val, der)
            }
            Panel::CircleArc { t0, t1, .. } => {
                let mid = self.midpoint();
                let reference = (z - mid).ln();
                let mut val = C64::new(0.0, 0.0);
                let mut der = C64::new(0.0, 0.0);
                self.arc_quadrature(z, t0, t1, 0, &mut |y, w| {
                    val += w * ((z - y) / (z - mid)).ln();
                    der += w / (z - y);
                });
                let span = t1 - t0;
                (reference + val / span, der / span)
            }
        }
    }

    /// Adaptive Gauss–Legendre over the angular sub-range `[ta, tb]`; calls
    /// `f(y, weight)` with weights in the angle variable.
    fn arc_quadrature(&self, z: C64, ta: f64, tb: f64, depth: u32, f: &mut dyn FnMut(C64, f64)) {
        let Panel::CircleArc { center, radius, .. } = *self else {
            unreachable!()
        };
        let chord = radius * (tb - ta);
        let mid = center + C64::from_polar(radius, 0.5 * (ta + tb));
        if (z - mid).norm() > 1.5 * chord || depth >= MAX_DEPTH {
            let (x, w) = gl16();
            let half = 0.5 * (tb - ta);
            for (&xi, &wi) in x.iter().zip(w) {
                let t = ta + half * (xi + 1.0);
                f(center + C64::from_polar(radius, t), wi * half);
            }
        } else {
            let tm = 0.5 * (ta + tb);
            self.arc_quadrature(z, ta, tm, depth + 1, f);
            self.arc_quadrature(z, tm, tb, depth + 1, f);
        }
    }
}

/// Mean of `log|z − y|` over the arc `[t0, t1]` for `z = c + r·e^{iφ}` on the
/// same circle, using `|z − y| = 2r·|sin((t − φ)/2)|` and splitting off the
/// `log|u|` singularity analytically.
fn circle_log_potential(radius: f64, phi: f64, t0: f64, t1: f64) -> f64 {
    let tm = 0.5 * (t0 + t1);
    let phi = phi + 2.0 * PI * ((tm - phi) / (2.0 * PI)).round();
    let (u0, u1) = (0.5 * (t0 - phi), 0.5 * (t1 - phi));
    let prim = |u: f64| if u == 0.0 { 0.0 } else { u * u.abs().ln() - u };
    let singular = prim(u1) - prim(u0);
    let (x, w) = gl16();
    let half = 0.5 * (u1 - u0);
    let smooth: f64 = x
        .iter()
        .zip(w)
        .map(|(&xi, &wi)| {
            let u = u0 + half * (xi + 1.0);
            let sinc = if u.abs() < 1e-8 { 1.0 - u * u / 6.0 } else { u.sin() / u };
            wi * half * sinc.abs().ln()
        })
        .sum();
    // dt = 2 du
    (2.0 * radius).ln() + 2.0 * (singular + smooth) / (t1 - t0)
}
