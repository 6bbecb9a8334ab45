//! Quantitative diagnostics: line and area integrals over level curves and
//! strips, the gap `d(K, K_s)`, growth fits of Widom factors and the degree
//! sweep that ties them together.

use std::f64::consts::TAU;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CompactSet;
use crate::minimax::{lawson_chebyshev, LawsonConfig, MAX_DEGREE};
use crate::polynomials::{log_widom_factor, sup_norm, sup_on_boundary, totik_polynomial, TotikOptions};
use crate::potential::panel::gl8;
use crate::potential::{estimate_s0, trace_level_curve, ChargeModel, LevelCurve, TraceOptions};

/// Relative tolerance of adaptive subdivision near the evaluation point.
const LOCAL_TOL: f64 = 1e-3;

/// Gauss points of a traced curve, prepared once per curve: 8 points per
/// node interval with `ζ`, `ζ'` and `d(ζ, K)`.
struct PreparedCurve<'a> {
    curve: &'a LevelCurve,
    points: Vec<(C64, C64, f64)>,
    /// Distances are computed (otherwise reported as 0).
    distances: bool,
}

impl<'a> PreparedCurve<'a> {
    fn new(curve: &'a LevelCurve, set: &CompactSet, distances: bool) -> Self {
        let (gx, _) = gl8();
        let n = curve.nodes.len();
        let points = (0..n - 1)
            .into_par_iter()
            .flat_map_iter(|i| {
                let (a, b) = (curve.relative_theta(i), curve.relative_theta(i + 1));
                let h = 0.5 * (b - a);
                gx.iter()
                    .map(move |x| {
                        let (p, d) = curve.hermite_at_theta(a + h * (x + 1.0));
                        (p, d, if distances { set.distance(p) } else { 0.0 })
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        Self { curve, points, distances }
    }

    /// `∫ f(ζ, ζ', d(ζ,K)) dθ`: cached Gauss points away from `z`, adaptive
    /// bisection on node intervals within ten spacings of `z`.
    fn integral(&self, set: &CompactSet, z: C64, f: &impl Fn(C64, C64, f64) -> f64) -> f64 {
        let curve = self.curve;
        let (gx, gw) = gl8();
        let gauss = |a: f64, b: f64| -> f64 {
            let h = 0.5 * (b - a);
            gx.iter()
                .zip(gw)
                .map(|(x, w)| {
                    let (p, d) = curve.hermite_at_theta(a + h * (x + 1.0));
                    w * f(p, d, if self.distances { set.distance(p) } else { 0.0 })
                })
                .sum::<f64>()
                * h
        };
        fn adapt(g: &impl Fn(f64, f64) -> f64, a: f64, b: f64, whole: f64, depth: usize) -> f64 {
            let m = 0.5 * (a + b);
            let (l, r) = (g(a, m), g(m, b));
            if depth == 0 || (l + r - whole).abs() <= LOCAL_TOL * (l + r).abs() + 1e-300 {
                return l + r;
            }
            adapt(g, a, m, l, depth - 1) + adapt(g, m, b, r, depth - 1)
        }
        let n = curve.nodes.len();
        (0..n - 1)
            .map(|i| {
                let (a, b) = (curve.relative_theta(i), curve.relative_theta(i + 1));
                if b <= a {
                    return 0.0;
                }
                let (za, zb) = (curve.nodes[i].z, curve.nodes[i + 1].z);
                let spacing = (zb - za).norm();
                let cached = &self.points[8 * i..8 * i + 8];
                let whole = cached.iter().zip(gw).map(|(&(p, d, dist), w)| w * f(p, d, dist)).sum::<f64>() * 0.5 * (b - a);
                if (za - z).norm().min((zb - z).norm()) < 10.0 * spacing {
                    adapt(&gauss, a, b, whole, 30)
                } else {
                    whole
                }
            })
            .sum()
    }
}

fn line_kernel(z: C64) -> impl Fn(C64, C64, f64) -> f64 {
    move |p, d, dist| dist * d.norm() / (p - z).norm_sqr()
}

fn trace_all(model: &ChargeModel, s: f64, opts: &TraceOptions) -> Result<Vec<LevelCurve>> {
    model.check_resolution(s)?;
    (0..model.component_count()).into_par_iter().map(|j| trace_level_curve(model, j, s, opts)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupValue {
    pub value: f64,
    pub argmax: C64,
}

/// `sup_{z∈∂K} ∫_{K_s} d(ζ,K) / |ζ − z|² |dζ|`.
pub fn line_integral_bound(model: &ChargeModel, s: f64, zgrid: usize, opts: &TraceOptions) -> Result<SupValue> {
    let curves = trace_all(model, s, opts)?;
    let set = &model.set;
    let prepared: Vec<PreparedCurve> = curves.iter().map(|c| PreparedCurve::new(c, set, true)).collect();
    let f = |z: C64| -> f64 { prepared.iter().map(|c| c.integral(set, z, &line_kernel(z))).sum() };
    let est = sup_on_boundary(set, zgrid, 1e-6, f);
    Ok(SupValue { value: est.log_value, argmax: est.argmax })
}

/// `∫_{K_s} d(ζ,K) / |ζ − z|² |dζ|` at a single point.
pub fn line_integral_at(curves: &[LevelCurve], model: &ChargeModel, z: C64) -> f64 {
    curves.iter().map(|c| PreparedCurve::new(c, &model.set, true).integral(&model.set, z, &line_kernel(z))).sum()
}

/// Number of level curves (Gauss–Legendre nodes in `σ ∈ [s, 2s]`) used by
/// [`area_integral_bound`].
pub const AREA_LEVELS: usize = 8;

/// `sup_{z∈∂K} ∫_{s ≤ g ≤ 2s} |ζ − z|⁻² dm₂(ζ)`.
///
/// The strip is foliated by level curves: `dm₂ = ω_j dσ dθ / |∇g|²` and
/// `|dζ/dθ| = ω_j / |∇g|`, so each curve contributes
/// `∫ |ζ'|² / (ω_j |ζ − z|²) dθ`, integrated over `σ` by Gauss–Legendre.
pub fn area_integral_bound(model: &ChargeModel, s: f64, zgrid: usize, opts: &TraceOptions) -> Result<SupValue> {
    let levels = area_levels(model, s, opts)?;
    let prepared = prepare_levels(&model.set, &levels);
    let f = |z: C64| -> f64 { area_integral_at(&model.set, &prepared, z) };
    let est = sup_on_boundary(&model.set, zgrid, 1e-6, f);
    Ok(SupValue { value: est.log_value, argmax: est.argmax })
}

/// Level curves at the Gauss–Legendre nodes of `σ ∈ [s, 2s]`, with weights.
fn area_levels(model: &ChargeModel, s: f64, opts: &TraceOptions) -> Result<Vec<(f64, Vec<LevelCurve>)>> {
    let (gx, gw) = gl8();
    gx.iter()
        .zip(gw)
        .map(|(x, w)| {
            let sigma = s * (1.5 + 0.5 * x);
            trace_all(model, sigma, opts).map(|c| (0.5 * s * w, c))
        })
        .collect()
}

fn prepare_levels<'a>(set: &CompactSet, levels: &'a [(f64, Vec<LevelCurve>)]) -> Vec<(f64, Vec<PreparedCurve<'a>>)> {
    levels
        .iter()
        .map(|(w, curves)| (*w, curves.iter().map(|c| PreparedCurve::new(c, set, false)).collect()))
        .collect()
}

fn area_integral_at(set: &CompactSet, levels: &[(f64, Vec<PreparedCurve>)], z: C64) -> f64 {
    levels
        .iter()
        .map(|(weight, curves)| {
            weight
                * curves
                    .iter()
                    .map(|c| {
                        let mass = c.curve.mass();
                        let kernel = |p: C64, d: C64, _: f64| d.norm_sqr() / (mass * (p - z).norm_sqr());
                        c.integral(set, z, &kernel)
                    })
                    .sum::<f64>()
        })
        .sum()
}

/// Midpoint rule for `∫_{s ≤ g ≤ 2s} |ζ − z|⁻² dm₂` on a square grid of
/// spacing `h` covering `K_{2s}`; cells straddling the strip boundary or
/// close to `z` are split `refine × refine`.
pub fn area_integral_grid(model: &ChargeModel, s: f64, z: C64, h: f64, refine: usize) -> Result<f64> {
    let outer = trace_all(model, 2.0 * s, &TraceOptions::with_step(0.05))?;
    let (mut lo, mut hi) = (C64::new(f64::INFINITY, f64::INFINITY), C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in outer.iter().flat_map(|c| c.nodes.iter().map(|n| n.z)) {
        lo = C64::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = C64::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    let (nx, ny) = (((hi.re - lo.re) / h).ceil() as usize + 2, ((hi.im - lo.im) / h).ceil() as usize + 2);
    let origin = lo - C64::new(h, h);
    let rows: Vec<(f64, usize)> = (0..ny)
        .into_par_iter()
        .map(|iy| {
            let mut sum = 0.0;
            let mut cells = 0;
            let gs: Vec<f64> =
                (0..=nx).map(|ix| model.green(origin + C64::new(ix as f64 * h, iy as f64 * h))).collect();
            let gs_up: Vec<f64> =
                (0..=nx).map(|ix| model.green(origin + C64::new(ix as f64 * h, (iy + 1) as f64 * h))).collect();
            for ix in 0..nx {
                let corners = [gs[ix], gs[ix + 1], gs_up[ix], gs_up[ix + 1]];
                let cmin = corners.iter().cloned().fold(f64::INFINITY, f64::min);
                let cmax = corners.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let c0 = origin + C64::new((ix as f64 + 0.5) * h, (iy as f64 + 0.5) * h);
                let near = (c0 - z).norm() < 3.0 * h;
                let inside = cmin >= s && cmax <= 2.0 * s;
                let straddles = cmax >= s && cmin <= 2.0 * s;
                if inside && !near {
                    sum += h * h / (c0 - z).norm_sqr();
                    cells += 1;
                } else if straddles || near {
                    let k = refine.max(1);
                    let sub = h / k as f64;
                    for a in 0..k {
                        for b in 0..k {
                            let p = origin
                                + C64::new(ix as f64 * h + (a as f64 + 0.5) * sub, iy as f64 * h + (b as f64 + 0.5) * sub);
                            let g = model.green(p);
                            if g >= s && g <= 2.0 * s {
                                sum += sub * sub / (p - z).norm_sqr();
                            }
                        }
                    }
                    if inside {
                        cells += 1;
                    }
                }
            }
            (sum, cells)
        })
        .collect();
    let cells: usize = rows.iter().map(|r| r.1).sum();
    if cells < 50 {
        return Err(Error::RefineGrid(format!("only {cells} grid cells lie inside the strip; reduce h")));
    }
    Ok(rows.iter().map(|r| r.0).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoewnerGap {
    /// `d(K, K_s)`.
    pub gap: f64,
    /// `d(K, K_s) / s²`.
    pub ratio: f64,
    pub at: C64,
}

/// `d(K, K_s)` from trace nodes, refined by golden-section search on the
/// interpolated curve around the closest node.
pub fn loewner_gap(model: &ChargeModel, s: f64, opts: &TraceOptions) -> Result<LoewnerGap> {
    let curves = trace_all(model, s, opts)?;
    let mut best = (f64::INFINITY, C64::new(0.0, 0.0));
    for c in &curves {
        let (i, d) = c
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (i, model.set.distance(n.z)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        let n = c.nodes.len();
        let (a, b) = (c.relative_theta(i.saturating_sub(1)), c.relative_theta((i + 1).min(n - 1)));
        let (mut a, mut b) = (a, b);
        let dist = |t: f64| model.set.distance(c.point_at_theta(t));
        const G: f64 = 0.618_033_988_749_894_9;
        for _ in 0..80 {
            let (x1, x2) = (b - G * (b - a), a + G * (b - a));
            if dist(x1) <= dist(x2) {
                b = x2;
            } else {
                a = x1;
            }
        }
        let t = 0.5 * (a + b);
        let (dt, zt) = (dist(t), c.point_at_theta(t));
        let candidate = if dt < d { (dt, zt) } else { (d, c.nodes[i].z) };
        if candidate.0 < best.0 {
            best = candidate;
        }
    }
    Ok(LoewnerGap { gap: best.0, ratio: best.0 / (s * s), at: best.1 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// `W_n ≈ α log(n+1) + β`.
    pub slope: f64,
    pub intercept: f64,
    pub log_residuals: Vec<f64>,
    /// `W_n ≈ γ`.
    pub constant: f64,
    pub constant_residuals: Vec<f64>,
}

/// Least-squares fits of a Widom-factor series against `log(n+1)` and a
/// constant.
pub fn growth_fit(series: &[(usize, f64)]) -> Result<GrowthFit> {
    if series.len() < 5 {
        return Err(Error::InvalidArgument(format!("growth fit needs 5 degrees, got {}", series.len())));
    }
    let nmin = series.iter().map(|p| p.0).min().unwrap() as f64;
    let nmax = series.iter().map(|p| p.0).max().unwrap() as f64;
    if nmax < 4.0 * nmin {
        return Err(Error::InvalidArgument(format!("degrees span {nmin}..{nmax}, need a factor of 4")));
    }
    let x: Vec<f64> = series.iter().map(|p| (p.0 as f64 + 1.0).ln()).collect();
    let y: Vec<f64> = series.iter().map(|p| p.1).collect();
    let k = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / k, y.iter().sum::<f64>() / k);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Ok(GrowthFit {
        slope,
        intercept,
        log_residuals: x.iter().zip(&y).map(|(a, b)| b - slope * a - intercept).collect(),
        constant: my,
        constant_residuals: y.iter().map(|b| b - my).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Boundary samples per component for sup norms (raised to `16 n`).
    pub norm_samples: usize,
    pub zgrid: usize,
    pub trace: TraceOptions,
    pub lawson: LawsonConfig,
    pub lawson_max_degree: usize,
    pub area: bool,
    /// Known `s₀`; estimated once when absent.
    pub s0: Option<f64>,
    pub phase: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            norm_samples: 512,
            zgrid: 48,
            trace: TraceOptions::default(),
            lawson: LawsonConfig { samples: 512, ..LawsonConfig::default() },
            lawson_max_degree: MAX_DEGREE,
            area: true,
            s0: None,
            phase: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub n: usize,
    pub capacity: f64,
    pub totik_log_norm: Option<f64>,
    pub lawson_log_norm: Option<f64>,
    pub w_totik: Option<f64>,
    pub w_lawson: Option<f64>,
    pub i_line: Option<f64>,
    pub i_area: Option<f64>,
    pub millis: u128,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub geometry: String,
    pub c: f64,
    pub s0: f64,
    pub rows: Vec<ExperimentRow>,
    /// Smallest `C` with `W_n^{Totik} ≤ C · I_line(c/n)` over the sweep.
    pub line_constant: Option<f64>,
    /// `max / min` of `W_n^{Totik} / I_line(c/n)`.
    pub line_ratio_band: Option<f64>,
    pub totik_fit: Option<GrowthFit>,
    pub lawson_fit: Option<GrowthFit>,
}

/// Degree sweep: Totik and Lawson Widom factors with the line and area
/// integrals at `s = c/n`. Row failures are recorded and the sweep goes on.
pub fn run_experiment(
    geometry: &str,
    model: &ChargeModel,
    degrees: &[usize],
    c: f64,
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    let mut degrees = degrees.to_vec();
    degrees.sort_unstable();
    degrees.dedup();
    let s0 = match config.s0 {
        Some(v) => v,
        None => estimate_s0(model, &config.trace)?,
    };
    let cap = model.capacity();
    let rows: Vec<ExperimentRow> = degrees
        .par_iter()
        .map(|&n| {
            let start = Instant::now();
            let mut row = ExperimentRow {
                n,
                capacity: cap,
                totik_log_norm: None,
                lawson_log_norm: None,
                w_totik: None,
                w_lawson: None,
                i_line: None,
                i_area: None,
                millis: 0,
                error: None,
            };
            let mut errors = Vec::new();
            let opts = TotikOptions { s0: Some(s0), trace: config.trace, phase: config.phase };
            match totik_polynomial(model, n, c, &opts)
                .and_then(|t| sup_norm(&t.polynomial, &model.set, config.norm_samples.max(16 * n), 1e-10))
            {
                Ok(norm) => {
                    row.totik_log_norm = Some(norm.log_value);
                    row.w_totik = Some(log_widom_factor(&norm, n, cap).exp());
                }
                Err(e) => errors.push(format!("totik: {e}")),
            }
            if n <= config.lawson_max_degree {
                let lc = LawsonConfig { samples: config.lawson.samples.max(16 * n), ..config.lawson };
                match lawson_chebyshev(&model.set, n, &lc) {
                    Ok(r) => {
                        row.lawson_log_norm = Some(r.refined.log_value);
                        row.w_lawson = Some(log_widom_factor(&r.refined, n, cap).exp());
                    }
                    Err(e) => errors.push(format!("lawson: {e}")),
                }
            }
            let s = c / n as f64;
            match line_integral_bound(model, s, config.zgrid, &config.trace) {
                Ok(v) => row.i_line = Some(v.value),
                Err(e) => errors.push(format!("line integral: {e}")),
            }
            if config.area {
                match area_integral_bound(model, s, config.zgrid, &config.trace) {
                    Ok(v) => row.i_area = Some(v.value),
                    Err(e) => errors.push(format!("area integral: {e}")),
                }
            }
            if !errors.is_empty() {
                row.error = Some(errors.join("; "));
            }
            row.millis = start.elapsed().as_millis();
            row
        })
        .collect();

    let ratios: Vec<f64> = rows.iter().filter_map(|r| Some(r.w_totik? / r.i_line?)).collect();
    let (line_constant, line_ratio_band) = if ratios.is_empty() {
        (None, None)
    } else {
        let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        (Some(max), Some(max / min))
    };
    let fit = |get: fn(&ExperimentRow) -> Option<f64>| -> Option<GrowthFit> {
        let series: Vec<(usize, f64)> = rows.iter().filter_map(|r| Some((r.n, get(r)?))).collect();
        growth_fit(&series).ok()
    };
    Ok(ExperimentReport {
        geometry: geometry.to_string(),
        c,
        s0,
        totik_fit: fit(|r| r.w_totik),
        lawson_fit: fit(|r| r.w_lawson),
        rows,
        line_constant,
        line_ratio_band,
    })
}

/// `I_line(s)` at `s = s₀/2, s₀/4, …` (`count` halvings).
pub fn line_integral_profile(model: &ChargeModel, s0: f64, count: usize, zgrid: usize) -> Result<Vec<(f64, f64)>> {
    (1..=count)
        .map(|k| {
            let s = s0 / 2f64.powi(k as i32);
            let step = TraceOptions::default().max_dtheta;
            line_integral_bound(model, s, zgrid, &TraceOptions::with_step(step)).map(|v| (s, v.value))
        })
        .collect()
}

/// `2π R / (R + 1)` with `R = e^s`: the line integral on the unit disk.
pub fn disk_line_integral(s: f64) -> f64 {
    let r = s.exp();
    TAU * r / (r + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CompactSet, ComponentShape};
    use crate::potential::{solve_equilibrium, EquilibriumConfig};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn model_of(shapes: Vec<ComponentShape>, panels: usize) -> ChargeModel {
        solve_equilibrium(&CompactSet::new(shapes).unwrap(), &EquilibriumConfig::with_panels(panels)).unwrap()
    }

    fn disk() -> ChargeModel {
        model_of(vec![ComponentShape::disk(c(0.0, 0.0), 1.0).unwrap()], 64)
    }

    fn interval() -> ChargeModel {
        model_of(vec![ComponentShape::segment(c(-1.0, 0.0), c(1.0, 0.0)).unwrap()], 256)
    }

    #[test]
    fn disk_line_integral_closed_form() {
        let m = disk();
        let v = line_integral_bound(&m, 0.01, 16, &TraceOptions::default()).unwrap();
        assert_abs_diff_eq!(disk_line_integral(0.01), 3.157, epsilon = 1e-3);
        assert!((v.value / disk_line_integral(0.01) - 1.0).abs() < 1e-2, "{}", v.value);
        assert_abs_diff_eq!(disk_line_integral(1e-9), PI, epsilon = 1e-8);
    }

    #[test]
    fn interval_line_integral_bounded() {
        let m = interval();
        let vals: Vec<f64> = [0.2, 0.1, 0.05, 0.025]
            .iter()
            .map(|&s| line_integral_bound(&m, s, 32, &TraceOptions::default()).unwrap().value)
            .collect();
        let max = vals.iter().cloned().fold(0.0, f64::max);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min < 4.0, "{vals:?}");
    }

    #[test]
    fn disk_area_integral_matches_annulus() {
        // ∫ over e^s ≤ |ζ| ≤ e^{2s} of |ζ − 1|⁻² = π log((e^{4s} − 1)/(e^{2s} − 1)).
        let m = disk();
        let s: f64 = 0.1;
        let exact = PI * (((4.0 * s).exp() - 1.0) / ((2.0 * s).exp() - 1.0)).ln();
        let v = area_integral_bound(&m, s, 16, &TraceOptions::default()).unwrap();
        assert!((v.value / exact - 1.0).abs() < 1e-3, "{} vs {exact}", v.value);
        let grid = area_integral_grid(&m, s, c(1.0, 0.0), 0.004, 8).unwrap();
        assert!((grid / exact - 1.0).abs() < 2e-2, "{grid} vs {exact}");
    }

    #[test]
    fn area_integral_decays_far_away() {
        let m = disk();
        let s = 0.1;
        let levels = area_levels(&m, s, &TraceOptions::default()).unwrap();
        let prepared = prepare_levels(&m.set, &levels);
        let z = c(1e3, 0.0);
        let area = PI * ((0.4f64).exp() - (0.2f64).exp());
        assert!((area_integral_at(&m.set, &prepared, z) * z.norm_sqr() / area - 1.0).abs() < 1e-2);
    }

    #[test]
    fn loewner_gaps() {
        let m = interval();
        for s in [0.2, 0.1, 0.05] {
            let g = loewner_gap(&m, s, &TraceOptions::default()).unwrap();
            // x − 1 ≈ g²/2 near the tip, so an error δ in g moves the gap by s·δ.
            assert!((g.gap / (f64::cosh(s) - 1.0) - 1.0).abs() < 2e-2, "{s}: {}", g.gap);
            assert!(g.ratio >= 0.45 && g.ratio <= 0.55);
        }
        let d = loewner_gap(&disk(), 0.1, &TraceOptions::default()).unwrap();
        assert_abs_diff_eq!(d.gap, 0.1f64.exp() - 1.0, epsilon = 1e-6);
    }

    #[test]
    fn growth_fit_examples() {
        let flat: Vec<(usize, f64)> = [8, 12, 16, 24, 32].iter().map(|&n| (n, 2.0)).collect();
        let f = growth_fit(&flat).unwrap();
        assert_abs_diff_eq!(f.slope, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.constant, 2.0, epsilon = 1e-12);
        let log: Vec<(usize, f64)> = [8, 12, 16, 24, 32].iter().map(|&n| (n, 3.0 * (n as f64 + 1.0).ln())).collect();
        assert_abs_diff_eq!(growth_fit(&log).unwrap().slope, 3.0, epsilon = 1e-8);
        assert!(growth_fit(&flat[..4]).is_err());
        assert!(growth_fit(&[(8, 1.0), (9, 1.0), (10, 1.0), (11, 1.0), (12, 1.0)]).is_err());
    }

    #[test]
    fn disk_sweep() {
        let m = disk();
        let cfg = ExperimentConfig { area: false, zgrid: 16, ..ExperimentConfig::default() };
        let r = run_experiment("disk", &m, &[8, 16, 32, 64], 1.0, &cfg).unwrap();
        assert_eq!(r.rows.len(), 4);
        for row in &r.rows {
            assert!(row.error.is_none(), "{:?}", row.error);
            assert_abs_diff_eq!(row.w_lawson.unwrap(), 1.0, epsilon = 1e-4);
            assert!(row.w_totik.unwrap() >= 1.0 - 1e-6);
        }
        assert!(r.line_ratio_band.unwrap() < 10.0);
    }
}
