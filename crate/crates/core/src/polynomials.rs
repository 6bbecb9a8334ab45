//! Totik-type monic polynomials in root form, log-domain evaluation and
//! sup-norm search on the boundary of `K`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CompactSet;
use crate::partition::{allocate_degrees, partition_with_phase, DegreeAllocation, Partition};
use crate::potential::{estimate_s0, trace_level_curve, ChargeModel, LevelCurve, TraceOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub c: f64,
    pub s: f64,
    pub allocation: DegreeAllocation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonicPolynomial {
    pub roots: Vec<C64>,
    /// `(j, k)` of each root: component and arc index.
    pub labels: Vec<(usize, usize)>,
    pub provenance: Option<Provenance>,
}

impl MonicPolynomial {
    pub fn from_roots(roots: Vec<C64>) -> Self {
        let labels = (0..roots.len()).map(|k| (0, k)).collect();
        Self { roots, labels, provenance: None }
    }

    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    /// `log|P(z)|`, summed from the nearest root outward; `−∞` at a root.
    pub fn log_eval(&self, z: C64) -> f64 {
        let mut terms: Vec<f64> = self.roots.iter().map(|r| (z - r).norm()).collect();
        if terms.contains(&0.0) {
            return f64::NEG_INFINITY;
        }
        terms.sort_by(f64::total_cmp);
        terms.iter().map(|t| t.ln()).sum()
    }

    /// Direct product `∏ (z − ζ_k)`; overflows for large degree.
    pub fn eval(&self, z: C64) -> C64 {
        self.roots.iter().fold(C64::new(1.0, 0.0), |acc, r| acc * (z - r))
    }

    /// Roots mapped by `z ↦ a·z + b`.
    pub fn transformed(&self, a: C64, b: C64) -> Self {
        Self { roots: self.roots.iter().map(|r| a * r + b).collect(), ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    /// Refined estimate of `log ‖·‖_K`.
    pub log_value: f64,
    /// Largest `log|·|` among the coarse samples, a certified lower bound.
    pub log_certified_lower: f64,
    pub argmax: C64,
    pub refinement_depth: usize,
    /// All golden-section searches reached the parameter tolerance.
    pub converged: bool,
}

impl NormEstimate {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }

    pub fn certified_lower(&self) -> f64 {
        self.log_certified_lower.exp()
    }

    pub fn log10(&self) -> f64 {
        self.log_value / std::f64::consts::LN_10
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const CANDIDATES: usize = 5;

/// Maximizes `f` (a log-modulus) over `∂K`: `m` samples per component plus
/// polyline vertices, then golden-section search in the boundary parameter
/// around the best local maxima until the bracket is narrower than `tol`.
pub fn sup_on_boundary<F>(set: &CompactSet, m: usize, tol: f64, f: F) -> NormEstimate
where
    F: Fn(C64) -> f64 + Sync,
{
    struct Sample {
        comp: usize,
        idx: usize,
        value: f64,
    }
    let params: Vec<Vec<f64>> = set
        .components
        .iter()
        .map(|c| {
            let mut t = c.sample_params(m, false);
            t.extend(c.vertex_params());
            t.retain(|x| c.is_closed() && *x < 1.0 || !c.is_closed());
            t.sort_by(f64::total_cmp);
            t.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
            t
        })
        .collect();
    let values: Vec<Vec<f64>> = set
        .components
        .iter()
        .zip(&params)
        .map(|(c, ts)| ts.par_iter().map(|&t| f(c.point_at(t))).collect())
        .collect();

    let mut samples = Vec::new();
    for (j, vs) in values.iter().enumerate() {
        let closed = set.components[j].is_closed();
        let n = vs.len();
        for i in 0..n {
            let left = if i > 0 { Some(vs[i - 1]) } else if closed { Some(vs[n - 1]) } else { None };
            let right = if i + 1 < n { Some(vs[i + 1]) } else if closed { Some(vs[0]) } else { None };
            let local = left.is_none_or(|l| vs[i] >= l) && right.is_none_or(|r| vs[i] >= r);
            if local {
                samples.push(Sample { comp: j, idx: i, value: vs[i] });
            }
        }
    }
    samples.sort_by(|a, b| b.value.total_cmp(&a.value));
    samples.truncate(CANDIDATES);

    let (mut best_val, mut best_z) = (f64::NEG_INFINITY, C64::new(0.0, 0.0));
    for (j, vs) in values.iter().enumerate() {
        for (i, v) in vs.iter().enumerate() {
            if *v > best_val {
                best_val = *v;
                best_z = set.components[j].point_at(params[j][i]);
            }
        }
    }
    let coarse = best_val;
    let mut depth = 0;
    let mut converged = true;

    let refined: Vec<_> = samples
        .par_iter()
        .map(|smp| {
            let shape = &set.components[smp.comp];
            let ts = &params[smp.comp];
            let n = ts.len();
            let (lo, hi) = if shape.is_closed() {
                let lo = if smp.idx > 0 { ts[smp.idx - 1] } else { ts[n - 1] - 1.0 };
                let hi = if smp.idx + 1 < n { ts[smp.idx + 1] } else { ts[0] + 1.0 };
                (lo, hi)
            } else {
                (ts[smp.idx.saturating_sub(1)], ts[(smp.idx + 1).min(n - 1)])
            };
            let g = |t: f64| f(shape.point_at(if shape.is_closed() { t.rem_euclid(1.0) } else { t }));
            golden_max(g, lo, hi, tol, 200)
        })
        .collect();
    for (smp, r) in samples.iter().zip(refined) {
        let shape = &set.components[smp.comp];
        depth = depth.max(r.iterations);
        converged &= r.converged;
        if r.best_value > best_val {
            best_val = r.best_value;
            best_z = shape.point_at(if shape.is_closed() { r.best_t.rem_euclid(1.0) } else { r.best_t });
        }
    }
    NormEstimate { log_value: best_val, log_certified_lower: coarse, argmax: best_z, refinement_depth: depth, converged }
}

struct GoldenResult {
    best_t: f64,
    best_value: f64,
    iterations: usize,
    converged: bool,
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> GoldenResult {
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut iterations = 0;
    while b - a > tol && iterations < max_iter {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2);
        }
        iterations += 1;
    }
    let (best_t, best_value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    GoldenResult { best_t, best_value, iterations, converged: b - a <= tol }
}

/// `‖P‖_K` estimated on `∂K` with `m ≥ 16 n` samples per component.
pub fn sup_norm(p: &MonicPolynomial, set: &CompactSet, m: usize, tol: f64) -> Result<NormEstimate> {
    if m < 16 * p.degree() {
        return Err(Error::InvalidArgument(format!(
            "{m} samples per component is below 16·n = {}",
            16 * p.degree()
        )));
    }
    Ok(sup_on_boundary(set, m, tol, |z| p.log_eval(z)))
}

/// `‖P‖_K / κ(K)^n`, formed in the log domain.
pub fn widom_factor(norm: &NormEstimate, degree: usize, capacity: f64) -> f64 {
    log_widom_factor(norm, degree, capacity).exp()
}

pub fn log_widom_factor(norm: &NormEstimate, degree: usize, capacity: f64) -> f64 {
    norm.log_value - degree as f64 * capacity.ln()
}

/// `Σ_j Σ_k (diam(I_k^j) / d(z, I_k^j))²`.
pub fn sigma3(partitions: &[Partition], z: C64) -> f64 {
    partitions
        .iter()
        .flat_map(|p| p.arcs.iter())
        .map(|arc| (arc.diam / arc.distance(z)).powi(2))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotikOptions {
    /// Known `s₀`; estimated from the model when absent.
    pub s0: Option<f64>,
    pub trace: TraceOptions,
    /// Rotation of every split relative to its trace start.
    pub phase: f64,
}

impl Default for TotikOptions {
    fn default() -> Self {
        Self { s0: None, trace: TraceOptions::default(), phase: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct TotikConstruction {
    pub polynomial: MonicPolynomial,
    pub curves: Vec<LevelCurve>,
    pub partitions: Vec<Partition>,
    pub s0: f64,
}

/// Traces `K_{c/n}`, splits component `j` into `n_j` equal-measure arcs and
/// takes the arc centroids as roots.
pub fn totik_polynomial(model: &ChargeModel, n: usize, c: f64, opts: &TotikOptions) -> Result<TotikConstruction> {
    if n == 0 || !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("need n ≥ 1 and c > 0 (n = {n}, c = {c})")));
    }
    let s = c / n as f64;
    let s0 = match opts.s0 {
        Some(v) => v,
        None => estimate_s0(model, &opts.trace)?,
    };
    if s >= 0.5 * s0 {
        return Err(Error::LevelTooLarge { s, half_s0: 0.5 * s0 });
    }
    model.check_resolution(s)?;
    let allocation = allocate_degrees(&model.masses, n)?;
    let pieces: Vec<Result<(LevelCurve, Partition)>> = allocation
        .n_j
        .par_iter()
        .enumerate()
        .map(|(j, &n_j)| {
            let step = opts.trace.max_dtheta.min(std::f64::consts::TAU / (16.0 * n_j as f64));
            let trace = TraceOptions { max_dtheta: step, ..opts.trace };
            let curve = trace_level_curve(model, j, s, &trace)?;
            let partition = partition_with_phase(&curve, n_j, &model.set, opts.phase)?;
            Ok((curve, partition))
        })
        .collect();
    let mut curves = Vec::new();
    let mut partitions = Vec::new();
    let mut roots = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for piece in pieces {
        let (curve, partition) = piece?;
        for (k, arc) in partition.arcs.iter().enumerate() {
            if model.set.distance(arc.centroid) == 0.0 {
                return Err(Error::InsideSet(format!("root {}", arc.centroid), 0.0));
            }
            roots.push(arc.centroid);
            labels.push((partition.component, k));
        }
        curves.push(curve);
        partitions.push(partition);
    }
    Ok(TotikConstruction {
        polynomial: MonicPolynomial { roots, labels, provenance: Some(Provenance { c, s, allocation }) },
        curves,
        partitions,
        s0,
    })
}
