//! Reference monic Chebyshev polynomials by Lawson iteration, plus closed
//! forms for an interval and a symmetric pair of intervals.
//!
//! Each iteration orthonormalizes `1, z, …, zⁿ` against the weighted sample
//! inner product (Arnoldi with the multiplication-by-`z` operator). The
//! weighted least-squares residual of `zⁿ` is then `L·qₙ` with
//! `L = ∏ h_{k+1,k}`, so no linear solve is needed, and `L` itself is the
//! weighted 2-norm, a lower bound for the minimax error.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CompactSet;
use crate::polynomials::{sup_on_boundary, NormEstimate};

pub const MAX_DEGREE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawsonConfig {
    /// Samples per component (at least `16 n`).
    pub samples: usize,
    pub max_iters: usize,
    /// Relative gap between the sampled max and the weighted 2-norm at
    /// which the iteration stops.
    pub tol: f64,
    /// Chebyshev-cluster samples on arcs.
    pub cluster: bool,
}

impl Default for LawsonConfig {
    fn default() -> Self {
        Self { samples: 1024, max_iters: 20_000, tol: 1e-4, cluster: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxResult {
    pub degree: usize,
    /// `c_0 … c_{n−1}` with `T_n = zⁿ + Σ c_k z^k`.
    pub coefficients: Vec<C64>,
    /// Max of `|T_n|` over the samples.
    pub norm: f64,
    /// Weighted 2-norm of the final iterate, a lower bound for `min ‖·‖`.
    pub lower_bound: f64,
    /// `‖T_n‖_K` refined between samples.
    pub refined: NormEstimate,
    pub iterations: usize,
    /// 5th percentile over max of `|residual|` on samples with non-negligible weight.
    pub flatness: f64,
    /// Stopped without reaching `tol`.
    pub stagnated: bool,
    /// Largest rebound of the sampled max between iterations (relative).
    pub max_rebound: f64,
    #[serde(skip)]
    basis: Option<ArnoldiBasis>,
}

/// Orthonormal polynomial basis `q_0 … q_n` represented by its Hessenberg
/// recurrence `z q_k = Σ_{i≤k+1} h_{ik} q_i`.
#[derive(Debug, Clone, PartialEq)]
struct ArnoldiBasis {
    h: Vec<Vec<C64>>,
    q0: f64,
    /// `∏ h_{k+1,k}`.
    lead: C64,
}

impl ArnoldiBasis {
    /// Values `q_0(z) … q_n(z)`.
    fn eval(&self, z: C64) -> Vec<C64> {
        let n = self.h.len();
        let mut q = Vec::with_capacity(n + 1);
        q.push(C64::new(self.q0, 0.0));
        for k in 0..n {
            let col = &self.h[k];
            let mut v = z * q[k];
            for (i, hik) in col.iter().take(k + 1).enumerate() {
                v -= hik * q[i];
            }
            q.push(v / col[k + 1]);
        }
        q
    }

    /// Monomial coefficients of `q_0 … q_n` (low order first).
    fn monomials(&self) -> Vec<Vec<C64>> {
        let n = self.h.len();
        let mut q: Vec<Vec<C64>> = vec![vec![C64::new(self.q0, 0.0)]];
        for k in 0..n {
            let col = &self.h[k];
            let mut v = vec![C64::new(0.0, 0.0); k + 2];
            for (d, c) in q[k].iter().enumerate() {
                v[d + 1] += c;
            }
            for (i, hik) in col.iter().take(k + 1).enumerate() {
                for (d, c) in q[i].iter().enumerate() {
                    v[d] -= hik * c;
                }
            }
            for c in v.iter_mut() {
                *c /= col[k + 1];
            }
            q.push(v);
        }
        q
    }
}

/// Weighted Arnoldi on the samples; returns the basis and `q_n` on samples.
fn arnoldi(z: &[C64], w: &[f64], n: usize) -> Result<(ArnoldiBasis, Vec<Vec<C64>>)> {
    let dot = |a: &[C64], b: &[C64]| -> C64 { a.iter().zip(b).zip(w).map(|((x, y), wi)| x.conj() * y * wi).sum() };
    let total: f64 = w.iter().sum();
    let q0 = 1.0 / total.sqrt();
    let mut qs = vec![vec![C64::new(q0, 0.0); z.len()]];
    let mut h = Vec::with_capacity(n);
    let mut lead = C64::new(1.0, 0.0);
    for k in 0..n {
        let mut v: Vec<C64> = z.iter().zip(&qs[k]).map(|(zi, qi)| zi * qi).collect();
        let mut col = vec![C64::new(0.0, 0.0); k + 2];
        // Classical Gram–Schmidt, applied twice.
        for _ in 0..2 {
            for (i, qi) in qs.iter().enumerate() {
                let c = dot(qi, &v);
                col[i] += c;
                for (vj, qj) in v.iter_mut().zip(qi) {
                    *vj -= c * qj;
                }
            }
        }
        let norm = dot(&v, &v).re.sqrt();
        if !(norm > 1e-300) {
            return Err(Error::DegenerateSamples(format!(
                "weighted samples span only degree {k} polynomials"
            )));
        }
        col[k + 1] = C64::new(norm, 0.0);
        lead *= norm;
        for vj in v.iter_mut() {
            *vj /= norm;
        }
        qs.push(v);
        h.push(col);
    }
    Ok((ArnoldiBasis { h, q0, lead }, qs))
}

fn boundary_points(set: &CompactSet, m: usize, cluster: bool) -> Vec<C64> {
    let mut pts = Vec::new();
    for c in &set.components {
        let mut ts = c.sample_params(m, cluster);
        ts.extend(c.vertex_params());
        if c.is_closed() {
            ts.retain(|t| *t < 1.0);
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        pts.extend(ts.into_iter().map(|t| c.point_at(t)));
    }
    pts
}

/// Approximate monic Chebyshev polynomial of degree `n` on `K`.
pub fn lawson_chebyshev(set: &CompactSet, n: usize, config: &LawsonConfig) -> Result<MinimaxResult> {
    if n == 0 || n > MAX_DEGREE {
        return Err(Error::InvalidArgument(format!("degree {n} outside 1..={MAX_DEGREE}")));
    }
    if config.samples < 16 * n {
        return Err(Error::InvalidArgument(format!(
            "{} samples per component is below 16·n = {}",
            config.samples,
            16 * n
        )));
    }
    let z = boundary_points(set, config.samples, config.cluster);
    if z.len() <= n {
        return Err(Error::DegenerateSamples(format!("{} samples for degree {n}", z.len())));
    }
    let m = z.len();
    let mut w = vec![1.0 / m as f64; m];
    let mut best: Option<(f64, f64, ArnoldiBasis, Vec<f64>)> = None;
    let mut prev_max = f64::INFINITY;
    let mut max_rebound: f64 = 0.0;
    let mut stagnated = true;
    let mut iterations = 0;
    let mut flat_count = 0;
    for it in 0..config.max_iters {
        iterations = it + 1;
        let (basis, qs) = arnoldi(&z, &w, n)?;
        let lead = basis.lead;
        let r: Vec<f64> = qs[n].iter().map(|q| (lead * q).norm()).collect();
        let upper = r.iter().cloned().fold(0.0, f64::max);
        let lower = lead.norm();
        if upper > prev_max {
            max_rebound = max_rebound.max(upper / prev_max - 1.0);
        }
        if best.as_ref().is_none_or(|b| upper < b.0) {
            best = Some((upper, lower, basis.clone(), w.clone()));
        } else if let Some(b) = best.as_mut() {
            b.1 = b.1.max(lower);
        }
        let gap = (upper - lower) / upper;
        if gap < config.tol {
            stagnated = false;
            break;
        }
        if (prev_max - upper).abs() < 1e-3 * config.tol * upper {
            flat_count += 1;
            if flat_count >= 50 {
                break;
            }
        } else {
            flat_count = 0;
        }
        prev_max = upper;
        let s: f64 = w.iter().zip(&r).map(|(wi, ri)| wi * ri).sum();
        if !(s > 0.0) {
            break;
        }
        for (wi, ri) in w.iter_mut().zip(&r) {
            *wi *= ri / s;
            if *wi < 1e-300 {
                *wi = 0.0;
            }
        }
    }
    let (upper, lower, basis, w) = best.expect("at least one iteration");
    let monomials = basis.monomials();
    let coefficients: Vec<C64> = monomials[n].iter().take(n).map(|c| c * basis.lead).collect();
    let residual = |p: C64| (basis.lead * basis.eval(p)[n]).norm();
    let r: Vec<f64> = z.iter().map(|p| residual(*p)).collect();
    let wmax = w.iter().cloned().fold(0.0, f64::max);
    let mut active: Vec<f64> = r.iter().zip(&w).filter(|(_, wi)| **wi >= 1e-3 * wmax).map(|(ri, _)| *ri).collect();
    active.sort_by(f64::total_cmp);
    let flatness = active[((active.len() - 1) as f64 * 0.05).round() as usize] / upper;
    let refined = sup_on_boundary(set, config.samples, 1e-12, |p| residual(p).ln());
    Ok(MinimaxResult {
        degree: n,
        coefficients,
        norm: upper,
        lower_bound: lower,
        refined,
        iterations,
        flatness,
        stagnated,
        max_rebound,
        basis: Some(basis),
    })
}

impl MinimaxResult {
    /// `T_n(z)` through the stored recurrence (stable off the samples).
    pub fn eval(&self, z: C64) -> C64 {
        match &self.basis {
            Some(b) => b.lead * b.eval(z)[self.degree],
            None => self.coefficients.iter().rev().fold(C64::new(1.0, 0.0), |acc, c| acc * z + c),
        }
    }

    /// Largest relative decrease of the sampled max over `trials` random
    /// perturbations of size `scale·norm` in the span of `q_0 … q_{n−1}`.
    /// A minimizer gives a value `≤ 0` up to sampling error.
    pub fn perturbation_certificate(&self, set: &CompactSet, samples: usize, trials: usize, scale: f64, seed: u64) -> f64 {
        let basis = self.basis.as_ref().expect("basis kept for fresh results");
        let z = boundary_points(set, samples, true);
        let vals: Vec<Vec<C64>> = z.iter().map(|p| basis.eval(*p)).collect();
        let base = vals.iter().map(|q| (basis.lead * q[self.degree]).norm()).fold(0.0, f64::max);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..trials {
            let mut d: Vec<C64> =
                (0..self.degree).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
            let norm = d.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            // The basis is orthonormal on the samples' mean, so coefficient
            // size matches the perturbation's RMS size.
            for c in d.iter_mut() {
                *c *= scale * self.norm / norm;
            }
            let perturbed = vals
                .iter()
                .map(|q| {
                    let extra: C64 = d.iter().zip(q).map(|(c, qk)| c * qk).sum();
                    (basis.lead * q[self.degree] + extra).norm()
                })
                .fold(0.0, f64::max);
            worst = worst.max((base - perturbed) / base);
        }
        worst
    }
}

/// `‖T_n‖` on `[−1, 1]`: `2^{1−n}`.
pub fn interval_oracle(n: usize) -> f64 {
    assert!(n >= 1, "degree must be positive");
    2f64.powi(1 - n as i32)
}

/// Capacity of `[−1, −a] ∪ [a, 1]` and `‖T_{2m}‖` there, from
/// `T_{2m}(z) = S_m(z²)` with `S_m` the monic Chebyshev polynomial of `[a², 1]`.
pub fn two_interval_even_oracle(a: f64, m: usize) -> (f64, f64) {
    assert!(a > 0.0 && a < 1.0 && m >= 1, "need 0 < a < 1 and m ≥ 1");
    let b = 1.0 - a * a;
    ((b.sqrt()) / 2.0, 2.0 * (b / 4.0).powi(m as i32))
}
