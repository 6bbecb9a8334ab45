//! Invariant suite run on the bundled fixtures: minimality sandwich,
//! isometry equivariance, scaling covariance, equal-mass cross-validation
//! and allocation bounds.

use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::fixtures;
use crate::geometry::CompactSet;
use crate::minimax::{lawson_chebyshev, LawsonConfig};
use crate::partition::{allocate_degrees, flux_masses};
use crate::polynomials::{log_widom_factor, sup_norm, totik_polynomial, TotikOptions};
use crate::potential::{estimate_s0, solve_equilibrium, ChargeModel, EquilibriumConfig, TraceOptions};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub millis: u128,
}

#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub seed: u64,
    pub degrees: Vec<usize>,
    pub c: f64,
    pub panels: usize,
    /// Sup-norm samples per component (raised to `16 n`).
    pub samples: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { seed: 42, degrees: vec![8, 16], c: 1.0, panels: 256, samples: 512 }
    }
}

struct Fixture {
    name: &'static str,
    model: ChargeModel,
    s0: f64,
}

fn load_fixtures(cfg: &CheckConfig) -> Result<Vec<Fixture>> {
    fixtures::NAMES
        .iter()
        .map(|&name| {
            let set = fixtures::load(name).expect("bundled fixture")?;
            let model = solve_equilibrium(&set, &EquilibriumConfig::with_panels(cfg.panels))?;
            let s0 = estimate_s0(&model, &TraceOptions::default())?;
            Ok(Fixture { name, model, s0 })
        })
        .collect()
}

fn timed(name: &str, f: impl FnOnce() -> std::result::Result<String, String>) -> CheckOutcome {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    CheckOutcome { name: name.to_string(), passed, detail, millis: start.elapsed().as_millis() }
}

/// `(log ‖P_n‖, log W_n, roots)` of the Totik polynomial.
fn totik_summary(model: &ChargeModel, s0: f64, n: usize, c: f64, samples: usize) -> Result<(f64, f64, Vec<C64>)> {
    let t = totik_polynomial(model, n, c, &TotikOptions { s0: Some(s0), ..TotikOptions::default() })?;
    let norm = sup_norm(&t.polynomial, &model.set, samples.max(16 * n), 1e-10)?;
    Ok((norm.log_value, log_widom_factor(&norm, n, model.capacity()), t.polynomial.roots))
}

/// `κⁿ ≤ ‖T_n‖ ≤ ‖P_n‖` in the log domain, with slack for the capacity
/// error (`n · 1e-4` relative) and the norm estimators.
pub fn minimality_sandwich(cfg: &CheckConfig) -> CheckOutcome {
    timed("minimality sandwich", || {
        let fx = load_fixtures(cfg).map_err(|e| e.to_string())?;
        let mut lines = Vec::new();
        for f in &fx {
            for &n in &cfg.degrees {
                let (log_totik, _, _) =
                    totik_summary(&f.model, f.s0, n, cfg.c, cfg.samples).map_err(|e| format!("{}: {e}", f.name))?;
                let lc = LawsonConfig { samples: cfg.samples.max(16 * n), tol: 1e-3, max_iters: 5000, cluster: true };
                let lawson = lawson_chebyshev(&f.model.set, n, &lc).map_err(|e| format!("{}: {e}", f.name))?;
                let log_lawson = lawson.refined.log_value;
                let log_cap_n = n as f64 * f.model.capacity().ln();
                let slack = 1e-4 * n as f64;
                if log_cap_n > log_lawson + slack || log_lawson > log_totik + 1e-6 {
                    return Err(format!(
                        "{} n={n}: log κⁿ = {log_cap_n:.6}, log ‖T‖ = {log_lawson:.6}, log ‖P‖ = {log_totik:.6}",
                        f.name
                    ));
                }
                lines.push(format!("{} n={n}: {:.4} ≤ {:.4} ≤ {:.4}", f.name, 1.0, (log_lawson - log_cap_n).exp(), (log_totik - log_cap_n).exp()));
            }
        }
        Ok(lines.join("; "))
    })
}

fn transformed_model(model: &ChargeModel, a: C64, b: C64, panels: usize) -> Result<ChargeModel> {
    let set: CompactSet = model.set.transformed(a, b)?;
    solve_equilibrium(&set, &EquilibriumConfig::with_panels(panels))
}

/// Roots follow `z ↦ a z + b` (`|a| = 1`) and norms and Widom factors stay
/// put, within `1e-8`.
pub fn isometry_equivariance(cfg: &CheckConfig) -> CheckOutcome {
    timed("isometry equivariance", || {
        let fx = load_fixtures(cfg).map_err(|e| e.to_string())?;
        let (a, b) = (C64::from_polar(1.0, 0.7), C64::new(0.3, -1.1));
        let mut worst: f64 = 0.0;
        for f in fx.iter().filter(|f| matches!(f.name, "spiral" | "two_disks" | "two_intervals_a05")) {
            let moved = transformed_model(&f.model, a, b, cfg.panels).map_err(|e| e.to_string())?;
            for &n in &cfg.degrees {
                let (l0, w0, r0) = totik_summary(&f.model, f.s0, n, cfg.c, cfg.samples).map_err(|e| e.to_string())?;
                let (l1, w1, r1) = totik_summary(&moved, f.s0, n, cfg.c, cfg.samples).map_err(|e| e.to_string())?;
                let scale = f.model.set.diam;
                let root_err = r0.iter().zip(&r1).map(|(p, q)| (a * p + b - q).norm() / scale).fold(0.0, f64::max);
                let err = root_err.max((l0 - l1).abs()).max((w0 - w1).abs());
                worst = worst.max(err);
                if err > 1e-8 {
                    return Err(format!("{} n={n}: roots {root_err:.2e}, log norm {:.2e}, log W {:.2e}", f.name, (l0 - l1).abs(), (w0 - w1).abs()));
                }
            }
        }
        Ok(format!("largest deviation {worst:.2e}"))
    })
}

/// Scaling by `λ` multiplies `‖P_n‖` by `λⁿ` and leaves `W_n` unchanged.
pub fn scaling_covariance(cfg: &CheckConfig) -> CheckOutcome {
    timed("scaling covariance", || {
        let fx = load_fixtures(cfg).map_err(|e| e.to_string())?;
        let lambda: f64 = 2.5;
        let mut worst: f64 = 0.0;
        for f in fx.iter().filter(|f| matches!(f.name, "interval" | "two_disks" | "spiral")) {
            let scaled = transformed_model(&f.model, C64::new(lambda, 0.0), C64::new(0.0, 0.0), cfg.panels)
                .map_err(|e| e.to_string())?;
            for &n in &cfg.degrees {
                let (l0, w0, _) = totik_summary(&f.model, f.s0, n, cfg.c, cfg.samples).map_err(|e| e.to_string())?;
                let (l1, w1, _) = totik_summary(&scaled, f.s0, n, cfg.c, cfg.samples).map_err(|e| e.to_string())?;
                let err = (l1 - l0 - n as f64 * lambda.ln()).abs().max((w1 - w0).abs());
                worst = worst.max(err);
                if err > 1e-8 {
                    return Err(format!("{} n={n}: deviation {err:.2e}", f.name));
                }
            }
        }
        Ok(format!("largest log deviation {worst:.2e}"))
    })
}

/// Arc masses from `(1/2π) ∫ |∇g| ds` agree with `ω_j / n_j` within `1e-4`.
pub fn equal_mass_cross_validation(cfg: &CheckConfig) -> CheckOutcome {
    timed("equal-mass partition cross-validation", || {
        let fx = load_fixtures(cfg).map_err(|e| e.to_string())?;
        let mut worst: f64 = 0.0;
        for f in &fx {
            let n = *cfg.degrees.iter().max().unwrap_or(&16);
            let t = totik_polynomial(&f.model, n, cfg.c, &TotikOptions { s0: Some(f.s0), ..TotikOptions::default() })
                .map_err(|e| format!("{}: {e}", f.name))?;
            for (curve, part) in t.curves.iter().zip(&t.partitions) {
                let want = f.model.masses[part.component] / part.arcs.len() as f64;
                for m in flux_masses(part, curve, &f.model) {
                    worst = worst.max((m - want).abs());
                }
                let total = (part.total_mass() - f.model.masses[part.component]).abs();
                if total > 1e-10 {
                    return Err(format!("{}: masses sum off by {total:.2e}", f.name));
                }
            }
            if worst > 1e-4 {
                return Err(format!("{}: flux mass deviation {worst:.2e}", f.name));
            }
        }
        Ok(format!("largest deviation {worst:.2e}"))
    })
}

/// Random mass vectors: `n_j = ⌊n ω_j⌋` for `j < m`, `0 ≤ n_m − n ω_m ≤ m − 1`.
pub fn allocation_bounds(cfg: &CheckConfig) -> CheckOutcome {
    timed("allocation bounds", || {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut accepted = 0;
        for _ in 0..2000 {
            let m = rng.gen_range(1..=6);
            let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.02..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let n = rng.gen_range(1..=512);
            let Ok(a) = allocate_degrees(&w, n) else { continue };
            accepted += 1;
            let excess = a.last_excess(&w);
            let floors_ok = w[..m - 1].iter().zip(&a.n_j).all(|(x, &d)| d == (n as f64 * x + 1e-9).floor() as usize);
            if a.n_j.iter().sum::<usize>() != n
                || a.n_j.contains(&0)
                || !floors_ok
                || excess < -1e-9
                || excess > (m - 1) as f64 + 1e-9
            {
                return Err(format!("ω = {w:?}, n = {n}: {:?}", a.n_j));
            }
        }
        Ok(format!("{accepted} allocations checked"))
    })
}

pub fn run_checks(cfg: &CheckConfig) -> Vec<CheckOutcome> {
    vec![
        minimality_sandwich(cfg),
        isometry_equivariance(cfg),
        scaling_covariance(cfg),
        equal_mass_cross_validation(cfg),
        allocation_bounds(cfg),
    ]
}
