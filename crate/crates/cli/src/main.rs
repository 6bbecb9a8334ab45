use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use widomlab::analysis::{run_experiment, ExperimentConfig};
use widomlab::check::{run_checks, CheckConfig};
use widomlab::export::{self, Figure};
use widomlab::fixtures;
use widomlab::geometry::CompactSet;
use widomlab::minimax::{lawson_chebyshev, LawsonConfig, MinimaxResult};
use widomlab::polynomials::{log_widom_factor, sup_norm, totik_polynomial, TotikOptions};
use widomlab::potential::{estimate_s0, solve_equilibrium, ChargeModel, EquilibriumConfig, TraceOptions};

/// Widom factors of Totik-type polynomials and discrete Chebyshev
/// polynomials on finite unions of curves.
#[derive(Parser)]
#[command(name = "widomlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity, component masses and residual of the equilibrium solve.
    Cap(GeometryArgs),
    /// Totik polynomials: roots, partitions and level curves per degree.
    Totik(RunArgs),
    /// Discrete Chebyshev polynomials by Lawson iteration.
    Minimax(RunArgs),
    /// Degree sweep report (CSV and JSON, optional SVG).
    Report(RunArgs),
    /// Invariant suite on the bundled fixtures.
    Check(CheckArgs),
}

#[derive(Args)]
struct GeometryArgs {
    /// Geometry JSON file or a bundled fixture name.
    #[arg(long)]
    geometry: String,
    /// Boundary panels for the equilibrium solve.
    #[arg(long, default_value_t = 256)]
    panels: usize,
    /// Cached model JSON: loaded when present, written otherwise.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    geo: GeometryArgs,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    degrees: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Boundary samples per component.
    #[arg(long, default_value_t = 2048)]
    samples: usize,
    /// Parameter bracket width for the sup-norm refinement.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    svg: bool,
    /// Rotation of the partition anchor, in radians of the conjugate function.
    #[arg(long, default_value_t = 0.0)]
    phase: f64,
    /// Skip the area integral in reports.
    #[arg(long)]
    no_area: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 256)]
    panels: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("WIDOMLAB_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("ignoring WIDOMLAB_THREADS={v:?}"),
        }
    }
    let result = match cli.command {
        Command::Cap(a) => cmd_cap(&a),
        Command::Totik(a) => cmd_totik(&a),
        Command::Minimax(a) => cmd_minimax(&a),
        Command::Report(a) => cmd_report(&a),
        Command::Check(a) => cmd_check(&a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_set(spec: &str) -> Result<(String, CompactSet)> {
    if let Some(set) = fixtures::load(spec) {
        return Ok((spec.to_string(), set?));
    }
    let path = Path::new(spec);
    let text = fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
    let set = CompactSet::from_json(&text).with_context(|| format!("parsing {spec}"))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| spec.to_string());
    Ok((name, set))
}

fn load_model(a: &GeometryArgs) -> Result<(String, ChargeModel)> {
    let (name, set) = load_set(&a.geometry)?;
    if let Some(path) = &a.model {
        if path.exists() {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let model = ChargeModel::from_json(&text)?;
            if model.set != set {
                bail!("cached model {} was solved for a different geometry", path.display());
            }
            return Ok((name, model));
        }
    }
    let model = solve_equilibrium(&set, &EquilibriumConfig::with_panels(a.panels))?;
    if let Some(path) = &a.model {
        fs::write(path, model.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok((name, model))
}

fn validate(a: &RunArgs) -> Result<()> {
    if a.degrees.is_empty() || a.degrees.contains(&0) {
        bail!("--degrees must list positive integers");
    }
    if a.degrees.windows(2).any(|w| w[0] >= w[1]) {
        bail!("--degrees must be strictly ascending");
    }
    if !(a.c > 0.0 && a.c.is_finite()) {
        bail!("--c must be positive");
    }
    if a.samples < 64 {
        bail!("--samples must be at least 64");
    }
    if !(a.tol > 0.0) {
        bail!("--tol must be positive");
    }
    Ok(())
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_cap(a: &GeometryArgs) -> Result<bool> {
    let (_, model) = load_model(a)?;
    let out = serde_json::json!({
        "capacity": model.capacity(),
        "masses": model.masses,
        "residual": model.validation_residual,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(true)
}

fn s0_for(model: &ChargeModel) -> Result<f64> {
    Ok(estimate_s0(model, &TraceOptions::default())?)
}

fn cmd_totik(a: &RunArgs) -> Result<bool> {
    validate(a)?;
    let (name, model) = load_model(&a.geo)?;
    let s0 = s0_for(&model)?;
    let opts = TotikOptions { s0: Some(s0), phase: a.phase, ..TotikOptions::default() };
    let rows: Vec<_> = a
        .degrees
        .par_iter()
        .map(|&n| {
            let t = totik_polynomial(&model, n, a.c, &opts)?;
            let norm = sup_norm(&t.polynomial, &model.set, a.samples.max(16 * n), a.tol)?;
            Ok::<_, widomlab::Error>((n, t, norm))
        })
        .collect();
    let mut ok = true;
    println!("n,norm_log10,widom");
    for (&n, row) in a.degrees.iter().zip(rows) {
        match row {
            Ok((_, t, norm)) => {
                let w = log_widom_factor(&norm, n, model.capacity()).exp();
                println!("{n},{},{w}", norm.log10());
                write(&a.out, &format!("roots_n{n}.csv"), &export::roots_csv(&t.polynomial))?;
                write(&a.out, &format!("partition_n{n}.csv"), &export::partition_csv(&t.partitions))?;
                write(&a.out, &format!("level_n{n}.csv"), &export::level_curves_csv(&t.curves))?;
                if a.svg {
                    let fig = Figure {
                        curves: &t.curves,
                        roots: &t.polynomial.roots,
                        argmax: Some(norm.argmax),
                        title: Some(format!("{name}  n = {n}  W = {w:.4}")),
                    };
                    write(&a.out, &format!("totik_n{n}.svg"), &export::svg(&model.set, &fig))?;
                }
            }
            Err(e) => {
                ok = false;
                eprintln!("n = {n}: {e}");
            }
        }
    }
    Ok(ok)
}

fn cmd_minimax(a: &RunArgs) -> Result<bool> {
    validate(a)?;
    let (_, model) = load_model(&a.geo)?;
    let rows: Vec<_> = a
        .degrees
        .par_iter()
        .map(|&n| {
            let config = LawsonConfig { samples: a.samples.max(16 * n), ..LawsonConfig::default() };
            lawson_chebyshev(&model.set, n, &config)
        })
        .collect();
    let mut ok = true;
    let mut done: Vec<MinimaxResult> = Vec::new();
    println!("n,norm_log10,widom,perturbation_max_decrease");
    for (&n, row) in a.degrees.iter().zip(rows) {
        match row {
            Ok(r) => {
                let w = log_widom_factor(&r.refined, n, model.capacity()).exp();
                let margin = r.perturbation_certificate(&model.set, a.samples.min(1024), 16, 1e-3, a.seed);
                println!("{n},{},{w},{margin}", r.refined.log10());
                write(&a.out, &format!("coefficients_n{n}.csv"), &export::coefficients_csv(&r))?;
                done.push(r);
            }
            Err(e) => {
                ok = false;
                eprintln!("n = {n}: {e}");
            }
        }
    }
    write(&a.out, "minimax.csv", &export::minimax_csv(&done, model.capacity()))?;
    Ok(ok)
}

fn cmd_report(a: &RunArgs) -> Result<bool> {
    validate(a)?;
    let (name, model) = load_model(&a.geo)?;
    let config = ExperimentConfig {
        norm_samples: a.samples,
        area: !a.no_area,
        phase: a.phase,
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&name, &model, &a.degrees, a.c, &config)?;
    write(&a.out, "report.csv", &export::report_csv(&report))?;
    write(&a.out, "report.json", &export::report_json(&report))?;
    let mut ok = true;
    for r in &report.rows {
        if let Some(e) = &r.error {
            ok = false;
            eprintln!("n = {}: {e}", r.n);
        }
    }
    if let Some(fit) = &report.totik_fit {
        println!("totik growth fit: slope {} vs log(n+1), constant {}", fit.slope, fit.constant);
    }
    if a.svg {
        let n = *a.degrees.last().unwrap();
        let opts = TotikOptions { s0: Some(report.s0), phase: a.phase, ..TotikOptions::default() };
        match totik_polynomial(&model, n, a.c, &opts) {
            Ok(t) => {
                let norm = sup_norm(&t.polynomial, &model.set, a.samples.max(16 * n), a.tol)?;
                let fig = Figure {
                    curves: &t.curves,
                    roots: &t.polynomial.roots,
                    argmax: Some(norm.argmax),
                    title: Some(format!("{name}  n = {n}  c = {}", a.c)),
                };
                write(&a.out, "report.svg", &export::svg(&model.set, &fig))?;
            }
            Err(e) => {
                ok = false;
                eprintln!("svg for n = {n}: {e}");
            }
        }
    }
    println!("wrote {}", a.out.join("report.csv").display());
    Ok(ok)
}

fn cmd_check(a: &CheckArgs) -> Result<bool> {
    let cfg = CheckConfig { seed: a.seed, panels: a.panels, ..CheckConfig::default() };
    let outcomes = run_checks(&cfg);
    for o in &outcomes {
        println!("{} {} ({} ms): {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.millis, o.detail);
    }
    Ok(outcomes.iter().all(|o| o.passed))
}
