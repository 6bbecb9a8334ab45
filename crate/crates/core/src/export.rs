//! CSV, JSON and SVG writers. Floats use the shortest round-trip form, so
//! reruns produce identical files.

use std::fmt::Write;

use num_complex::Complex64 as C64;

use crate::analysis::ExperimentReport;
use crate::geometry::CompactSet;
use crate::minimax::MinimaxResult;
use crate::partition::Partition;
use crate::polynomials::MonicPolynomial;
use crate::potential::LevelCurve;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Columns `j,s,x,y,theta`.
pub fn level_curves_csv(curves: &[LevelCurve]) -> String {
    let mut out = String::from("j,s,x,y,theta\n");
    for c in curves {
        for node in &c.nodes {
            writeln!(out, "{},{},{},{},{}", c.component, c.level, node.z.re, node.z.im, node.theta).unwrap();
        }
    }
    out
}

/// One row per arc: angles, endpoint `ξ_k`, centroid `ζ_k`, mass, length,
/// diameter and distance to the set.
pub fn partition_csv(partitions: &[Partition]) -> String {
    let mut out = String::from(
        "j,k,theta_start,theta_end,xi_re,xi_im,zeta_re,zeta_im,mass,arclength,diam,dist\n",
    );
    for p in partitions {
        for (k, a) in p.arcs.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                p.component,
                k,
                a.theta_start,
                a.theta_end,
                a.endpoint.re,
                a.endpoint.im,
                a.centroid.re,
                a.centroid.im,
                a.mass,
                a.arclength,
                a.diam,
                a.dist_to_k
            )
            .unwrap();
        }
    }
    out
}

/// Columns `re,im,j,k`.
pub fn roots_csv(p: &MonicPolynomial) -> String {
    let mut out = String::from("re,im,j,k\n");
    for (z, (j, k)) in p.roots.iter().zip(&p.labels) {
        writeln!(out, "{},{},{},{}", z.re, z.im, j, k).unwrap();
    }
    out
}

/// Columns `n,norm,widom,iterations,flatness`; `norm` and `widom` are the
/// refined values.
pub fn minimax_csv(results: &[MinimaxResult], capacity: f64) -> String {
    let mut out = String::from("n,norm,widom,iterations,flatness\n");
    for r in results {
        let w = (r.refined.log_value - r.degree as f64 * capacity.ln()).exp();
        writeln!(out, "{},{},{},{},{}", r.degree, r.refined.value(), w, r.iterations, r.flatness).unwrap();
    }
    out
}

/// Monomial coefficients `c_0 … c_{n−1}` and the leading 1.
pub fn coefficients_csv(r: &MinimaxResult) -> String {
    let mut out = String::from("k,re,im\n");
    for (k, c) in r.coefficients.iter().enumerate() {
        writeln!(out, "{},{},{}", k, c.re, c.im).unwrap();
    }
    writeln!(out, "{},1,0", r.degree).unwrap();
    out
}

/// Columns `n,cap,totik_norm_log10,lawson_norm_log10,w_totik,w_lawson,i_line,i_area,ms`.
/// Failed quantities are left empty.
pub fn report_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("n,cap,totik_norm_log10,lawson_norm_log10,w_totik,w_lawson,i_line,i_area,ms\n");
    let log10 = |v: Option<f64>| v.map(|x| x / std::f64::consts::LN_10);
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.capacity,
            opt(log10(r.totik_log_norm)),
            opt(log10(r.lawson_log_norm)),
            opt(r.w_totik),
            opt(r.w_lawson),
            opt(r.i_line),
            opt(r.i_area),
            r.millis
        )
        .unwrap();
    }
    out
}

pub fn report_json(report: &ExperimentReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

/// Contents of an SVG overlay.
#[derive(Debug, Clone, Default)]
pub struct Figure<'a> {
    pub curves: &'a [LevelCurve],
    pub roots: &'a [C64],
    pub argmax: Option<C64>,
    pub title: Option<String>,
}

/// `K` in black, level curves in blue, roots in red and the norm argmax as
/// a star. The y axis points up.
pub fn svg(set: &CompactSet, fig: &Figure) -> String {
    const SIZE: f64 = 800.0;
    const MARGIN: f64 = 40.0;
    let mut outline: Vec<Vec<C64>> = set
        .components
        .iter()
        .map(|c| {
            let m = 400;
            let mut pts: Vec<C64> = c.sample_params(m, false).into_iter().map(|t| c.point_at(t)).collect();
            if c.is_closed() {
                pts.push(pts[0]);
            }
            pts
        })
        .collect();
    let curves: Vec<Vec<C64>> = fig.curves.iter().map(|c| c.nodes.iter().map(|n| n.z).collect()).collect();

    let all = outline.iter().chain(&curves).flatten().chain(fig.roots).chain(fig.argmax.as_ref());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in all {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let map = |z: C64| (MARGIN + (z.re - x0) * scale, SIZE - MARGIN - (z.im - y0) * scale);
    let path = |pts: &[C64]| {
        let mut d = String::new();
        for (i, z) in pts.iter().enumerate() {
            let (x, y) = map(*z);
            write!(d, "{}{:.3},{:.3}", if i == 0 { "M" } else { " L" }, x, y).unwrap();
        }
        d
    };

    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    )
    .unwrap();
    writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    if let Some(t) = &fig.title {
        let t = t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        writeln!(out, "<text x=\"{MARGIN}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">{t}</text>").unwrap();
    }
    writeln!(out, "<g id=\"set\" fill=\"none\" stroke=\"black\" stroke-width=\"2\">").unwrap();
    for pts in outline.drain(..) {
        writeln!(out, "<path d=\"{}\"/>", path(&pts)).unwrap();
    }
    writeln!(out, "</g>").unwrap();
    writeln!(out, "<g id=\"level\" fill=\"none\" stroke=\"blue\" stroke-width=\"1\">").unwrap();
    for pts in &curves {
        writeln!(out, "<path d=\"{}\"/>", path(pts)).unwrap();
    }
    writeln!(out, "</g>").unwrap();
    writeln!(out, "<g id=\"roots\" fill=\"red\">").unwrap();
    for z in fig.roots {
        let (x, y) = map(*z);
        writeln!(out, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"3\"/>").unwrap();
    }
    writeln!(out, "</g>").unwrap();
    if let Some(z) = fig.argmax {
        let (cx, cy) = map(z);
        let mut pts = String::new();
        for i in 0..10 {
            let r = if i % 2 == 0 { 9.0 } else { 3.8 };
            let a = std::f64::consts::PI * (i as f64 / 5.0 - 0.5);
            write!(pts, "{:.3},{:.3} ", cx + r * a.cos(), cy + r * a.sin()).unwrap();
        }
        writeln!(out, "<polygon id=\"argmax\" points=\"{}\" fill=\"gold\" stroke=\"black\"/>", pts.trim_end()).unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ExperimentRow;
    use crate::geometry::ComponentShape;

    #[test]
    fn report_columns_and_empty_failures() {
        let report = ExperimentReport {
            geometry: "disk".into(),
            c: 1.0,
            s0: 1.0,
            rows: vec![ExperimentRow {
                n: 8,
                capacity: 1.0,
                totik_log_norm: Some(std::f64::consts::LN_10),
                lawson_log_norm: None,
                w_totik: Some(3.2),
                w_lawson: None,
                i_line: Some(3.0),
                i_area: None,
                millis: 5,
                error: Some("x".into()),
            }],
            line_constant: None,
            line_ratio_band: None,
            totik_fit: None,
            lawson_fit: None,
        };
        let csv = report_csv(&report);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,cap,totik_norm_log10,lawson_norm_log10,w_totik,w_lawson,i_line,i_area,ms");
        assert_eq!(lines[1], "8,1,1,,3.2,,3,,5");
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn svg_has_layers() {
        let set = CompactSet::new(vec![ComponentShape::disk(C64::new(0.0, 0.0), 1.0).unwrap()]).unwrap();
        let roots = [C64::new(0.5, 0.0)];
        let s = svg(&set, &Figure { roots: &roots, argmax: Some(C64::new(1.0, 0.0)), ..Figure::default() });
        assert!(s.starts_with("<svg"));
        assert!(s.contains("stroke=\"black\"") && s.contains("stroke=\"blue\""));
        assert!(s.contains("fill=\"red\"") && s.contains("id=\"argmax\""));
    }
}
