use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn widomlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_widomlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn cap(geometry: &str) -> serde_json::Value {
    let o = widomlab(&["cap", "--geometry", geometry]);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

/// Parses `n,value,...` summary lines after the header.
fn summary(o: &Output) -> Vec<Vec<f64>> {
    stdout(o).lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

#[test]
fn cap_on_fixtures() {
    let disk = cap("disk");
    assert!((disk["capacity"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(disk["masses"].as_array().unwrap().len(), 1);
    assert!((cap("interval")["capacity"].as_f64().unwrap() - 0.5).abs() < 1e-4);
    let two = cap("two_intervals_a05");
    assert!((two["capacity"].as_f64().unwrap() - 0.75f64.sqrt() / 2.0).abs() < 1e-3);
    for m in two["masses"].as_array().unwrap() {
        assert!((m.as_f64().unwrap() - 0.5).abs() < 1e-6);
    }
}

#[test]
fn cap_from_file_and_cached_model() {
    let dir = tempfile::tempdir().unwrap();
    let geo = dir.path().join("seg.json");
    fs::write(&geo, r#"{"components":[{"kind":"segment","a":[0,0],"b":[4,0]}]}"#).unwrap();
    let model = dir.path().join("model.json");
    let args = ["cap", "--geometry", geo.to_str().unwrap(), "--model", model.to_str().unwrap()];
    let first = widomlab(&args);
    assert!(first.status.success(), "{}", stderr(&first));
    assert!(model.exists());
    let second = widomlab(&args);
    assert_eq!(stdout(&first), stdout(&second));
    let v: serde_json::Value = serde_json::from_str(&stdout(&first)).unwrap();
    assert!((v["capacity"].as_f64().unwrap() - 1.0).abs() < 1e-3);
}

#[test]
fn unknown_field_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let geo = dir.path().join("bad.json");
    fs::write(&geo, r#"{"components":[{"kind":"disk","center":[0,0],"radius":1,"colour":"red"}]}"#).unwrap();
    let o = widomlab(&["cap", "--geometry", geo.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("components[0]") && err.contains("colour"), "{err}");
}

#[test]
fn totik_disk_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = widomlab(&["totik", "--geometry", "disk", "--degrees", "8", "--out", out, "--svg"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = summary(&o);
    let rho = (1.0f64 / 8.0).exp() * (std::f64::consts::PI / 8.0).sin() / (std::f64::consts::PI / 8.0);
    assert!((rows[0][2] - (1.0 + rho.powi(8))).abs() < 1e-3, "{rows:?}");
    for f in ["roots_n8.csv", "partition_n8.csv", "level_n8.csv", "totik_n8.svg"] {
        assert!(Path::new(out).join(f).exists(), "{f}");
    }
    let roots = fs::read_to_string(dir.path().join("roots_n8.csv")).unwrap();
    assert_eq!(roots.lines().next(), Some("re,im,j,k"));
    assert_eq!(roots.lines().count(), 9);
    for line in roots.lines().skip(1) {
        let v: Vec<f64> = line.split(',').take(2).map(|x| x.parse().unwrap()).collect();
        assert!((v[0].hypot(v[1]) - rho).abs() < 1e-4);
    }
    let svg = fs::read_to_string(dir.path().join("totik_n8.svg")).unwrap();
    assert!(svg.contains("stroke=\"black\"") && svg.contains("stroke=\"blue\""));
    assert!(svg.contains("fill=\"red\"") && svg.contains("id=\"argmax\""));
}

#[test]
fn totik_guard_is_a_clean_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = widomlab(&["totik", "--geometry", "disk", "--degrees", "1,8", "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("reduce c or raise n"));
    // The admissible row still runs.
    assert_eq!(summary(&o).len(), 1);
}

#[test]
fn minimax_interval() {
    let dir = tempfile::tempdir().unwrap();
    let o = widomlab(&["minimax", "--geometry", "interval", "--degrees", "4", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = summary(&o);
    let norm = 10f64.powf(rows[0][1]);
    assert!((norm / 0.125 - 1.0).abs() < 0.01, "{norm}");
    let table = fs::read_to_string(dir.path().join("minimax.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("n,norm,widom,iterations,flatness"));
}

#[test]
fn rejects_bad_arguments() {
    for args in [
        vec!["totik", "--geometry", "disk", "--degrees", "16,8"],
        vec!["totik", "--geometry", "disk", "--c", "0"],
        vec!["minimax", "--geometry", "disk", "--samples", "32"],
        vec!["cap", "--geometry", "no_such_fixture"],
    ] {
        let o = widomlab(&args);
        assert!(!o.status.success(), "{args:?}");
    }
}

fn strip_ms(csv: &str) -> String {
    csv.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>().join("\n")
}

#[test]
fn report_schema_and_reruns() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let run = |dir: &Path| {
        let o = widomlab(&[
            "report", "--geometry", "disk", "--degrees", "8,16", "--samples", "256", "--no-area", "--svg", "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read_to_string(dir.join("report.csv")).unwrap()
    };
    let (ra, rb) = (run(a.path()), run(b.path()));
    assert_eq!(
        ra.lines().next(),
        Some("n,cap,totik_norm_log10,lawson_norm_log10,w_totik,w_lawson,i_line,i_area,ms")
    );
    assert_eq!(ra.lines().count(), 3);
    assert_eq!(strip_ms(&ra), strip_ms(&rb));
    assert!(a.path().join("report.json").exists() && a.path().join("report.svg").exists());
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn report_on_spiral_fits_growth() {
    let dir = tempfile::tempdir().unwrap();
    let o = widomlab(&[
        "report", "--geometry", "spiral", "--degrees", "8,12,16,24,32", "--samples", "256", "--no-area", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("growth fit: slope"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(json["totik_fit"]["slope"].is_number());
    assert_eq!(json["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn thread_cap_env() {
    let o = Command::new(env!("CARGO_BIN_EXE_widomlab"))
        .args(["cap", "--geometry", "disk"])
        .env("WIDOMLAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
}
