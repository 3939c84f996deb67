use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn archsnap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_archsnap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

/// Parses the CSV on stdout (after the schema comment) into header and rows.
fn csv_rows(out: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let text = String::from_utf8(out.to_vec()).unwrap();
    let mut lines = text.lines();
    let first = lines.next().unwrap();
    assert!(
        first.starts_with("# archsnap "),
        "missing schema line: {first}"
    );
    assert!(first.ends_with("schema v1"));
    let body: String = lines.collect::<Vec<_>>().join("\n");
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = r
        .records()
        .map(|x| x.unwrap().iter().map(str::to_owned).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: '{s}'"))
}

/// Fold of the one-mode force, proportional to `(a - A) + 3 Q^2 (a^2 - A^2) A`
/// with `delta = 2 (a - A)`, by bisection on its slope.
fn one_mode_fold(q: f64, a: f64) -> f64 {
    let slope = |w: f64| -1.0 + 3.0 * q * q * (a * a - 3.0 * w * w);
    let (mut lo, mut hi) = (0.0, a);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(lo) * slope(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    2.0 * (a - 0.5 * (lo + hi))
}

#[test]
fn critical_one_mode_fold() {
    let out = archsnap(&["critical", "--q", "6", "--weights", "1"]);
    assert!(out.status.success());
    let (h, rows) = csv_rows(&out.stdout);
    assert_eq!(rows.len(), 1);
    let dc = num(&rows[0][col(&h, "delta_c")]);
    let expected = 2.0 - 2.0 * (1.0f64 / 3.0 - 1.0 / 324.0).sqrt();
    assert!((dc - expected).abs() < 1e-9, "{dc} vs {expected}");
    assert!((dc - 0.850658).abs() < 1e-6);
    assert!((dc - one_mode_fold(6.0, 1.0)).abs() < 1e-6);
    assert_eq!(rows[0][col(&h, "bistable")], "true");
    assert!(num(&rows[0][col(&h, "eigenvalue_ratio")]) < 1e-6);
}

#[test]
fn critical_not_bistable_has_own_exit_code() {
    let out = archsnap(&["critical", "--q", "1", "--weights", "0.1"]);
    assert_eq!(out.status.code(), Some(3));
    let (h, rows) = csv_rows(&out.stdout);
    assert_eq!(rows[0][col(&h, "bistable")], "false");
    assert!(String::from_utf8_lossy(&out.stderr).contains("not bistable"));
}

#[test]
fn idle_mode_matches_one_mode() {
    let one = archsnap(&["critical", "--weights", "1"]);
    let two = archsnap(&["critical", "--weights", "1,0", "--modes", "1,2"]);
    let (h1, r1) = csv_rows(&one.stdout);
    let (h2, r2) = csv_rows(&two.stdout);
    for name in ["delta_c", "f_c", "curvature"] {
        let a = num(&r1[0][col(&h1, name)]);
        let b = num(&r2[0][col(&h2, name)]);
        assert!((a - b).abs() <= 1e-9 * a.abs(), "{name}: {a} vs {b}");
    }
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(
        dir.path(),
        "empty.toml",
        "[compare]\nregimes = [\"static-damped\"]\nepsilon = []\n",
    );
    let out = archsnap(&["compare", "--config", &empty]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());

    let unknown = write(dir.path(), "unknown.toml", "[arch]\nqq = 3.0\n");
    assert_eq!(
        archsnap(&["critical", "--config", &unknown]).status.code(),
        Some(2)
    );

    let axis = write(
        dir.path(),
        "axis.toml",
        "[sweep]\naxes = [{ name = \"a3\", values = [0.1] }]\n",
    );
    assert_eq!(
        archsnap(&["sweep", "--config", &axis]).status.code(),
        Some(2)
    );

    let bad = write(
        dir.path(),
        "bad.toml",
        "[sweep]\naxes = [{ name = \"nu\", values = [1.0, inf] }]\n",
    );
    assert_eq!(
        archsnap(&["sweep", "--config", &bad]).status.code(),
        Some(2)
    );

    assert_eq!(
        archsnap(&["critical", "--weights", "1,0.3", "--modes", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        archsnap(&["predict", "--weights", "1", "--modes", "8"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        archsnap(&["compare", "--workers", "0"]).status.code(),
        Some(2)
    );
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[arch]\nq = 1.0\na = [0.1]\n");
    assert_eq!(
        archsnap(&["critical", "--config", &cfg]).status.code(),
        Some(3)
    );
    let out = archsnap(&["critical", "--config", &cfg, "--q", "6", "--weights", "1"]);
    assert!(out.status.success());
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        r#"
[arch]
q = 6.0
a = [1.0, 0.0]
modes = [1, 5]
[load]
nu = 1000.0
[dynamics]
model = "overdamped"
[sweep]
regime = "ramp-damped"
axes = [{ name = "a5", start = 0.0, stop = 1.0, steps = 6 }, { name = "q", values = [5.0, 6.0] }]
"#,
    );
    let one = dir.path().join("one.csv");
    let eight = dir.path().join("eight.csv");
    for (w, p) in [("1", &one), ("8", &eight)] {
        let out = archsnap(&[
            "sweep",
            "--config",
            &cfg,
            "--workers",
            w,
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let a = std::fs::read(&one).unwrap();
    let b = std::fs::read(&eight).unwrap();
    assert_eq!(a, b);
    let (h, rows) = csv_rows(&a);
    assert_eq!(rows.len(), 12);
    // first axis outermost, and failing cells kept with a status
    assert_eq!(rows[0][col(&h, "a5")], "0.0");
    assert_eq!(rows[1][col(&h, "q")], "6.0");
    let status = col(&h, "status");
    assert!(rows.iter().any(|r| r[status] == "ok"));
    assert!(rows.iter().any(|r| r[status] == "not-bistable"));
}

#[test]
fn json_output() {
    let out = archsnap(&["predict", "--nu", "1000", "--format", "json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], "archsnap-predict-v1");
    let row = &v["rows"][0];
    assert_eq!(row["regime"], "ramp-damped");
    let fsw = row["f_switch"].as_f64().unwrap();
    let fc = row["f_c"].as_f64().unwrap();
    assert!(fsw > fc);
}

#[test]
fn compare_reports_errors_and_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "[compare]\nregimes = [\"static-damped\"]\nq = [4.0, 8.0]\nepsilon = [1e-3, 1e-2, 1e-1]\n",
    );
    let out = archsnap(&[
        "compare",
        "--config",
        &cfg,
        "--format",
        "json",
        "--workers",
        "3",
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert_eq!(r["status"], "ok");
        let (tn, ta) = (
            r["tau_numeric"].as_f64().unwrap(),
            r["tau_analytic"].as_f64().unwrap(),
        );
        let e = r["rel_error"].as_f64().unwrap();
        assert!((e - (tn - ta).abs() / tn).abs() < 1e-15);
        assert!(e < 0.01);
    }
    let summary = v["summary"].as_array().unwrap();
    assert_eq!(summary.len(), 2);
    for s in summary {
        assert!((s["slope_numeric"].as_f64().unwrap() + 0.5).abs() < 0.01);
    }
}

#[test]
fn per_row_failures_do_not_abort_compare() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "[dynamics]\nmax_time = 1.0\n[compare]\nepsilon = [1e-3, 1e2]\n",
    );
    let out = archsnap(&["compare", "--config", &cfg]);
    assert!(out.status.success());
    let (h, rows) = csv_rows(&out.stdout);
    let s = col(&h, "status");
    assert_eq!(rows[0][s], "integration-failed");
    assert_eq!(rows[1][s], "ok");
}

fn series(args: &[&str]) -> (Vec<String>, Vec<Vec<String>>) {
    let out = archsnap(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    csv_rows(&out.stdout)
}

#[test]
fn damped_slow_ramp_follows_static_curve_until_the_fold() {
    let (h, rows) = series(&["simulate", "--nu", "1", "--model", "overdamped"]);
    let (d, f, fs) = (col(&h, "delta"), col(&h, "force"), col(&h, "static_force"));
    let dc = 0.8506577296901556;
    let fc = 130896.64594934123;
    let first = rows
        .iter()
        .find(|r| r[fs].is_empty() || (num(&r[f]) - num(&r[fs])).abs() > 1e-4 * fc)
        .expect("run leaves the static curve");
    assert!(
        num(&first[d]) > 0.9 * dc,
        "departs at {}",
        num(&first[d]) / dc
    );
    assert!(rows.iter().filter(|r| num(&r[d]) < 0.9 * dc).count() > 100);
}

#[test]
fn undamped_ramp_oscillates_about_static_curve() {
    let (h, rows) = series(&["simulate", "--damping", "0", "--nu", "1000"]);
    let (d, f, fs) = (col(&h, "delta"), col(&h, "force"), col(&h, "static_force"));
    let dc = 0.8506577296901556;
    let signs: Vec<bool> = rows
        .iter()
        .skip(1)
        .take_while(|r| num(&r[d]) < dc)
        .filter(|r| !r[fs].is_empty())
        .map(|r| num(&r[fs]) > num(&r[f]))
        .collect();
    let crossings = signs.windows(2).filter(|w| w[0] != w[1]).count();
    assert!(crossings >= 3, "{crossings} crossings");
}

#[test]
fn damped_static_run_is_monotone() {
    let (h, rows) = series(&["simulate", "--epsilon", "0.01"]);
    let d = col(&h, "delta");
    let ds: Vec<f64> = rows.iter().map(|r| num(&r[d])).collect();
    assert!(ds.len() > 10);
    assert!(ds.windows(2).all(|w| w[1] >= w[0]));
    let total = col(&h, "total");
    assert!(rows.iter().all(|r| num(&r[total]).is_finite()));
}

#[test]
fn geometry_gives_dimensional_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "g.toml",
        r#"
[arch.geometry]
span = 0.1
thickness = 0.001
width = 0.01
youngs_modulus = 2.0e11
density = 7850.0
rise = 0.006
damping = 10.0
"#,
    );
    let out = archsnap(&["critical", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (h, rows) = csv_rows(&out.stdout);
    assert_eq!(num(&rows[0][col(&h, "q")]), 6.0);
    let fd = num(&rows[0][col(&h, "f_c_dimensional")]);
    assert!(fd.is_finite() && fd > 0.0);
    let dd = num(&rows[0][col(&h, "delta_c_dimensional")]);
    assert!((dd - 0.850658 * 0.006).abs() < 1e-5 * 0.006 * 10.0);
}
