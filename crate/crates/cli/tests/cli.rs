use std::io::Write;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gravmodes"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
    stdout(&out)
}

fn table(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn spectrum_table() {
    let text = ok(&["spectrum"]);
    assert!(!text.contains('\r'));
    let (header, rows) = table(&text);
    assert_eq!(
        header,
        ["n", "lambda", "frequency", "phase_speed", "zero_count", "residual_norm", "oracle_value", "oracle_rel_err"]
    );
    assert_eq!(rows.len(), 6);
    let lam = column(&header, "lambda");
    assert!(rows.windows(2).all(|w| w[1][lam] < w[0][lam]));
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0] as usize, i + 1);
        assert_eq!(r[4] as usize, i);
        assert!((r[2] - r[lam].sqrt()).abs() <= 1e-15);
        assert!(r[7] <= 1e-6);
    }
}

#[test]
fn reruns_and_worker_counts_match() {
    for cmd in [
        vec!["spectrum"],
        vec!["spectrum", "--format", "json"],
        vec!["mode", "--n", "3", "--samples", "64"],
        vec!["surface", "--kind", "2", "--eps", "0.02", "--nx", "9", "--nt", "5"],
    ] {
        let a = ok(&cmd);
        let b = ok(&cmd);
        assert_eq!(a, b, "{cmd:?}");
        for workers in ["1", "3"] {
            let mut args = cmd.clone();
            args.extend(["--workers", workers]);
            assert_eq!(ok(&args), a, "{args:?}");
        }
    }
}

#[test]
fn bad_gamma_is_a_config_error() {
    let out = run(&["spectrum", "--gamma", "2.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gamma"), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
}

#[test]
fn mode_profile() {
    let text = ok(&["mode", "--n", "1", "--samples", "512"]);
    let (header, rows) = table(&text);
    assert_eq!(header, ["z", "zeta", "upsilon", "w", "u", "deltaP"]);
    assert_eq!(rows.len(), 512);
    let last = rows.last().unwrap();
    assert_eq!(last[0], 1.0);
    assert!((last[3] - 1.0).abs() <= 1e-9);

    // Central differences of w against u = w'/l with l = 1.
    let scale = rows.iter().map(|r| r[4].abs()).fold(0.0, f64::max);
    for i in 1..rows.len() - 1 {
        let dz = rows[i + 1][0] - rows[i - 1][0];
        let fd = (rows[i + 1][3] - rows[i - 1][3]) / dz;
        assert!((fd - rows[i][4]).abs() <= 1e-4 * scale, "row {i}");
    }
}

#[test]
fn mode_u_scales_with_wavenumber() {
    let (header, rows) = table(&ok(&["mode", "--n", "2", "--l", "2", "--samples", "200"]));
    let (w, u) = (column(&header, "w"), column(&header, "u"));
    let scale = rows.iter().map(|r| r[u].abs()).fold(0.0, f64::max);
    for i in 1..rows.len() - 1 {
        let fd = (rows[i + 1][w] - rows[i - 1][w]) / (rows[i + 1][0] - rows[i - 1][0]);
        assert!((fd / 2.0 - rows[i][u]).abs() <= 1e-3 * scale, "row {i}");
    }
}

#[test]
fn mode_json_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mode.json");
    let out = run(&["mode", "--n", "2", "--samples", "8", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["n"], 2);
    assert_eq!(v["zero_count"], 1);
    assert_eq!(v["samples"].as_array().unwrap().len(), 8);
    let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    assert_eq!(keys.first().map(String::as_str), Some("config"));
    assert!(text.contains("\"lambda\": 1.58242168162147"));
}

#[test]
fn flat_surface_at_zero_amplitude() {
    let (header, rows) = table(&ok(&["surface", "--kind", "1", "--eps", "0", "--nx", "5", "--nt", "4"]));
    assert_eq!(header, ["t", "x", "z_exact", "z_first_order"]);
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r[2] == 1.0 && r[3] == 1.0));
    // t-major ordering
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0] || (w[0][0] == w[1][0] && w[0][1] < w[1][1])));
}

#[test]
fn travelling_surface_repeats_after_one_period() {
    let (_, rows) = table(&ok(&["surface", "--kind", "2", "--eps", "0.03", "--n", "2", "--nt", "2", "--nx", "33"]));
    let (first, second) = rows.split_at(33);
    let spread = first.iter().map(|r| (r[2] - 1.0).abs()).fold(0.0, f64::max);
    assert!(spread > 1e-3);
    for (a, b) in first.iter().zip(second) {
        assert_eq!(a[1], b[1]);
        assert!((a[2] - b[2]).abs() <= 1e-12);
        assert!((a[3] - b[3]).abs() <= 1e-12);
    }
}

#[test]
fn surface_needs_a_kind() {
    let out = run(&["surface", "--eps", "0.01"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("kind"));
}

#[test]
fn validate_default_passes() {
    let text = ok(&["validate"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["passed"], true);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() > 20);
    for c in checks {
        for key in ["check_name", "status", "measured", "tolerance"] {
            assert!(c.get(key).is_some(), "{c}");
        }
    }
}

#[test]
fn injected_kappa_misuse_is_caught() {
    let out = run(&["validate", "--inject-kappa-misuse"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let failed: Vec<_> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "fail")
        .map(|c| c["check_name"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(failed, ["mode_normalization"]);
}

fn config_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn malformed_config_file() {
    for text in ["gamma 1.5\n", "colour = red\n", "nmax = six\n", "l = 1\nl = 2\n"] {
        let f = config_file(text);
        let out = run(&["validate", "--config", f.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{text:?}");
    }
    let out = run(&["spectrum", "--config", "/nonexistent/gravmodes.cfg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_the_file() {
    let f = config_file("# three modes\nnmax = 3\nl = 2\n");
    let path = f.path().to_str().unwrap();
    let (_, rows) = table(&ok(&["spectrum", "--config", path]));
    assert_eq!(rows.len(), 3);
    let (_, rows) = table(&ok(&["spectrum", "--config", path, "--nmax", "2"]));
    assert_eq!(rows.len(), 2);
    let (_, direct) = table(&ok(&["spectrum", "--l", "2", "--nmax", "2"]));
    assert_eq!(rows, direct);
}

#[test]
fn argument_errors() {
    assert_eq!(run(&["mode", "--n", "7"]).status.code(), Some(2));
    assert_eq!(run(&["mode", "--samples", "1"]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--workers", "0"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let out = run(&["surface", "--kind", "1", "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn perturbed_profile_runs() {
    let (_, rows) = table(&ok(&["spectrum", "--gamma", "1.4", "--lambda-series", "0.3,-0.2", "--nmax", "4"]));
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[7] <= 1e-6));
}
