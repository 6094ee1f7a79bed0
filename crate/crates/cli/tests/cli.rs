use std::path::Path;
use std::process::{Command, Output};

fn logcorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logcorr"))
        .args(args)
        .env_remove("LOGCORR_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn cov_prints_two_log_two() {
    let o = logcorr(&["cov", "--f", "indicator:0,1", "--g", "indicator:0,1", "--H", "0.5", "--space", "half-line"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("1.386294"), "{}", stdout(&o));
}

#[test]
fn kernel_request_and_range_check() {
    let o = logcorr(&["kernel", "--space", "half-line", "--H", "0.5", "--x", "1", "--y", "3"]);
    assert!(o.status.success());
    // ln((1 + 3)/2)
    assert!(stdout(&o).contains(&format!("{:?}", 2f64.ln())), "{}", stdout(&o));

    let o = logcorr(&["kernel", "--space", "half-line", "--H", "0.7", "--x", "1", "--y", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("(0, 1/2]"), "{}", stderr(&o));
    assert!(stderr(&o).contains("'H'"));
}

#[test]
fn flag_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# truncated field\nreps = 1000\ntimes = 1, 2\neps = 0.01\nseed = 4\n").unwrap();
    let out = dir.path().join("r.json");
    let o = logcorr(&["simulate", "field", "--config", cfg.to_str().unwrap(), "--reps", "5000", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(v["plan"]["replicates"], 5000);
    assert_eq!(v["plan"]["seed"], 4);

    let o = logcorr(&["simulate", "field", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(v["plan"]["replicates"], 1000);
}

#[test]
fn bad_configs_are_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "reps = 10\nwidth = 3\n").unwrap();
    let o = logcorr(&["cov", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("'width'"), "{}", stderr(&o));

    let o = logcorr(&["cov", "--H", "0.5", "--f", "indicator:1,0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("'f'"), "{}", stderr(&o));

    let o = logcorr(&["nonsense"]);
    assert_eq!(o.status.code(), Some(1));

    let missing = dir.path().join("nope.cfg");
    let o = logcorr(&["cov", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope.cfg"));
}

#[test]
fn output_does_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut seen = Vec::new();
    for threads in ["1", "3"] {
        let csv = dir.path().join(format!("g{threads}.csv"));
        let json = dir.path().join(format!("g{threads}.json"));
        let o = logcorr(&[
            "simulate", "gfun", "--H", "0.5", "--f", "indicator:0,1;exp:1", "--reps", "200", "--bins", "60", "--seed", "9",
            "--threads", threads, "--csv", csv.to_str().unwrap(), "--out", json.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let clt = dir.path().join(format!("c{threads}.json"));
        let o = logcorr(&["clt", "--n", "128", "--m", "2048", "--reps", "300", "--threads", threads, "--out", clt.to_str().unwrap()]);
        assert!(o.status.success());
        let v = dir.path().join(format!("v{threads}.json"));
        let o = logcorr(&["verify", "truncated-field", "exact-moment", "--threads", threads, "--out", v.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stdout(&o));
        seen.push((read(&csv), read(&json), read(&clt), read(&v)));
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn threads_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_logcorr"))
        .args(["cov", "--H", "0.5", "--f", "exp:1"])
        .env("LOGCORR_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("threads"));
    let o = Command::new(env!("CARGO_BIN_EXE_logcorr"))
        .args(["cov", "--H", "0.5", "--f", "exp:1"])
        .env("LOGCORR_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
}

#[test]
fn csv_values_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let o = logcorr(&["simulate", "subord", "--H", "0.25", "--K", "0.5", "--times", "1,2", "--reps", "50", "--bins", "40", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = read(&csv);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t=1,t=2"));
    let mut count = 0;
    for line in lines {
        for field in line.split(',') {
            let v: f64 = field.parse().unwrap();
            assert_eq!(format!("{v:?}"), field);
            count += 1;
        }
    }
    assert_eq!(count, 100);
}

#[test]
fn clt_regime_warning() {
    let o = logcorr(&["clt", "--n", "64", "--m", "128", "--reps", "100"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("below 10"), "{}", stderr(&o));
    assert!(stdout(&o).contains("regime warning"));
}

#[test]
fn verify_frullani_reports_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let o = logcorr(&["verify", "frullani", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));
    let v: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    let c = &v["criteria"][0];
    assert_eq!(c["name"], "frullani");
    assert!(c["checks"][0]["value"].as_f64().unwrap() <= 1e-10);

    let o = logcorr(&["verify", "no-such-criterion"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn export_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    let o = logcorr(&["export", "--what", "bifbm", "--H", "0.25", "--K", "0.5", "--points", "0.5;1;2", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = read(&csv);
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(rows[i][j], rows[j][i]);
        }
    }
}
