use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_widomlab"));
    c.env_remove("WIDOMLAB_WORKERS");
    c
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("widomlab-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_set(dir: &PathBuf, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn compute_prints_the_solution() {
    let dir = scratch("compute");
    let set = write_set(&dir, "interval.json", r#"{"type":"IntervalUnion","intervals":[[-1,1]]}"#);
    let o = bin().args(["compute", "--set"]).arg(&set).args(["--degree", "3"]).output().unwrap();
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["norm"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!((v["potential"]["capacity"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn bad_input_exits_with_two() {
    let dir = scratch("bad");
    let good = write_set(&dir, "interval.json", r#"{"type":"IntervalUnion","intervals":[[-1,1]]}"#);
    let overlap = write_set(&dir, "overlap.json", r#"{"type":"IntervalUnion","intervals":[[-1,1],[0.5,2]]}"#);
    let garbage = write_set(&dir, "garbage.json", "not json");
    let o = bin().args(["compute", "--set"]).arg(&good).args(["--degree", "0"]).output().unwrap();
    assert_eq!(code(&o), 2);
    for p in [&overlap, &garbage] {
        let o = bin().args(["compute", "--set"]).arg(p).args(["--degree", "2"]).output().unwrap();
        assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let o = bin().args(["sweep", "--set"]).arg(&good).args(["--degrees", "5..2"]).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn sweep_writes_one_row_per_degree() {
    let dir = scratch("sweep");
    let set = write_set(&dir, "arc.json", r#"{"type":"CircularArc","half_angle":1.5707963267948966}"#);
    let o = bin().args(["sweep", "--set"]).arg(&set).args(["--degrees", "1..6"]).output().unwrap();
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "n,norm,widom_factor");
    assert_eq!(rows.len(), 7);
    let w: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!((w[0] - 2f64.sqrt()).abs() < 1e-8);
    assert!(w.windows(2).all(|p| p[1] >= p[0] - 1e-7));
}

#[test]
fn verify_reports_are_independent_of_worker_count() {
    let dir = scratch("verify");
    let set = write_set(&dir, "two.json", r#"{"type":"IntervalUnion","intervals":[[-2,-1],[0.5,2]]}"#);
    let mut reports = Vec::new();
    for workers in ["1", "4"] {
        let out = dir.join(format!("w{workers}"));
        let o = bin()
            .env("WIDOMLAB_WORKERS", workers)
            .args(["verify", "--suite", "bounds", "--degrees", "1..12", "--random", "3", "--seed", "7", "--set"])
            .arg(&set)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        reports.push((std::fs::read(out.join("report.json")).unwrap(), std::fs::read(out.join("report.csv")).unwrap()));
    }
    assert_eq!(reports[0], reports[1]);
    let csv = String::from_utf8(reports[0].1.clone()).unwrap();
    assert!(csv.starts_with("set_id,n,norm,capacity,widom_factor,check,margin,pass"));

    // the report subcommand reads what verify wrote
    let o = bin().arg("report").arg(dir.join("w1/report.json")).output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(!o.stdout.is_empty());
}

#[test]
fn zeros_of_the_lemniscate_polynomial() {
    let dir = scratch("zeros");
    let set = write_set(&dir, "lem.json", r#"{"type":"Lemniscate","coeffs":[-1,0,1],"level":1}"#);
    let svg = dir.join("z.svg");
    let o = bin().args(["zeros", "--set"]).arg(&set).args(["--degree", "4", "--svg"]).arg(&svg).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let zs: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',').map(|s| s.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    // (z² - 1)²
    assert_eq!(zs.len(), 4);
    for (re, im) in zs {
        assert!((re.abs() - 1.0).abs() < 1e-6 && im.abs() < 1e-6);
    }
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}
