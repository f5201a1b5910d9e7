use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn courant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_courant"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn spectrum_listing() {
    let v = json(&courant(&["spectrum", "--p1", "1/4", "--p2", "1", "--qmax", "10"]));
    assert_eq!(v["tool"], "courant");
    assert_eq!(v["command"], "spectrum");
    assert_eq!(v["config"]["command"]["spectrum"]["qmax"], "10");
    let entries = v["result"]["entries"].as_array().unwrap();
    let modes: usize = entries.iter().map(|e| e["modes"].as_array().unwrap().len()).sum();
    assert_eq!(modes, 12);
    let last = entries.last().unwrap();
    assert_eq!(last["q"], "10/1");
    assert_eq!(last["modes"].as_array().unwrap().len(), 2);

    let v = json(&courant(&["spectrum", "--p1", "1", "--p2", "1", "--qmax", "2"]));
    assert_eq!(v["result"]["entries"].as_array().unwrap().len(), 1);

    let out = courant(&["spectrum", "--p1", "one", "--p2", "1", "--qmax", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let out = courant(&["spectrum", "--p1", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_fixture_banners() {
    let out = courant(&["check", "--fixture", "sec61-halves", "--lambda", "5"]);
    let v = json(&out);
    assert_eq!(v["result"]["banner"], "EQUALITY");
    assert_eq!((v["result"]["lhs"].as_u64(), v["result"]["rhs"].as_u64()), (Some(6), Some(6)));

    let v = json(&courant(&["check", "--fixture", "sec61-halves", "--lambda", "3"]));
    assert_eq!(v["result"]["variant"], "off_spectrum");
    assert_eq!(v["result"]["holds"], true);

    let out = courant(&["check", "--domain", "/no/such/file.json", "--lambda", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = courant(&["check", "--fixture", "pi-square", "--lambda", "5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_files_and_violation_exit() {
    let dir = tempfile::tempdir().unwrap();
    let path = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let square = courant(&["spectrum", "--p1", "1", "--p2", "1", "--qmax", "12", "--output", &path("square.json")]);
    assert!(square.status.success());
    let envelope: Value = serde_json::from_str(&fs::read_to_string(path("square.json")).unwrap()).unwrap();
    fs::write(path("sq.json"), envelope["result"].to_string()).unwrap();

    // the square cannot hold two disjoint copies of itself
    let out = courant(&["check", "--domain", &path("sq.json"), "--sub", &path("sq.json"), "--sub", &path("sq.json"), "--lambda", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["banner"], "VIOLATION");

    // numeric spectra: the long rectangle and its halves in floating point
    fs::write(path("big.json"), r#"{"values": [1.25, 2, 3.25, 4.25, 5, 5, 6.25, 7.25], "cluster_tol": 1e-9}"#).unwrap();
    fs::write(path("half.json"), r#"{"values": [2, 5, 5, 8], "cluster_tol": 1e-9}"#).unwrap();
    let v = json(&courant(&["check", "--domain", &path("big.json"), "--sub", &path("half.json"), "--sub", &path("half.json"), "--lambda", "5"]));
    assert_eq!(v["result"]["banner"], "EQUALITY");

    let out = courant(&["check", "--domain", &path("big.json"), "--sub", &path("sq.json"), "--lambda", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mixed"));
}

#[test]
fn config_file_and_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# long rectangle\np1 = 1/4\np2 = 1\nqmax = 10\nformat = csv\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let out = courant(&["spectrum", "--config", cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# courant "));
    assert!(text.trim_end().ends_with("11,10/1,2,(2 3) (6 1)"));

    let out = courant(&["spectrum", "--config", cfg, "--qmax", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.trim_end().ends_with("2,2/1,1,(2 1)"), "{text}");

    fs::write(dir.path().join("bad.cfg"), "qmax\n").unwrap();
    let out = courant(&["spectrum", "--config", dir.path().join("bad.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solve_matches_oracle_and_repeats_exactly() {
    let args = ["solve", "--fixture", "pi-square", "--h", "64", "--k", "6"];
    let first = courant(&args);
    let v = json(&first);
    let values = v["result"]["values"].as_array().unwrap();
    let oracle = v["result"]["oracle"].as_array().unwrap();
    assert_eq!(values.len(), 6);
    for (a, b) in values.iter().zip(oracle) {
        let (a, b) = (a.as_f64().unwrap(), b.as_f64().unwrap());
        assert!((a - b).abs() <= 1e-8 * b, "{a} vs {b}");
    }
    assert_eq!(first.stdout, courant(&args).stdout);
}

#[test]
fn nodal_three_strips() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().to_str().unwrap();
    let v = json(&courant(&["nodal", "--fixture", "sec62", "--k", "4", "--image", img]));
    let r = &v["result"];
    assert_eq!(r["mu"], 3);
    assert_eq!(r["audit"][0]["n_mid"], 4);
    assert_eq!(r["audit"][0]["sharp"], false);
    let a = 2.5f64.sqrt();
    let h = r["h"].as_f64().unwrap();
    let xs: Vec<f64> = r["mid_row_nodal_abscissas"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for target in [a / 3.0, 2.0 * a / 3.0] {
        assert!(xs.iter().any(|x| (x - target).abs() <= 2.0 * h), "{xs:?}");
    }
    let pgm = fs::read(dir.path().join("sec62-nodal4.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5"));
}

#[test]
fn lattice_and_scan() {
    let v = json(&courant(&["sharp-scan", "--lmax", "100"]));
    let eq: Vec<&str> = v["result"]["equalities"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert!(eq.contains(&"5/1") && eq.contains(&"10/1"), "{eq:?}");

    let out = courant(&["lattice", "--lambda", "5,10", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], courant::lattice::DEFICIT_CSV_HEADER);
    assert_eq!(lines.len(), 3);
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(courant(&["--help"]).status.code(), Some(0));
    assert_eq!(courant(&["--version"]).status.code(), Some(0));
    assert_eq!(courant(&["frobnicate"]).status.code(), Some(1));
}
