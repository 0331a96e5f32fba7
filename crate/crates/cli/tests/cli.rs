use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::process::{Command, Output};

use revring::heis::HPoint;
use revring::profile::{catalog, CatalogName};
use revring::quad::{integrate, QuadOptions};
use revring::RevolutionRing;
use serde_json::Value;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revring"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn validate_catalog_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate", "--surface", "koranyi", "--R", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("result: pass"));
}

#[test]
fn validate_reports_witness_for_ascending_profile() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.prof");
    std::fs::write(&path, "# g rises near the top\nf = sin(s)\ng = cos(s) + 0.3*sin(2*s)\ndomain = (0, pi)\n").unwrap();
    let o = run(&["validate", "--profile", path.to_str().unwrap(), "--json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["all_pass"], false);
    assert_eq!(v["report"]["a2"]["pass"], false);
    assert!(v["report"]["a2"]["witness"].as_f64().is_some());
    assert_eq!(v["report"]["a1"]["pass"], true);
}

#[test]
fn missing_or_malformed_profile_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate", "--profile", "does-not-exist.prof"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let path = dir.path().join("broken.prof");
    std::fs::write(&path, "f = sin(s\ng = s\ndomain = (0, 1)\n").unwrap();
    let o = run(&["validate", "--profile", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["validate"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn modulus_json_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["modulus", "--surface", "koranyi", "--R", "1", "--a", "1", "--b", "2", "--json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let analytic = v["analytic"].as_f64().unwrap();
    assert!((analytic - PI * PI / 2f64.ln().powi(3)).abs() < 1e-12);
    assert!((analytic - 29.6362).abs() < 1e-4);
    assert!((v["numeric"].as_f64().unwrap() - analytic).abs() <= 1e-5 * analytic);
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    for k in ["surface", "a", "b", "analytic", "numeric", "rel_err", "admissibility", "oracle"] {
        assert!(keys.iter().any(|x| x.as_str() == k), "missing {k}");
    }
    assert_eq!(v["settings"]["seed"], 0);
    assert_eq!(v["settings"]["resolution"], 1024);
}

#[test]
fn modulus_admissibility_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["modulus", "--surface", "bubble", "--R", "1", "--a", "1", "--b", "2", "--curves", "500", "--seed", "7", "--oracle", "--json"];
    let o = run(&args, dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["admissibility"]["n"], 500);
    assert!(v["admissibility"]["min"].as_f64().unwrap() >= 0.999);
    assert!(v["oracle"]["max_dev_from_uniform"].as_f64().unwrap() <= 1e-6);
    assert_eq!(run(&args, dir.path()).stdout, o.stdout);
}

#[test]
fn modulus_default_curve_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["modulus", "--surface", "koranyi", "--a", "1", "--b", "3", "--curves", "--json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["admissibility"]["n"], 200);
}

#[test]
fn modulus_rejects_reversed_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["modulus", "--surface", "koranyi", "--a", "2", "--b", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn modulus_on_invalid_profile_is_a_math_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("up.prof");
    std::fs::write(&path, "f = sin(pi*s); g = s; domain = (0, 1)").unwrap();
    let o = run(&["modulus", "--profile", path.to_str().unwrap(), "--a", "1", "--b", "2"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn geometry_area_and_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let oracle = TAU * integrate(|u: f64| u.sin().sqrt(), 0.0, PI, &QuadOptions::rel(1e-13)).unwrap().value;
    let area = |r: &str| {
        let o = run(&["geometry", "--surface", "koranyi", "--R", r, "--json"], dir.path());
        assert_eq!(o.status.code(), Some(0));
        json(&o)["horizontal_area"].as_f64().unwrap()
    };
    let a1 = area("1");
    assert!((a1 - oracle).abs() < 1e-6);
    assert!((area("2") - 8.0 * a1).abs() <= 1e-10 * 8.0 * a1);
    let o = run(&["geometry", "--surface", "koranyi"], dir.path());
    assert!(stdout(&o).contains("15.05627"));
}

#[test]
fn geometry_writes_table_and_flow() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["geometry", "--surface", "cc", "--R", "1", "--flow", "0.5,0", "--csv", "table.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let flow = std::fs::read_to_string(dir.path().join("flow.csv")).unwrap();
    let mut lines = flow.lines();
    assert_eq!(lines.next().unwrap(), "tau,x,y,t,xi,beta,phi,residual");
    let mut n = 0;
    for l in lines {
        let r: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
        assert!(r <= 1e-8);
        n += 1;
    }
    assert_eq!(n, 1025);
    let table = std::fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert!(table.starts_with("s,f,g,nh_norm,hh,status"));
    assert_eq!(table.lines().count(), 257);
    let o = run(&["geometry", "--surface", "cc", "--flow", "9,0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

fn obj_vertices(path: &Path) -> Vec<HPoint> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter_map(|l| l.strip_prefix("v "))
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().map(|x| x.parse().unwrap()).collect();
            HPoint::from_xyt(v[0], v[1], v[2])
        })
        .collect()
}

#[test]
fn mesh_export() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["export-mesh", "--surface", "bubble", "--out", "s1.obj"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v1 = obj_vertices(&dir.path().join("s1.obj"));
    assert_eq!(v1.len(), 8192);
    let csv = std::fs::read_to_string(dir.path().join("s1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 8193);
    let ring = RevolutionRing::new(&catalog(CatalogName::BubbleSet, 1.0).unwrap(), 1.0, 2.0).unwrap();
    for p in &v1 {
        assert!((ring.ratio(*p).unwrap() - 1.0).abs() <= 1e-9);
    }
    let o = run(&["export-mesh", "--surface", "bubble", "--scale", "2", "--out", "s2.obj"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v2 = obj_vertices(&dir.path().join("s2.obj"));
    let extent = |v: &[HPoint]| {
        let z = v.iter().fold(0.0f64, |m, p| m.max(p.z.norm()));
        let t = v.iter().fold(0.0f64, |m, p| m.max(p.t.abs()));
        (z, t)
    };
    let ((z1, t1), (z2, t2)) = (extent(&v1), extent(&v2));
    assert!((z2 - 2.0 * z1).abs() < 1e-12 * z2);
    assert!((t2 - 4.0 * t1).abs() < 1e-12 * t2);
    for p in &v2 {
        assert!((ring.ratio(*p).unwrap() - 2.0).abs() <= 1e-9 * 2.0);
    }
}

#[test]
fn mesh_to_unwritable_path_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["export-mesh", "--surface", "koranyi", "--out", "no/such/dir/m.obj"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
