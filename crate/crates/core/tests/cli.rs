use std::process::{Command, Output};

use sbf_overlap::dist_algebra::{DistExpr, RegionFactor};
use sbf_overlap::double_sbf::{closed_form, DoubleSpec};
use sbf_overlap::triple_sbf::TripleResult;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbf-overlap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let o = run(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn double_json_has_value() {
    let v = json(&["double", "--l", "0", "--lp", "1", "--n", "2", "--r", "0.3", "--rp", "1.2", "--json"]);
    let direct = sbf_overlap::double_sbf::gr_direct(0.into(), 1.into(), 2, 0.3, 1.2).unwrap();
    assert!((v["value"].as_f64().unwrap() - direct).abs() < 1e-12 * direct.abs());
    assert_eq!(v["singular"].as_array().unwrap().len(), 0);
}

#[test]
fn diagonal_exits_3_without_stdout() {
    let o = run(&["double", "--l", "0", "--lp", "0", "--n", "2", "--r", "1", "--rp", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());
}

#[test]
fn closed_form_is_stable_and_round_trips() {
    let args = ["closed-form", "--l", "1", "--lp", "1", "--n", "4"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
    let e: DistExpr = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(e, closed_form(DoubleSpec::new(1, 1, 4)).unwrap());
    assert!(e
        .terms
        .iter()
        .any(|t| matches!(t.region, RegionFactor::DeltaDerivative(m) if m >= 1)));

    let e: DistExpr = serde_json::from_slice(&run(&["closed-form", "--l", "0", "--lp", "0", "--n", "2"]).stdout).unwrap();
    assert_eq!(e.regular_terms().count(), 0);
    assert_eq!(e.delta_terms().count(), 1);

    let e: DistExpr = serde_json::from_slice(&run(&["closed-form", "--l", "0", "--lp", "1", "--n", "0"]).stdout).unwrap();
    assert_eq!(e.regular_terms().count(), 2);
    assert_eq!(e.delta_terms().count(), 0);
}

#[test]
fn grid_ladder_matches_direct() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.csv");
    let o = run(&[
        "grid", "--l", "0", "--lp", "1", "--n", "2", "--rmax", "2", "--steps", "50", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,rp,value_ladder,value_direct"));
    let mut cells = 0;
    let mut worst: f64 = 0.0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let (r, rp): (f64, f64) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        cells += 1;
        if (r - rp).abs() < 1e-6 {
            continue;
        }
        let (a, b): (f64, f64) = (f[2].parse().unwrap(), f[3].parse().unwrap());
        worst = worst.max((a - b).abs() / b.abs());
    }
    assert_eq!(cells, 2500);
    assert!(worst < 1e-10, "{worst:e}");
}

#[test]
fn grid_refuses_distributions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let p = out.to_str().unwrap();
    let o = run(&["grid", "--l", "0", "--lp", "0", "--n", "2", "--rmax", "2", "--steps", "4", "--out", p]);
    assert_eq!(o.status.code(), Some(4));
    let o = run(&[
        "grid", "--l", "0", "--lp", "0", "--n", "2", "--rmax", "2", "--steps", "1", "--out", p, "--regular-only",
    ]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 2);
}

#[test]
fn triple_outside_triangle() {
    let o = run(&["triple", "--orders", "0,0,2", "--n", "4", "--radii", "1,1,5", "--json"]);
    let res: TripleResult = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(res.value, 0.0);
    assert!(!res.triangle_ok);
}

#[test]
fn oracle_and_multi() {
    let o = run(&["oracle", "--orders", "0,0", "--n", "0", "--radii", "0.5,1"]);
    assert!(stdout(&o).starts_with("1.5707963"), "{}", stdout(&o));
    let v = json(&["multi", "--orders", "0,0,0,0", "--n", "2", "--radii", "1,1,1,1", "--json"]);
    assert!((v["value"].as_f64().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-8);
    assert!(v["error_estimate"].as_f64().is_some());
}
