use std::process::{Command, Output};

fn siegel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_siegel")).args(args).output().expect("binary runs")
}

#[test]
fn exit_codes() {
    assert_eq!(siegel(&["lee-socle"]).status.code(), Some(0));
    assert_eq!(siegel(&["lee-socle", "--k", "3"]).status.code(), Some(2));
    assert_eq!(siegel(&["lee-socle", "--height-bound", "2"]).status.code(), Some(2));
    assert_eq!(siegel(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(siegel(&["decompose", "--format", "csv"]).status.code(), Some(2));
    let bad_k = siegel(&["lift-kernel", "--k", "6"]);
    assert_eq!(bad_k.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_k.stderr).contains("multiple of 4"));
}

#[test]
fn zero_tolerance_fails_covariance() {
    let out = siegel(&["verify-covariance", "--tol", "0", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
    let csv = String::from_utf8(out.stdout).unwrap();
    let nonzero = csv.lines().skip(1).filter_map(|l| l.rsplit(',').next()?.parse::<f64>().ok()).filter(|r| *r > 0.0).count();
    assert!(nonzero > 0);
}

#[test]
fn default_eisenstein_checks_pass() {
    for cmd in ["eisenstein-eval", "lift-kernel", "fstar-assemble", "decompose", "roundtrip-constant"] {
        let out = siegel(&[cmd]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["pass"], true);
        assert!(v["config"].is_object(), "{cmd} embeds its config");
    }
}

#[test]
fn sk_diagram_matches_snapshot() {
    let out = siegel(&["ktype-diagram", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), include_str!("fixtures/sk_minimal_2_-2.svg"));
}

#[test]
fn fourier_csv_has_the_documented_columns() {
    let out = siegel(&["fourier-extract", "--trunc", "0", "--grid", "s=2", "--quad-n", "4", "--height-bound", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().next(), Some("t11,t12,t22,y1,v,y2,re,im,err"));
    assert_eq!(csv.lines().count(), 2);
}
