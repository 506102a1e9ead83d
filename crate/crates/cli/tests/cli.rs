use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dhl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dhl")).args(args).output().unwrap()
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (Output, String) {
    let out = dir.join(name);
    let mut all = args.to_vec();
    let out_str = out.to_str().unwrap().to_string();
    all.extend(["--out", &out_str]);
    let o = dhl(&all);
    let body = fs::read_to_string(&out).unwrap_or_default();
    (o, body)
}

#[test]
fn output_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 3] = [
        &["psi-time", "--set", "gammas=[0,0.02,0.05]", "--set", "kappa=1.2", "--set", "time.count=40"],
        &["critical", "--set", "manifolds=[3,9,12]", "--set", "gamma=0.05"],
        &[
            "phase-diagram",
            "--set",
            r#"mu_rel={"start":-0.95,"stop":-0.8,"count":3}"#,
            "--set",
            r#"kappa={"start":0.01,"stop":0.1,"count":3,"scale":"log"}"#,
            "--set",
            "gamma=0.2",
        ],
    ];
    for (i, args) in cases.iter().enumerate() {
        let mut a = args.to_vec();
        a.extend(["--workers", "1"]);
        let (o1, one) = run_to(dir.path(), &format!("{i}-1.csv"), &a);
        let mut b = args.to_vec();
        b.extend(["--workers", "8"]);
        let (o8, eight) = run_to(dir.path(), &format!("{i}-8.csv"), &b);
        assert!(o1.status.success(), "{}", String::from_utf8_lossy(&o1.stderr));
        assert_eq!(o1.status.code(), o8.status.code());
        assert!(!one.is_empty());
        assert_eq!(one, eight, "case {i}");
    }
}

#[test]
fn table_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (o, body) = run_to(
        dir.path(),
        "t.csv",
        &["psi-hopping", "--set", r#"kappa={"start":0,"stop":2,"count":21}"#, "--set", "gamma=0.05"],
    );
    assert!(o.status.success());
    assert!(!body.contains('\r'));
    let lines: Vec<&str> = body.lines().collect();
    assert!(lines[0].starts_with("# version: dhl "));
    assert_eq!(lines[1], "# mode: psi-hopping");
    assert!(lines[2].starts_with("# config: {"));
    assert_eq!(lines[3], "kappa,psi,t,n,gamma,error");
    assert_eq!(lines.len(), 4 + 21);
    // Zero up to the critical hopping, positive beyond it.
    let psi: Vec<f64> = lines[4..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    let onset = psi.iter().position(|&p| p > 0.0).unwrap();
    assert!(onset > 0);
    assert!(psi[onset..].iter().all(|&p| p > 0.0));
}

#[test]
fn header_reproduces_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let (_, first) = run_to(dir.path(), "a.csv", &["critical", "--set", "manifolds=[3,9]", "--set", "gamma=0.02"]);
    let config = first.lines().nth(2).unwrap().strip_prefix("# config: ").unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(&cfg_path, config).unwrap();
    let (o, second) = run_to(dir.path(), "b.csv", &["--config", cfg_path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(first, second);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"mode\": \"critical\",").unwrap();
    let (o, _) = run_to(dir.path(), "x.csv", &["--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("\"kind\":\"config\"") && err.contains("line 1"), "{err}");

    let (o, _) = run_to(dir.path(), "x.csv", &["critical", "--set", "time.count=0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("time.count"));

    let (o, body) = run_to(dir.path(), "x.csv", &["psi-time", "--set", "manifolds=[1]"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(body.lines().nth(4).unwrap().starts_with("0.0000000000000000e0,NaN,center,1,"));

    let o = dhl(&["critical", "--out", dir.path().join("missing/x.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("\"kind\":\"io\""));

    let o = dhl(&["critical"]);
    assert_eq!(o.status.code(), Some(2));
}
