use std::path::PathBuf;
use std::process::{Command, Output};

fn hindex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hindex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hindex-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn exact_prints_one_integer() {
    let path = scratch("citations.txt");
    std::fs::write(&path, "3\n0\n6\n1\n5\n").unwrap();
    let o = hindex(&["exact", "--array", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "3\n");
}

#[test]
fn exact_on_generated_array() {
    let o = hindex(&["exact", "--gen", "n=1000,h=37"]);
    assert_eq!(stdout(&o), "37\n");
}

#[test]
fn estimate_is_close_and_reproducible() {
    let args = [
        "estimate",
        "--gen",
        "n=100000,h=500",
        "--eps",
        "0.1",
        "--delta",
        "0.05",
        "--seed",
        "7",
    ];
    let a = hindex(&args);
    assert_eq!(a.status.code(), Some(0));
    let out = stdout(&a);
    assert_eq!(out.lines().count(), 2, "{out}");
    let first = out.lines().next().unwrap();
    let h: f64 = first
        .split_whitespace()
        .find_map(|f| f.strip_prefix("h_tilde="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((h - 500.0).abs() <= 50.0, "{first}");
    assert!(first.contains(" h=500 "));
    assert_eq!(stdout(&hindex(&args)), out);
}

#[test]
fn estimate_writes_csv() {
    let csv = scratch("est.csv");
    let o = hindex(&[
        "estimate",
        "--gen",
        "n=20000,h=300",
        "--eps",
        "0.25",
        "--trials",
        "3",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("trial_id,seed,n,h_true,eps,delta,h_tilde,success,queries,fallback,time_us\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn invalid_input_exits_one() {
    assert_eq!(
        hindex(&["estimate", "--gen", "n=100,h=5", "--eps", "1.5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(hindex(&["estimate", "--gen", "n=10"]).status.code(), Some(1));
    assert_eq!(hindex(&["exact"]).status.code(), Some(1));
    assert_eq!(
        hindex(&["exact", "--array", "/nonexistent/file"]).status.code(),
        Some(1)
    );
    assert_eq!(hindex(&["frobnicate"]).status.code(), Some(1));
    let o = hindex(&["ptp", "gen", "--m", "100", "--k", "10", "--gamma", "0.25"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());
    assert_eq!(hindex(&["gx", "verify", "--m", "15"]).status.code(), Some(1));
}

#[test]
fn help_everywhere() {
    for sub in [
        vec!["--help"],
        vec!["exact", "--help"],
        vec!["estimate", "--help"],
        vec!["bench", "--help"],
        vec!["ptp", "gen", "--help"],
        vec!["ptp", "solve", "--help"],
        vec!["gx", "verify", "--help"],
    ] {
        let o = hindex(&sub);
        assert_eq!(o.status.code(), Some(0), "{sub:?}");
        assert!(stdout(&o).contains("Usage"), "{sub:?}");
    }
    assert!(stdout(&hindex(&["estimate", "--help"])).contains("--eps"));
}

#[test]
fn gx_verify_passes() {
    let o = hindex(&["gx", "verify", "--m", "16", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 7, "{out}");
    assert!(!out.contains("FAIL"));
}

#[test]
fn ptp_round_trip() {
    let path = scratch("inst.txt");
    let g = hindex(&[
        "ptp",
        "gen",
        "--m",
        "6000",
        "--k",
        "1000",
        "--gamma",
        "0.2",
        "--label",
        "1",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(g.status.code(), Some(0));
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("6000 1000 0.2 1\n"));
    let s = hindex(&["ptp", "solve", "--instance", path.to_str().unwrap()]);
    assert_eq!(s.status.code(), Some(0));
    let out = stdout(&s);
    assert!(
        out.contains("answer=no") && out.contains("exhausted=true") && out.contains("budget=11"),
        "{out}"
    );
    let s = hindex(&["ptp", "solve", "--instance", path.to_str().unwrap(), "--no-budget"]);
    assert!(stdout(&s).contains("answer=yes"), "{}", stdout(&s));
}

#[test]
fn bench_is_byte_identical() {
    let cfg = scratch("bench.toml");
    std::fs::write(
        &cfg,
        "trials = 8\n[grid]\nn = [5000]\nh = [200]\neps = [0.25]\ndelta = [0.1]\n",
    )
    .unwrap();
    let run = |name: &str| {
        let out = scratch(name);
        let o = hindex(&[
            "bench",
            "--suite",
            "estimate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "11",
            "--no-wall-time",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
    let bad = scratch("bad.toml");
    std::fs::write(
        &bad,
        "trials = 0\n[grid]\nn = [5000]\nh = [200]\neps = [0.25]\ndelta = [0.1]\n",
    )
    .unwrap();
    let o = hindex(&[
        "bench",
        "--suite",
        "estimate",
        "--config",
        bad.to_str().unwrap(),
        "--out",
        "/dev/null",
    ]);
    assert_eq!(o.status.code(), Some(1));
}
