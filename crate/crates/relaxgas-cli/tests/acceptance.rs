//! End-to-end acceptance check for the command-line front end: simulation
//! output must be bit-reproducible, and every shipped config must survive a
//! simulate → verify round trip.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

const BUDGET_SECS: f64 = 60.0;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_relaxgas")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary should launch")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "`relaxgas {}` failed with {:?}\nstderr: {}",
        args.join(" "),
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn criterion_9_cli_round_trip() {
    let t0 = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    // Two identical invocations must produce byte-identical series output;
    // anything time- or thread-dependent in the numerics would show up here.
    let smoke = configs_dir().join("smoke.ini");
    let smoke = smoke.to_str().unwrap();
    let (a, b) = (dir.join("a"), dir.join("b"));
    run_ok(&["simulate", "--config", smoke, "--out", a.to_str().unwrap()]);
    run_ok(&["simulate", "--config", smoke, "--out", b.to_str().unwrap()]);
    let series_a = std::fs::read(a.join("series.csv")).unwrap();
    let series_b = std::fs::read(b.join("series.csv")).unwrap();
    assert_eq!(
        series_a, series_b,
        "series.csv differs between identical runs"
    );

    // Every shipped config must simulate cleanly and then verify exit 0.
    for name in ["smoke.ini", "blowup.ini", "equilibrium.ini"] {
        let cfg = configs_dir().join(name);
        let out_dir = dir.join(name.trim_end_matches(".ini"));
        run_ok(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        let verify = run(&["verify", out_dir.to_str().unwrap()]);
        assert!(
            verify.status.success(),
            "verify failed for {name}:\n{}",
            String::from_utf8_lossy(&verify.stdout)
        );
    }

    // The breakdown config must actually record a detector trip, and the trip
    // must land inside the certified deadline.
    let manifest_text = std::fs::read_to_string(dir.join("blowup/manifest.json")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&manifest_text).unwrap();
    assert_eq!(manifest["outcome"]["status"], "blow_up");
    let t_trip = manifest["outcome"]["time"].as_f64().unwrap();
    let t_star = manifest["plan"]["t_star"].as_f64().unwrap();
    assert!(
        t_trip > 0.0 && t_trip < t_star,
        "trip at t = {t_trip} vs deadline {t_star}"
    );

    let wall = t0.elapsed().as_secs_f64();
    assert!(wall < BUDGET_SECS, "took {wall:.2}s, budget {BUDGET_SECS}s");
    println!("acceptance: cli_round_trip: PASS ({wall:.2}s / budget {BUDGET_SECS}s)");
}
