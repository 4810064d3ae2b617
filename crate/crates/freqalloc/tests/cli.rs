use std::path::Path;
use std::process::{Command, Output};

use freqalloc::io::{read_graph, read_layout};
use freqalloc_core::{build_lattice, LatticeKind, LatticeSpec};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freqalloc"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    let mut rows = vec![header];
    for rec in r.records() {
        rows.push(rec.unwrap().iter().map(String::from).collect());
    }
    rows
}

#[test]
fn generate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["generate", "--kind", "chain", "--cells", "8", "--periodic", "--out", "ring.json"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("8 nodes, 8 edges"));
    let loaded = read_graph(&dir.path().join("ring.json")).unwrap();
    let built = build_lattice(&LatticeSpec::new(LatticeKind::Chain, 8, true)).unwrap();
    assert_eq!(loaded, built);

    for kind in ["square", "hexagon", "heavy-hexagon"] {
        let o = run(dir.path(), &["generate", "--kind", kind, "--periodic", "--out", "g.json"]);
        assert_eq!(code(&o), 0, "{kind}");
        let kind: LatticeKind = kind.parse().unwrap();
        let built = build_lattice(&LatticeSpec::standard(kind).unwrap()).unwrap();
        assert_eq!(read_graph(&dir.path().join("g.json")).unwrap(), built);
    }

    let o = run(dir.path(), &["generate", "--kind", "chain", "--cells", "2", "--out", "pair.json"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("2 nodes, 1 edges"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["generate", "--kind", "kagome", "--cells", "8"]);
    assert_eq!(code(&o), 1);
    assert!(!o.stderr.is_empty());
    let o = run(dir.path(), &["--config", "missing.json", "solve", "--kind", "chain", "--cells", "2"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.json"));
    let o = run(dir.path(), &["frobnicate"]);
    assert_eq!(code(&o), 1);
    let o = run(dir.path(), &["--help"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn narrow_band_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["--quiet", "solve", "--kind", "chain", "--cells", "2", "--band", "5000", "5005"],
    );
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());
}

#[test]
fn solve_check_yield_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = run(d, &["--quiet", "solve", "--kind", "chain", "--cells", "8", "--periodic", "--node-limit", "20000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (a, arch) = read_layout(&d.join("layout.json")).unwrap();
    assert_eq!(a.freqs.len(), 8);
    assert_eq!(arch, Some(freqalloc_core::Architecture::CrQubit));

    let o = run(d, &["check", "--layout", "layout.json", "--kind", "chain", "--cells", "8", "--periodic"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&d.join("collisions.csv"));
    assert_eq!(rows[0], ["type", "participants", "margin_mhz"]);
    assert_eq!(rows.len() - 1, 88);
    assert!(rows[1..].iter().all(|r| r[2].parse::<f64>().unwrap() >= 0.0));

    let o = run(
        d,
        &["yield", "--layout", "layout.json", "--kind", "chain", "--cells", "8", "--periodic", "--sigmas", "0", "--trials", "50"],
    );
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&d.join("yield.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][..3], ["sigma_mhz", "yield", "stderr"]);
    assert_eq!(rows[1][1], "1");
}

#[test]
fn equal_neighbors_collide() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("graph.json"), r#"{"nodes": 2, "edges": [[0, 1]]}"#).unwrap();
    std::fs::write(d.join("flat.json"), r#"{"freqs": [5000, 5000], "anharms": [-270, -270]}"#).unwrap();
    let o = run(d, &["check", "--layout", "flat.json", "--graph", "graph.json"]);
    assert_eq!(code(&o), 3);
    let rows = csv_rows(&d.join("collisions.csv"));
    let a1 = rows[1..].iter().filter(|r| r[0] == "A1" && r[2].parse::<f64>().unwrap() < 0.0).count();
    assert!(a1 >= 1);
    assert!(stdout(&o).contains("A1: 1 violated"));
}

#[test]
fn malformed_layout() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.json"), "{\"freqs\": [5000,").unwrap();
    let o = run(d, &["check", "--layout", "bad.json", "--kind", "chain", "--cells", "2"]);
    assert_eq!(code(&o), 1);
    std::fs::write(d.join("short.json"), r#"{"freqs": [5000], "anharms": [-270]}"#).unwrap();
    let o = run(d, &["check", "--layout", "short.json", "--kind", "chain", "--cells", "2"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn scale_prints_the_law() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["scale", "--ym", "0.5", "--nm", "8", "--n", "8"]);
    assert_eq!(stdout(&o).trim(), "0.5");
    let o = run(dir.path(), &["scale", "--ym", "1", "--nm", "8", "--n", "1000"]);
    assert_eq!(stdout(&o).trim(), "1");
    let o = run(dir.path(), &["scale", "--ym", "0.9", "--nm", "16", "--n", "1000"]);
    let y: f64 = stdout(&o).trim().parse().unwrap();
    assert_eq!(y, 0.9f64.powf(62.5));
    let o = run(dir.path(), &["scale", "--ym", "1.5", "--nm", "8", "--n", "8"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn config_file_drives_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("run.json"),
        r#"{
            "lattice": {"kind": "chain", "cells": 2},
            "architecture": "cz-qubit",
            "thresholds": {"A1": 20},
            "solver": {"band": [4800, 5200], "node_limit": 5000},
            "dispersion": {"sigmas": [0, 30], "trials": 200, "seed": 4},
            "output_dir": "out"
        }"#,
    )
    .unwrap();
    let o = run(d, &["--config", "run.json", "--quiet", "solve"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (a, arch) = read_layout(&d.join("out/layout.json")).unwrap();
    assert_eq!(arch, Some(freqalloc_core::Architecture::CzQubit));
    assert_eq!(a.drives.unwrap().len(), 1);
    let o = run(d, &["--config", "run.json", "--quiet", "yield", "--layout", "out/layout.json", "--scale-N", "16"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&d.join("out/yield.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][3], "scaled_yield");

    std::fs::write(d.join("bad.json"), r#"{"thresholds": {"A1": -1}}"#).unwrap();
    assert_eq!(code(&run(d, &["--config", "bad.json", "scale", "--ym", "1", "--nm", "1", "--n", "1"])), 1);
    std::fs::write(d.join("typo.json"), r#"{"dispersoin": {}}"#).unwrap();
    assert_eq!(code(&run(d, &["--config", "typo.json", "scale", "--ym", "1", "--nm", "1", "--n", "1"])), 1);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("graph.json"), r#"{"nodes": 3, "edges": [[0, 1], [2, 1]]}"#).unwrap();
    std::fs::write(d.join("l.json"), r#"{"freqs": [5000, 4900, 5000], "anharms": [-270, -270, -270]}"#).unwrap();
    let args = |threads: &'static str, out: &'static str| {
        vec![
            "--seed", "9", "--threads", threads, "--quiet", "yield", "--layout", "l.json", "--graph", "graph.json",
            "--sigmas", "10,40", "--trials", "3000", "--out", out,
        ]
    };
    for (t, out) in [("1", "a.csv"), ("1", "b.csv"), ("5", "c.csv")] {
        assert_eq!(code(&run(d, &args(t, out))), 0);
    }
    let a = std::fs::read(d.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b.csv")).unwrap());
    assert_eq!(a, std::fs::read(d.join("c.csv")).unwrap());
}
