use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn vne_sim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vne-sim"))
        .args(args)
        .current_dir(dir)
        .env_remove("VNE_SIM_SEED")
        .output()
        .expect("binary runs")
}

fn small(extra: &[&'static str]) -> Vec<&'static str> {
    let mut args = vec![
        "--set",
        "n_nodes=15",
        "--set",
        "grid_rows=4",
        "--set",
        "grid_cols=4",
        "--set",
        "n_windows=25",
        "--set",
        "arrival_rate=6",
    ];
    args.extend_from_slice(extra);
    args
}

fn files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(root).unwrap().display().to_string(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn help_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let out = vne_sim(&["--help"], tmp.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["run", "sweep", "gen", "audit"] {
        assert!(text.contains(sub), "{text}");
    }
}

#[test]
fn config_errors_list_every_field() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("bad.cfg"),
        "edge_prob = 1.5\nseed_count = -3\nk_paths = 0\n",
    )
    .unwrap();
    let out = vne_sim(&["run", "--config", "bad.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("seed_count"), "{err}");

    fs::write(
        tmp.path().join("bad2.cfg"),
        "edge_prob = 1.5\nk_paths = 0\n",
    )
    .unwrap();
    let out = vne_sim(&["run", "--config", "bad2.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("edge_prob") && err.contains("k_paths"),
        "{err}"
    );

    let out = vne_sim(&["run", "--config", "missing.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn shipped_config_parses_to_defaults() {
    let text = fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../configs/default.cfg"
    ))
    .unwrap();
    let cfg = vne_core::ScenarioConfig::parse(&text).unwrap();
    assert_eq!(cfg, vne_core::ScenarioConfig::default());
    assert_eq!(cfg, vne_core::ScenarioConfig::parse("").unwrap());
    assert_eq!(cfg.substrate.n_nodes, 100);
    assert_eq!(cfg.engine.embedder_config.x_candidates, 9);
    assert_eq!(cfg.engine.embedder_config.psi, 1.0);
    assert_eq!(cfg.workload.n_windows, 500);
}

#[test]
fn reruns_are_byte_identical_and_auditable() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["run"];
    args.extend(small(&["--set", "seed_count=2", "-o", "a"]));
    assert!(vne_sim(&args, tmp.path()).status.success());
    let first = files(&tmp.path().join("a"));
    assert!(vne_sim(&args, tmp.path()).status.success());
    assert_eq!(first, files(&tmp.path().join("a")));
    // 3 embedders x 2 seeds x 5 files, plus config, runs and summary
    assert_eq!(first.len(), 33);

    let run_dir = tmp.path().join("a/rt-vne/seed-2");
    let out = vne_sim(&["audit", run_dir.to_str().unwrap()], tmp.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let records = run_dir.join("records.csv");
    let text = fs::read_to_string(&records).unwrap();
    let tampered = text.replacen(",0,", ",1,", 1);
    assert_ne!(text, tampered);
    fs::write(&records, tampered).unwrap();
    let out = vne_sim(&["audit", run_dir.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn summary_matches_per_run_aggregates() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["run"];
    args.extend(small(&["-o", "s"]));
    assert!(vne_sim(&args, tmp.path()).status.success());
    let summary = fs::read_to_string(tmp.path().join("s/summary.csv")).unwrap();
    for line in summary.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let json =
            fs::read_to_string(tmp.path().join(format!("s/{}/seed-1/summary.json", f[0]))).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let ltar = v["summary"]["long_term_average_revenue"].as_f64().unwrap();
        assert_eq!(f[2].parse::<f64>().unwrap(), ltar);
    }
}

#[test]
fn seed_env_and_sweep_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["run"];
    args.extend(small(&["--set", "embedders=cc-vne", "-o", "e"]));
    let out = Command::new(env!("CARGO_BIN_EXE_vne-sim"))
        .args(&args)
        .current_dir(tmp.path())
        .env("VNE_SIM_SEED", "3,5")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(tmp.path().join("e/cc-vne/seed-3").is_dir());
    assert!(tmp.path().join("e/cc-vne/seed-5").is_dir());
    assert!(!tmp.path().join("e/cc-vne/seed-1").exists());

    let mut args = vec!["sweep", "--param", "x_candidates=2..4"];
    args.extend(small(&["--set", "embedders=rt-vne", "-o", "w"]));
    let out = vne_sim(&args, tmp.path());
    assert!(out.status.success());
    let summary = fs::read_to_string(tmp.path().join("w/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert!(summary.starts_with("x_candidates,embedder,"));
    assert!(tmp
        .path()
        .join("w/x_candidates=3/rt-vne/seed-1/records.csv")
        .is_file());
}

#[test]
fn gen_writes_parseable_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["gen", "--seed", "4"];
    args.extend(small(&["-o", "g"]));
    assert!(vne_sim(&args, tmp.path()).status.success());
    let sn = fs::read_to_string(tmp.path().join("g/substrate.txt")).unwrap();
    let w = fs::read_to_string(tmp.path().join("g/workload.txt")).unwrap();
    assert_eq!(
        vne_core::graph::text::parse_substrate(&sn)
            .unwrap()
            .node_count(),
        15
    );
    assert!(!vne_core::graph::text::parse_workload(&w)
        .unwrap()
        .is_empty());
}
