//! Scenario execution and report files.
//!
//! Layout under the output directory:
//!
//! ```text
//! config.cfg                     resolved base configuration
//! runs.csv                       one row per (point, embedder, seed)
//! summary.csv                    means over seeds per (point, embedder)
//! [<key=value,...>/]<embedder>/seed-<n>/
//!     config.cfg substrate.txt workload.txt records.csv summary.json
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use vne_core::engine::run;
use vne_core::graph::text::{parse_substrate, parse_workload, write_substrate, write_workload};
use vne_core::metrics::{records_from_csv, records_to_csv, Aggregates, SimulationReport};
use vne_core::scenario::{generate_inputs, run_inputs, ScenarioConfig};
use vne_core::EmbedderKind;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Run(String),
    Audit(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Io(_) | Self::Run(_) => 1,
            Self::Config(_) => 2,
            Self::Audit(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "config: {m}"),
            Self::Io(m) => write!(f, "io: {m}"),
            Self::Run(m) => write!(f, "run: {m}"),
            Self::Audit(m) => write!(f, "audit: {m}"),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Seed list from VNE_SIM_SEED if set, otherwise from the config.
pub fn resolve_seeds(cfg: &ScenarioConfig) -> Result<Vec<u64>, CliError> {
    match std::env::var("VNE_SIM_SEED") {
        Ok(v) => parse_seed_list(&v).map_err(|e| CliError::Config(format!("VNE_SIM_SEED: {e}"))),
        Err(_) => Ok(cfg.seeds().collect()),
    }
}

fn parse_seed_list(text: &str) -> Result<Vec<u64>, String> {
    let text = text.trim();
    let parse = |s: &str| s.trim().parse::<u64>().map_err(|e| format!("`{s}`: {e}"));
    let seeds = if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (parse(a)?, parse(b)?);
        if a > b {
            return Err(format!("empty range {text}"));
        }
        (a..=b).collect()
    } else {
        text.split(',').map(parse).collect::<Result<Vec<_>, _>>()?
    };
    if seeds.is_empty() {
        return Err("no seeds".into());
    }
    Ok(seeds)
}

/// One parameter assignment per sweep point, as (key, value) pairs.
pub type Point = Vec<(String, String)>;

fn param_values(spec: &str) -> Result<(String, Vec<String>), String> {
    let (key, values) = spec
        .split_once('=')
        .ok_or_else(|| format!("--param {spec}: expected KEY=VALUES"))?;
    let values = values.trim();
    let list: Vec<String> = match values.split_once("..") {
        Some((a, b)) => {
            let a: i64 = a
                .trim()
                .parse()
                .map_err(|e| format!("--param {spec}: {e}"))?;
            let b: i64 = b
                .trim()
                .parse()
                .map_err(|e| format!("--param {spec}: {e}"))?;
            if a > b {
                return Err(format!("--param {spec}: empty range"));
            }
            (a..=b).map(|v| v.to_string()).collect()
        }
        None => values
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect(),
    };
    if list.is_empty() {
        return Err(format!("--param {spec}: no values"));
    }
    Ok((key.trim().to_string(), list))
}

/// Cartesian product of all `--param` grids, each point checked against the base config.
pub fn sweep_points(cfg: &ScenarioConfig, params: &[String]) -> Result<Vec<Point>, CliError> {
    let mut points: Vec<Point> = vec![Vec::new()];
    let mut problems = Vec::new();
    for spec in params {
        match param_values(spec) {
            Ok((key, values)) => {
                let mut next = Vec::with_capacity(points.len() * values.len());
                for p in &points {
                    for v in &values {
                        let mut q = p.clone();
                        q.push((key.clone(), v.clone()));
                        next.push(q);
                    }
                }
                points = next;
            }
            Err(e) => problems.push(e),
        }
    }
    for p in &points {
        if let Err(e) = apply_point(cfg, p) {
            problems.push(e);
        }
    }
    problems.dedup();
    if problems.is_empty() {
        Ok(points)
    } else {
        Err(CliError::Config(problems.join("\n  ")))
    }
}

fn apply_point(cfg: &ScenarioConfig, point: &Point) -> Result<ScenarioConfig, String> {
    let mut c = cfg.clone();
    for (k, v) in point {
        c.set(k, v).map_err(|e| format!("{k}={v}: {e}"))?;
    }
    c.validate()
        .map_err(|e| format!("{}: {e}", point_label(point)))?;
    Ok(c)
}

fn point_label(point: &Point) -> String {
    point
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}

struct RunRow {
    point: Point,
    embedder: EmbedderKind,
    seed: u64,
    summary: Aggregates,
}

fn run_one(
    cfg: &ScenarioConfig,
    point: &Point,
    embedder: EmbedderKind,
    seed: u64,
    dir: &Path,
) -> Result<RunRow, CliError> {
    let inputs =
        generate_inputs(cfg, seed).map_err(|e| CliError::Run(format!("seed {seed}: {e}")))?;
    let report = run_inputs(cfg, &inputs, embedder)
        .map_err(|e| CliError::Run(format!("{embedder} seed {seed}: {e}")))?;
    let mut run_cfg = cfg.clone();
    run_cfg.embedders = vec![embedder];
    run_cfg.seed = seed;
    run_cfg.seed_count = 1;
    write(&dir.join("config.cfg"), &run_cfg.to_text())?;
    write(
        &dir.join("substrate.txt"),
        &write_substrate(&inputs.substrate),
    )?;
    write(&dir.join("workload.txt"), &write_workload(&inputs.workload))?;
    write(&dir.join("records.csv"), &report.to_csv())?;
    write(&dir.join("summary.json"), &report.summary_json())?;
    Ok(RunRow {
        point: point.clone(),
        embedder,
        seed,
        summary: report.summary,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn run_points(
    cfg: &ScenarioConfig,
    seeds: &[u64],
    points: &[Point],
    out: &Path,
    jobs: Option<usize>,
) -> Result<(), CliError> {
    let mut tasks: Vec<(ScenarioConfig, &Point, EmbedderKind, u64, PathBuf)> = Vec::new();
    for point in points {
        let point_cfg = apply_point(cfg, point).map_err(CliError::Config)?;
        let base = if point.is_empty() {
            out.to_path_buf()
        } else {
            out.join(point_label(point))
        };
        for &embedder in &cfg.embedders {
            for &seed in seeds {
                let dir = base.join(embedder.as_str()).join(format!("seed-{seed}"));
                tasks.push((point_cfg.clone(), point, embedder, seed, dir));
            }
        }
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = pool.build().map_err(|e| CliError::Run(e.to_string()))?;
    let rows: Vec<RunRow> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(c, p, e, s, d)| run_one(c, p, *e, *s, d))
            .collect::<Result<_, _>>()
    })?;

    write(&out.join("config.cfg"), &cfg.to_text())?;
    let keys: Vec<String> = points
        .first()
        .map(|p| p.iter().map(|(k, _)| k.clone()).collect())
        .unwrap_or_default();

    let mut runs = String::new();
    let mut header: Vec<String> = keys.clone();
    header.extend(
        [
            "embedder",
            "seed",
            "long_term_average_revenue",
            "acceptance_ratio",
            "total_arrivals",
            "total_accepted",
            "total_dropped",
            "mean_node_util",
            "mean_link_util",
            "mean_net_util",
            "mean_embed_seconds",
        ]
        .map(String::from),
    );
    writeln!(runs, "{}", header.join(",")).unwrap();
    for r in &rows {
        let s = &r.summary;
        let mut fields: Vec<String> = r.point.iter().map(|(_, v)| v.clone()).collect();
        fields.extend([
            r.embedder.to_string(),
            r.seed.to_string(),
            s.long_term_average_revenue.to_string(),
            opt(s.acceptance_ratio),
            s.total_arrivals.to_string(),
            s.total_accepted.to_string(),
            s.total_dropped.to_string(),
            s.mean_node_util.to_string(),
            s.mean_link_util.to_string(),
            s.mean_net_util.to_string(),
            s.mean_embed_seconds.to_string(),
        ]);
        writeln!(runs, "{}", fields.join(",")).unwrap();
    }
    write(&out.join("runs.csv"), &runs)?;

    // means over seeds, in task order
    let mut groups: BTreeMap<usize, (Point, EmbedderKind, Vec<&Aggregates>)> = BTreeMap::new();
    let mut index: Vec<(Point, EmbedderKind)> = Vec::new();
    for r in &rows {
        let key = (r.point.clone(), r.embedder);
        let i = match index.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                index.push(key);
                index.len() - 1
            }
        };
        groups
            .entry(i)
            .or_insert_with(|| (r.point.clone(), r.embedder, Vec::new()))
            .2
            .push(&r.summary);
    }

    let mut summary = String::new();
    let mut header: Vec<String> = keys.clone();
    header.extend(
        [
            "embedder",
            "runs",
            "long_term_average_revenue",
            "acceptance_ratio",
            "mean_node_util",
            "mean_link_util",
            "mean_net_util",
            "mean_embed_seconds",
        ]
        .map(String::from),
    );
    writeln!(summary, "{}", header.join(",")).unwrap();
    let mut table = Vec::new();
    for (point, embedder, aggs) in groups.values() {
        let n = aggs.len() as f64;
        let mean = |f: fn(&Aggregates) -> f64| aggs.iter().map(|a| f(a)).sum::<f64>() / n;
        let ratios: Vec<f64> = aggs.iter().filter_map(|a| a.acceptance_ratio).collect();
        let acceptance =
            (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
        let ltar = mean(|a| a.long_term_average_revenue);
        let mut fields: Vec<String> = point.iter().map(|(_, v)| v.clone()).collect();
        fields.extend([
            embedder.to_string(),
            aggs.len().to_string(),
            ltar.to_string(),
            opt(acceptance),
            mean(|a| a.mean_node_util).to_string(),
            mean(|a| a.mean_link_util).to_string(),
            mean(|a| a.mean_net_util).to_string(),
            mean(|a| a.mean_embed_seconds).to_string(),
        ]);
        writeln!(summary, "{}", fields.join(",")).unwrap();
        table.push((
            point_label(point),
            embedder.to_string(),
            ltar,
            acceptance,
            mean(|a| a.mean_net_util),
        ));
    }
    write(&out.join("summary.csv"), &summary)?;

    println!(
        "{:<24} {:<8} {:>14} {:>11} {:>9}",
        "point", "embedder", "avg revenue", "accept %", "net util"
    );
    for (point, embedder, ltar, acc, util) in table {
        let point = if point.is_empty() {
            "-".to_string()
        } else {
            point
        };
        let acc = acc.map_or("n/a".to_string(), |a| format!("{a:.2}"));
        println!("{point:<24} {embedder:<8} {ltar:>14.2} {acc:>11} {util:>9.4}");
    }
    println!("{} runs written to {}", rows.len(), out.display());
    Ok(())
}

pub fn generate(cfg: &ScenarioConfig, seed: u64, out: &Path) -> Result<(), CliError> {
    let inputs = generate_inputs(cfg, seed).map_err(|e| CliError::Run(e.to_string()))?;
    write(
        &out.join("substrate.txt"),
        &write_substrate(&inputs.substrate),
    )?;
    write(&out.join("workload.txt"), &write_workload(&inputs.workload))?;
    println!(
        "seed {seed}: {} nodes, {} links, {} requests written to {}",
        inputs.substrate.node_count(),
        inputs.substrate.link_count(),
        inputs.workload.len(),
        out.display()
    );
    Ok(())
}

/// Re-runs a saved run from its inputs, checks the outputs match byte for
/// byte (timing column excepted when timing was recorded), and repeats the
/// run with auditing on.
pub fn audit_run(dir: &Path) -> Result<(), CliError> {
    let parse_err =
        |name: &str, e: String| CliError::Audit(format!("{}: {e}", dir.join(name).display()));
    let sn = parse_substrate(&read(&dir.join("substrate.txt"))?)
        .map_err(|e| parse_err("substrate.txt", e.to_string()))?;
    let workload = parse_workload(&read(&dir.join("workload.txt"))?)
        .map_err(|e| parse_err("workload.txt", e.to_string()))?;
    let summary_text = read(&dir.join("summary.json"))?;
    let records_text = read(&dir.join("records.csv"))?;
    let saved: SimulationReport = serde_json::from_str(&summary_text)
        .map_err(|e| parse_err("summary.json", e.to_string()))?;
    let saved_records =
        records_from_csv(&records_text).map_err(|e| parse_err("records.csv", e.to_string()))?;

    if Aggregates::from_records(&saved_records) != saved.summary && !saved.config.record_timing {
        return Err(CliError::Audit(
            "summary.json does not match records.csv".into(),
        ));
    }

    let rerun = run(&sn, &workload, saved.n_windows, &saved.config)
        .map_err(|e| CliError::Audit(e.to_string()))?;
    if saved.config.record_timing {
        let strip = |rs: &[vne_core::MetricsRecord]| {
            let mut rs = rs.to_vec();
            for r in &mut rs {
                r.mean_embed_seconds = 0.0;
            }
            records_to_csv(&rs)
        };
        if strip(&rerun.records) != strip(&saved_records) {
            return Err(CliError::Audit("re-run records differ".into()));
        }
    } else {
        if rerun.to_csv() != records_text {
            return Err(CliError::Audit("re-run records.csv differs".into()));
        }
        if rerun.summary_json() != summary_text {
            return Err(CliError::Audit("re-run summary.json differs".into()));
        }
    }

    let mut audited_cfg = saved.config.clone();
    audited_cfg.audit = true;
    let audited = run(&sn, &workload, saved.n_windows, &audited_cfg)
        .map_err(|e| CliError::Audit(e.to_string()))?;
    if !audited.final_state_restored {
        return Err(CliError::Audit("residuals not restored after drain".into()));
    }
    println!(
        "{}: reproduced {} windows of {} exactly; audit found no discrepancies",
        dir.display(),
        saved.n_windows,
        saved.config.embedder
    );
    Ok(())
}
