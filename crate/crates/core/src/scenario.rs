//! Flat `key = value` experiment configuration and single-run orchestration.
//!
//! Blank lines and text after `#` are ignored. Unknown keys are errors.
//! See [`ScenarioConfig::to_text`] for the full key list with defaults.

use std::fmt;

use thiserror::Error;

use crate::embed::EmbedderKind;
use crate::engine::{run, EngineConfig, EngineError, WindowOrdering};
use crate::graph::{LtrBasis, SubstrateNetwork, VirtualNetworkRequest};
use crate::metrics::SimulationReport;
use crate::netgen::{
    gen_substrate, gen_workload, EdgeModel, NetgenError, SizeClass, SubstrateGenConfig,
    WorkloadConfig,
};

/// Every problem found in a configuration, one message per problem.
#[derive(Debug, Error, Clone, PartialEq)]
pub struct ConfigError {
    pub problems: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} configuration problem(s):", self.problems.len())?;
        for p in &self.problems {
            write!(f, "\n  - {p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Netgen(#[from] NetgenError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub embedders: Vec<EmbedderKind>,
    /// First seed; runs use `seed .. seed + seed_count`.
    pub seed: u64,
    pub seed_count: u64,
    pub substrate: SubstrateGenConfig,
    pub workload: WorkloadConfig,
    /// The `embedder` field is overridden per run.
    pub engine: EngineConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            embedders: EmbedderKind::ALL.to_vec(),
            seed: 1,
            seed_count: 1,
            substrate: SubstrateGenConfig::default(),
            workload: WorkloadConfig::default(),
            engine: EngineConfig::default(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| format!("{key}: cannot parse `{value}`: {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("{key}: expected true or false, got `{value}`")),
    }
}

fn size_class_name(s: SizeClass) -> &'static str {
    match s {
        SizeClass::Small => "small",
        SizeClass::Medium => "medium",
        SizeClass::Large => "large",
    }
}

fn basis_name(b: LtrBasis) -> &'static str {
    match b {
        LtrBasis::Residual => "residual",
        LtrBasis::Total => "total",
    }
}

impl ScenarioConfig {
    pub const KEYS: &'static [&'static str] = &[
        "embedders",
        "seed",
        "seed_count",
        "n_nodes",
        "grid_rows",
        "grid_cols",
        "edge_prob",
        "edge_model",
        "waxman_beta",
        "sn_cpu_min",
        "sn_cpu_max",
        "sn_bw_min",
        "sn_bw_max",
        "size_class",
        "vn_edge_prob",
        "vn_cpu_min",
        "vn_cpu_max",
        "vn_bw_min",
        "vn_bw_max",
        "arrival_rate",
        "mean_lifetime",
        "n_windows",
        "psi",
        "x_candidates",
        "k_paths",
        "ltr_basis",
        "max_deferrals",
        "ordering",
        "audit",
        "record_timing",
    ];

    /// Sets one key. Values are trimmed.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        let s = &mut self.substrate;
        let w = &mut self.workload;
        let e = &mut self.engine;
        match key.trim() {
            "embedders" => {
                let kinds = value
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(str::parse)
                    .collect::<Result<Vec<EmbedderKind>, _>>()
                    .map_err(|err| format!("embedders: {err}"))?;
                self.embedders = kinds;
            }
            "seed" => self.seed = parse_num(key, value)?,
            "seed_count" => {
                if value.starts_with('-') {
                    return Err(format!(
                        "seed_count must be a positive integer, got `{value}`"
                    ));
                }
                self.seed_count = parse_num(key, value)?;
            }
            "n_nodes" => s.n_nodes = parse_num(key, value)?,
            "grid_rows" => s.grid.0 = parse_num(key, value)?,
            "grid_cols" => s.grid.1 = parse_num(key, value)?,
            "edge_prob" => s.edge_prob = parse_num(key, value)?,
            "edge_model" => {
                s.edge_model = match value {
                    "uniform" => EdgeModel::Uniform,
                    "waxman" => EdgeModel::Waxman {
                        beta: match s.edge_model {
                            EdgeModel::Waxman { beta } => beta,
                            EdgeModel::Uniform => 0.4,
                        },
                    },
                    _ => {
                        return Err(format!(
                            "edge_model: expected uniform or waxman, got `{value}`"
                        ))
                    }
                }
            }
            "waxman_beta" => {
                let beta = parse_num(key, value)?;
                s.edge_model = EdgeModel::Waxman { beta };
            }
            "sn_cpu_min" => s.cpu_range.0 = parse_num(key, value)?,
            "sn_cpu_max" => s.cpu_range.1 = parse_num(key, value)?,
            "sn_bw_min" => s.bw_range.0 = parse_num(key, value)?,
            "sn_bw_max" => s.bw_range.1 = parse_num(key, value)?,
            "size_class" => w.size_class = value.parse()?,
            "vn_edge_prob" => w.vn_edge_prob = parse_num(key, value)?,
            "vn_cpu_min" => w.cpu_range.0 = parse_num(key, value)?,
            "vn_cpu_max" => w.cpu_range.1 = parse_num(key, value)?,
            "vn_bw_min" => w.bw_range.0 = parse_num(key, value)?,
            "vn_bw_max" => w.bw_range.1 = parse_num(key, value)?,
            "arrival_rate" => w.arrival_rate = parse_num(key, value)?,
            "mean_lifetime" => w.mean_lifetime = parse_num(key, value)?,
            "n_windows" => w.n_windows = parse_num(key, value)?,
            "psi" => e.embedder_config.psi = parse_num(key, value)?,
            "x_candidates" => e.embedder_config.x_candidates = parse_num(key, value)?,
            "k_paths" => e.embedder_config.k_paths = parse_num(key, value)?,
            "ltr_basis" => e.embedder_config.ltr_basis = value.parse()?,
            "max_deferrals" => e.max_deferrals = parse_num(key, value)?,
            "ordering" => e.ordering = value.parse::<WindowOrdering>()?,
            "audit" => e.audit = parse_bool(key, value)?,
            "record_timing" => e.record_timing = parse_bool(key, value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Parses a config file on top of the defaults, reporting every bad line.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut problems = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    if let Err(e) = cfg.set(k, v) {
                        problems.push(format!("line {}: {e}", i + 1));
                    }
                }
                None => problems.push(format!("line {}: expected `key = value`", i + 1)),
            }
        }
        if problems.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError { problems })
        }
    }

    /// Canonical text form; parsing it yields an equal config.
    pub fn to_text(&self) -> String {
        let s = &self.substrate;
        let w = &self.workload;
        let e = &self.engine;
        let names: Vec<&str> = self.embedders.iter().map(|k| k.as_str()).collect();
        let mut lines = vec![
            format!("embedders = {}", names.join(",")),
            format!("seed = {}", self.seed),
            format!("seed_count = {}", self.seed_count),
            format!("n_nodes = {}", s.n_nodes),
            format!("grid_rows = {}", s.grid.0),
            format!("grid_cols = {}", s.grid.1),
            format!("edge_prob = {}", s.edge_prob),
        ];
        match s.edge_model {
            EdgeModel::Uniform => lines.push("edge_model = uniform".into()),
            EdgeModel::Waxman { beta } => {
                lines.push("edge_model = waxman".into());
                lines.push(format!("waxman_beta = {beta}"));
            }
        }
        lines.extend([
            format!("sn_cpu_min = {}", s.cpu_range.0),
            format!("sn_cpu_max = {}", s.cpu_range.1),
            format!("sn_bw_min = {}", s.bw_range.0),
            format!("sn_bw_max = {}", s.bw_range.1),
            format!("size_class = {}", size_class_name(w.size_class)),
            format!("vn_edge_prob = {}", w.vn_edge_prob),
            format!("vn_cpu_min = {}", w.cpu_range.0),
            format!("vn_cpu_max = {}", w.cpu_range.1),
            format!("vn_bw_min = {}", w.bw_range.0),
            format!("vn_bw_max = {}", w.bw_range.1),
            format!("arrival_rate = {}", w.arrival_rate),
            format!("mean_lifetime = {}", w.mean_lifetime),
            format!("n_windows = {}", w.n_windows),
            format!("psi = {}", e.embedder_config.psi),
            format!("x_candidates = {}", e.embedder_config.x_candidates),
            format!("k_paths = {}", e.embedder_config.k_paths),
            format!("ltr_basis = {}", basis_name(e.embedder_config.ltr_basis)),
            format!("max_deferrals = {}", e.max_deferrals),
            format!("ordering = {}", e.ordering),
            format!("audit = {}", e.audit),
            format!("record_timing = {}", e.record_timing),
        ]);
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }

    /// Checks value ranges, reporting every violation at once.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut problems = Vec::new();
        if self.embedders.is_empty() {
            problems.push("embedders must name at least one embedder".to_string());
        }
        if self.seed_count == 0 {
            problems.push("seed_count must be at least 1".to_string());
        }
        problems.extend(self.substrate.violations());
        problems.extend(self.workload.violations());
        let ec = &self.engine.embedder_config;
        if !(ec.psi.is_finite() && ec.psi >= 0.0) {
            problems.push(format!("psi must be a non-negative number, got {}", ec.psi));
        }
        if ec.x_candidates == 0 {
            problems.push("x_candidates must be at least 1".to_string());
        }
        if ec.k_paths == 0 {
            problems.push("k_paths must be at least 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { problems })
        }
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> {
        let start = self.seed;
        (0..self.seed_count).map(move |i| start.wrapping_add(i))
    }

    pub fn substrate_config(&self, seed: u64) -> SubstrateGenConfig {
        SubstrateGenConfig {
            seed,
            ..self.substrate.clone()
        }
    }

    /// Workload streams use a seed derived from, but distinct from, the substrate seed.
    pub fn workload_config(&self, seed: u64) -> WorkloadConfig {
        WorkloadConfig {
            seed: workload_seed(seed),
            ..self.workload.clone()
        }
    }

    pub fn engine_config(&self, embedder: EmbedderKind) -> EngineConfig {
        EngineConfig {
            embedder,
            ..self.engine.clone()
        }
    }
}

pub fn validate_config(cfg: &ScenarioConfig) -> Result<(), ConfigError> {
    cfg.validate()
}

pub fn workload_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

/// Inputs generated for one seed.
#[derive(Debug, Clone)]
pub struct ScenarioInputs {
    pub seed: u64,
    pub substrate: SubstrateNetwork,
    pub workload: Vec<VirtualNetworkRequest>,
}

pub fn generate_inputs(cfg: &ScenarioConfig, seed: u64) -> Result<ScenarioInputs, ScenarioError> {
    Ok(ScenarioInputs {
        seed,
        substrate: gen_substrate(&cfg.substrate_config(seed))?,
        workload: gen_workload(&cfg.workload_config(seed))?,
    })
}

/// Simulates one embedder on previously generated inputs.
pub fn run_inputs(
    cfg: &ScenarioConfig,
    inputs: &ScenarioInputs,
    embedder: EmbedderKind,
) -> Result<SimulationReport, ScenarioError> {
    Ok(run(
        &inputs.substrate,
        &inputs.workload,
        cfg.workload.n_windows,
        &cfg.engine_config(embedder),
    )?)
}
