//! Seeded generation of substrate topologies and VNR workloads.
//!
//! Every generator draws from a `ChaCha8Rng` seeded with `seed_from_u64`, so
//! output depends only on the config (including its seed).

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{NodeId, SubstrateNetwork, VirtualNetworkRequest, VnrId};

/// Maximum regeneration attempts before giving up on connectivity.
pub const MAX_RETRIES: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetgenError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("could not generate a connected {what} in {attempts} attempts")]
    GenerationFailed { what: &'static str, attempts: usize },
}

/// How substrate node pairs are linked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum EdgeModel {
    /// Every pair is linked with probability `edge_prob`.
    #[default]
    Uniform,
    /// Waxman: `edge_prob * exp(-d / (beta * L))`, `L` the grid diagonal.
    Waxman { beta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstrateGenConfig {
    pub n_nodes: usize,
    /// (rows, cols) of the placement grid.
    pub grid: (usize, usize),
    pub edge_prob: f64,
    pub edge_model: EdgeModel,
    pub cpu_range: (f64, f64),
    pub bw_range: (f64, f64),
    pub seed: u64,
}

impl Default for SubstrateGenConfig {
    fn default() -> Self {
        Self {
            n_nodes: 100,
            grid: (10, 10),
            edge_prob: 0.5,
            edge_model: EdgeModel::Uniform,
            cpu_range: (0.0, 300.0),
            bw_range: (0.0, 300.0),
            seed: 0,
        }
    }
}

fn check_range(name: &str, (lo, hi): (f64, f64)) -> Result<(), String> {
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
        return Err(format!(
            "{name} must satisfy 0 <= low <= high, got [{lo}, {hi}]"
        ));
    }
    Ok(())
}

fn check_prob(name: &str, p: f64) -> Result<(), String> {
    if !(0.0..=1.0).contains(&p) {
        return Err(format!("{name} must be within [0, 1], got {p}"));
    }
    Ok(())
}

impl SubstrateGenConfig {
    /// All violations, one message each.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n_nodes == 0 {
            out.push("n_nodes must be at least 1".to_string());
        }
        if self.n_nodes > self.grid.0 * self.grid.1 {
            out.push(format!(
                "n_nodes {} exceeds grid capacity {}x{}",
                self.n_nodes, self.grid.0, self.grid.1
            ));
        }
        out.extend(check_prob("edge_prob", self.edge_prob).err());
        if let EdgeModel::Waxman { beta } = self.edge_model {
            if !(beta.is_finite() && beta > 0.0) {
                out.push(format!("waxman beta must be positive, got {beta}"));
            }
        }
        out.extend(check_range("cpu_range", self.cpu_range).err());
        out.extend(check_range("bw_range", self.bw_range).err());
        out
    }

    pub fn validate(&self) -> Result<(), NetgenError> {
        match self.violations().into_iter().next() {
            Some(v) => Err(NetgenError::InvalidConfig(v)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SizeClass {
    /// 2 to 10 vnodes.
    #[default]
    Small,
    /// 10 to 50 vnodes.
    Medium,
    /// 50 to 80 vnodes.
    Large,
}

impl SizeClass {
    pub fn bounds(self) -> (usize, usize) {
        match self {
            Self::Small => (2, 10),
            Self::Medium => (10, 50),
            Self::Large => (50, 80),
        }
    }
}

impl std::str::FromStr for SizeClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "small" => Ok(Self::Small),
            "medium" => Ok(Self::Medium),
            "large" => Ok(Self::Large),
            other => Err(format!(
                "unknown size class `{other}` (expected small|medium|large)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadConfig {
    pub size_class: SizeClass,
    pub vn_edge_prob: f64,
    pub cpu_range: (f64, f64),
    pub bw_range: (f64, f64),
    /// Mean arrivals per window.
    pub arrival_rate: f64,
    /// Mean lifetime in windows.
    pub mean_lifetime: f64,
    pub n_windows: u64,
    pub seed: u64,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        Self {
            size_class: SizeClass::Small,
            vn_edge_prob: 0.5,
            cpu_range: (0.0, 30.0),
            bw_range: (0.0, 30.0),
            arrival_rate: 5.0,
            mean_lifetime: 5.0,
            n_windows: 500,
            seed: 0,
        }
    }
}

impl WorkloadConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        out.extend(check_prob("vn_edge_prob", self.vn_edge_prob).err());
        out.extend(check_range("cpu_range", self.cpu_range).err());
        out.extend(check_range("bw_range", self.bw_range).err());
        if !(self.arrival_rate.is_finite() && self.arrival_rate > 0.0) {
            out.push(format!(
                "arrival_rate must be positive, got {}",
                self.arrival_rate
            ));
        }
        if !(self.mean_lifetime.is_finite() && self.mean_lifetime > 0.0) {
            out.push(format!(
                "mean_lifetime must be positive, got {}",
                self.mean_lifetime
            ));
        }
        if self.n_windows == 0 {
            out.push("n_windows must be at least 1".to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<(), NetgenError> {
        match self.violations().into_iter().next() {
            Some(v) => Err(NetgenError::InvalidConfig(v)),
            None => Ok(()),
        }
    }
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Places nodes on distinct grid cells and links node pairs at random,
/// redrawing links until the network is connected.
pub fn gen_substrate(cfg: &SubstrateGenConfig) -> Result<SubstrateNetwork, NetgenError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (rows, cols) = cfg.grid;
    let mut cells = index::sample(&mut rng, rows * cols, cfg.n_nodes).into_vec();
    cells.sort_unstable();
    let positions: Vec<(f64, f64)> = cells
        .iter()
        .map(|&c| ((c % cols) as f64, (c / cols) as f64))
        .collect();
    let cpus: Vec<f64> = (0..cfg.n_nodes)
        .map(|_| draw(&mut rng, cfg.cpu_range))
        .collect();
    let diagonal = ((rows * rows + cols * cols) as f64).sqrt();

    for _ in 0..MAX_RETRIES {
        let mut sn = SubstrateNetwork::new();
        for (cpu, pos) in cpus.iter().zip(&positions) {
            sn.add_node(*cpu, Some(*pos)).expect("validated capacity");
        }
        for i in 0..cfg.n_nodes {
            for j in i + 1..cfg.n_nodes {
                let p = match cfg.edge_model {
                    EdgeModel::Uniform => cfg.edge_prob,
                    EdgeModel::Waxman { beta } => {
                        let (xi, yi) = positions[i];
                        let (xj, yj) = positions[j];
                        let d = ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt();
                        cfg.edge_prob * (-d / (beta * diagonal)).exp()
                    }
                };
                if rng.random_bool(p) {
                    let bw = draw(&mut rng, cfg.bw_range);
                    sn.add_link(NodeId(i), NodeId(j), bw)
                        .expect("distinct valid endpoints");
                }
            }
        }
        if sn.is_connected() {
            return Ok(sn);
        }
    }
    Err(NetgenError::GenerationFailed {
        what: "substrate",
        attempts: MAX_RETRIES,
    })
}

fn gen_vnr(
    rng: &mut ChaCha8Rng,
    cfg: &WorkloadConfig,
    id: VnrId,
    arrival: u64,
    lifetime_dist: &Exp<f64>,
) -> Result<VirtualNetworkRequest, NetgenError> {
    let (lo, hi) = cfg.size_class.bounds();
    let n = rng.random_range(lo..=hi);
    let mut edges = Vec::new();
    let mut connected = false;
    for _ in 0..MAX_RETRIES {
        edges.clear();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(cfg.vn_edge_prob) {
                    edges.push((i, j));
                }
            }
        }
        if is_connected(n, &edges) {
            connected = true;
            break;
        }
    }
    if !connected {
        return Err(NetgenError::GenerationFailed {
            what: "virtual network",
            attempts: MAX_RETRIES,
        });
    }
    let lifetime = (lifetime_dist.sample(rng).ceil() as u64).max(1);
    let mut vnr = VirtualNetworkRequest::new(id, arrival, lifetime);
    for _ in 0..n {
        vnr.add_vnode(draw(rng, cfg.cpu_range))
            .expect("validated demand");
    }
    for (i, j) in edges {
        vnr.add_vlink(i, j, draw(rng, cfg.bw_range))
            .expect("valid endpoints");
    }
    Ok(vnr)
}

fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n <= 1 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &(a, b) in edges {
            let v = if a == u {
                b
            } else if b == u {
                a
            } else {
                continue;
            };
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}

/// Poisson arrivals per window with exponential lifetimes rounded up to whole windows.
pub fn gen_workload(cfg: &WorkloadConfig) -> Result<Vec<VirtualNetworkRequest>, NetgenError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let arrivals =
        Poisson::new(cfg.arrival_rate).map_err(|e| NetgenError::InvalidConfig(e.to_string()))?;
    let lifetimes =
        Exp::new(1.0 / cfg.mean_lifetime).map_err(|e| NetgenError::InvalidConfig(e.to_string()))?;
    let mut out = Vec::new();
    for window in 0..cfg.n_windows {
        let count = arrivals.sample(&mut rng) as u64;
        for _ in 0..count {
            let id = VnrId(out.len() as u64);
            out.push(gen_vnr(&mut rng, cfg, id, window, &lifetimes)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::text::{write_substrate, write_workload};

    #[test]
    fn default_substrate_uses_distinct_cells() {
        let sn = gen_substrate(&SubstrateGenConfig {
            seed: 7,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(sn.node_count(), 100);
        let mut cells: Vec<(i64, i64)> = sn
            .nodes()
            .iter()
            .map(|n| {
                let (x, y) = n.position.unwrap();
                (x as i64, y as i64)
            })
            .collect();
        cells.sort();
        cells.dedup();
        assert_eq!(cells.len(), 100);
        assert!(cells
            .iter()
            .all(|&(x, y)| (0..10).contains(&x) && (0..10).contains(&y)));
        assert!(sn.is_connected());
    }

    #[test]
    fn full_edge_probability_gives_complete_graph() {
        let sn = gen_substrate(&SubstrateGenConfig {
            n_nodes: 4,
            edge_prob: 1.0,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(sn.link_count(), 6);
    }

    #[test]
    fn substrate_is_deterministic_in_seed() {
        let cfg = SubstrateGenConfig {
            n_nodes: 30,
            seed: 99,
            ..Default::default()
        };
        let a = write_substrate(&gen_substrate(&cfg).unwrap());
        let b = write_substrate(&gen_substrate(&cfg).unwrap());
        assert_eq!(a, b);
        let c = write_substrate(&gen_substrate(&SubstrateGenConfig { seed: 100, ..cfg }).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn zero_edge_probability_fails_to_connect() {
        let err = gen_substrate(&SubstrateGenConfig {
            n_nodes: 3,
            edge_prob: 0.0,
            ..Default::default()
        })
        .unwrap_err();
        assert!(matches!(err, NetgenError::GenerationFailed { .. }));
    }

    #[test]
    fn waxman_mode_generates_connected_graph() {
        let sn = gen_substrate(&SubstrateGenConfig {
            n_nodes: 40,
            edge_model: EdgeModel::Waxman { beta: 0.4 },
            edge_prob: 0.9,
            seed: 3,
            ..Default::default()
        })
        .unwrap();
        assert!(sn.is_connected());
    }

    #[test]
    fn small_class_bounds_and_connectivity() {
        let vnrs = gen_workload(&WorkloadConfig {
            n_windows: 100,
            seed: 11,
            ..Default::default()
        })
        .unwrap();
        assert!(!vnrs.is_empty());
        for v in &vnrs {
            assert!((2..=10).contains(&v.vnodes.len()));
            assert!(v.is_connected());
            assert!(v.lifetime >= 1);
            assert!(v.vnodes.iter().all(|n| (0.0..=30.0).contains(&n.cpu)));
        }
        assert!(vnrs
            .windows(2)
            .all(|w| w[0].arrival_time <= w[1].arrival_time));
    }

    #[test]
    fn workload_is_deterministic_in_seed() {
        let cfg = WorkloadConfig {
            n_windows: 50,
            seed: 5,
            ..Default::default()
        };
        assert_eq!(
            write_workload(&gen_workload(&cfg).unwrap()),
            write_workload(&gen_workload(&cfg).unwrap())
        );
    }

    #[test]
    fn rejects_bad_configs() {
        let cfg = SubstrateGenConfig {
            n_nodes: 101,
            edge_prob: 1.5,
            ..Default::default()
        };
        assert_eq!(cfg.violations().len(), 2);
        let w = WorkloadConfig {
            arrival_rate: 0.0,
            cpu_range: (5.0, 1.0),
            ..Default::default()
        };
        assert_eq!(w.violations().len(), 2);
    }
}
