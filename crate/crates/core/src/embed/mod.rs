//! Embedding algorithms behind one interface.
//!
//! * [`RtVne`]: coordinated node and link mapping driven by the
//!   link-traffic-ratio, trying the best `x_candidates` substrate roots.
//! * [`GreedySp`]: greedy node mapping, then k-hop-shortest-path link mapping.
//! * [`ClusterCenter`]: ranks substrate nodes by hop distance from the
//!   resource-richest node and assigns high-degree vnodes first.

mod ccvne;
mod gsp;
mod rtvne;

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    Embedding, GraphError, LtrBasis, LtrTable, NodeId, Path, SubstrateNetwork,
    VirtualNetworkRequest,
};

pub use ccvne::{ccvne_embed, ClusterCenter};
pub use gsp::{gsp_embed, GreedySp};
pub use rtvne::{rtvne_embed, RtVne};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbedderConfig {
    /// Weight of bandwidth relative to CPU in capacity scores and revenue.
    pub psi: f64,
    /// Number of substrate root candidates RT-VNE tries per request.
    pub x_candidates: usize,
    /// Number of hop-shortest paths G-SP considers per virtual link.
    pub k_paths: usize,
    pub ltr_basis: LtrBasis,
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        Self {
            psi: 1.0,
            x_candidates: 9,
            k_paths: 4,
            ltr_basis: LtrBasis::Residual,
        }
    }
}

impl EmbedderConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.psi.is_finite() && self.psi >= 0.0) {
            return Err(format!(
                "psi must be a non-negative number, got {}",
                self.psi
            ));
        }
        if self.x_candidates == 0 {
            return Err("x_candidates must be at least 1".into());
        }
        if self.k_paths == 0 {
            return Err("k_paths must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RejectReason {
    /// No substrate node can host this vnode.
    NodeMapping { vnode: usize },
    /// No bandwidth-feasible path for this vlink.
    LinkMapping { vlink: usize },
    /// Every root candidate failed.
    NoFeasibleCandidate { tried: usize },
    /// The substrate has no bandwidth left to route anything.
    ZeroBandwidth,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NodeMapping { vnode } => write!(f, "no host for vnode {vnode}"),
            Self::LinkMapping { vlink } => write!(f, "no path for vlink {vlink}"),
            Self::NoFeasibleCandidate { tried } => write!(f, "all {tried} candidates infeasible"),
            Self::ZeroBandwidth => write!(f, "substrate bandwidth exhausted"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    Accepted(Embedding),
    Rejected(RejectReason),
}

/// Diagnostics for one root candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateTrace {
    pub root: NodeId,
    pub feasible: bool,
    /// Accumulated placement score (lower is better), when feasible.
    pub score: Option<f64>,
    pub failure: Option<RejectReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedResult {
    pub outcome: Outcome,
    pub candidate_trace: Vec<CandidateTrace>,
}

impl EmbedResult {
    fn rejected(reason: RejectReason) -> Self {
        Self {
            outcome: Outcome::Rejected(reason),
            candidate_trace: Vec::new(),
        }
    }

    pub fn embedding(&self) -> Option<&Embedding> {
        match &self.outcome {
            Outcome::Accepted(e) => Some(e),
            Outcome::Rejected(_) => None,
        }
    }

    pub fn is_accepted(&self) -> bool {
        matches!(self.outcome, Outcome::Accepted(_))
    }
}

/// An online embedding algorithm.
///
/// Implementations must not mutate `sn`; the caller allocates an accepted
/// embedding. Returned embeddings carry `embed_time == expiry_time == 0`.
pub trait Embedder: Send + Sync {
    fn name(&self) -> &'static str;
    fn embed(&self, sn: &SubstrateNetwork, vnr: &VirtualNetworkRequest) -> EmbedResult;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EmbedderKind {
    #[serde(rename = "rt-vne")]
    RtVne,
    #[serde(rename = "g-sp")]
    GreedySp,
    #[serde(rename = "cc-vne")]
    ClusterCenter,
}

impl EmbedderKind {
    pub const ALL: [EmbedderKind; 3] = [Self::RtVne, Self::GreedySp, Self::ClusterCenter];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::RtVne => "rt-vne",
            Self::GreedySp => "g-sp",
            Self::ClusterCenter => "cc-vne",
        }
    }

    pub fn build(self, cfg: EmbedderConfig) -> Box<dyn Embedder> {
        match self {
            Self::RtVne => Box::new(RtVne::new(cfg)),
            Self::GreedySp => Box::new(GreedySp::new(cfg)),
            Self::ClusterCenter => Box::new(ClusterCenter::new(cfg)),
        }
    }
}

impl fmt::Display for EmbedderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmbedderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown embedder `{s}` (expected rt-vne, g-sp or cc-vne)"))
    }
}

/// Looks up an embedder by its registry name.
pub fn embedder_by_name(name: &str, cfg: EmbedderConfig) -> Option<Box<dyn Embedder>> {
    name.parse::<EmbedderKind>().ok().map(|k| k.build(cfg))
}

/// CPU demand plus `psi`-weighted bandwidth demand of incident vlinks.
pub fn vn_node_capacity(vnr: &VirtualNetworkRequest, vnode: usize, psi: f64) -> f64 {
    let bw: f64 = vnr.incident(vnode).map(|l| vnr.vlinks[l].bw).sum();
    vnr.vnodes[vnode].cpu + psi * bw
}

/// Residual CPU plus `psi`-weighted residual bandwidth of incident links.
pub fn sn_node_capacity(sn: &SubstrateNetwork, node: NodeId, psi: f64) -> f64 {
    let bw: f64 = sn
        .incident(node)
        .iter()
        .map(|&l| sn.link(l).bw_residual)
        .sum();
    sn.node(node).cpu_residual + psi * bw
}

/// Hop distance of every vnode from `root` (`usize::MAX` if unreachable).
fn vnode_hops(vnr: &VirtualNetworkRequest, root: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; vnr.vnodes.len()];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for l in vnr.incident(u) {
            let v = vnr.vlinks[l].other(u);
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Embedding sequence: the highest-capacity vnode first, then the rest by
/// BFS hop distance from it (ties: higher capacity, then lower index).
pub fn order_vnodes(vnr: &VirtualNetworkRequest, psi: f64) -> Vec<usize> {
    if vnr.vnodes.is_empty() {
        return Vec::new();
    }
    let caps: Vec<f64> = (0..vnr.vnodes.len())
        .map(|v| vn_node_capacity(vnr, v, psi))
        .collect();
    let parent = (0..caps.len())
        .min_by(|&a, &b| caps[b].total_cmp(&caps[a]).then(a.cmp(&b)))
        .expect("non-empty");
    let hops = vnode_hops(vnr, parent);
    let mut order: Vec<usize> = (0..caps.len()).collect();
    order.sort_by(|&a, &b| {
        (a != parent)
            .cmp(&(b != parent))
            .then(hops[a].cmp(&hops[b]))
            .then(caps[b].total_cmp(&caps[a]))
            .then(a.cmp(&b))
    });
    order
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("candidate cannot reach mapped neighbor {neighbor} with {bw} bandwidth")]
    CandidateInfeasible { neighbor: NodeId, bw: f64 },
}

/// Bandwidth-weighted link-traffic-ratio cost of placing a vnode on `candidate`,
/// given the hosts of its already-mapped neighbors and the bandwidth of the
/// connecting vlinks. Each term routes on the minimum-Ltr feasible path.
pub fn score_candidate(
    sn: &SubstrateNetwork,
    candidate: NodeId,
    mapped_neighbors: &[(NodeId, f64)],
) -> Result<f64, ScoreError> {
    if mapped_neighbors.is_empty() {
        return Ok(0.0);
    }
    let table =
        LtrTable::new(sn, LtrBasis::Residual).map_err(|_| ScoreError::CandidateInfeasible {
            neighbor: mapped_neighbors[0].0,
            bw: mapped_neighbors[0].1,
        })?;
    let tree_costs = mapped_neighbors.iter().map(|&(neighbor, bw)| {
        let cost = if neighbor == candidate {
            Some(0.0)
        } else {
            table.tree(sn, candidate, bw).cost(neighbor)
        };
        cost.map(|c| (bw, c))
            .ok_or(ScoreError::CandidateInfeasible { neighbor, bw })
    });
    let terms: Vec<(f64, f64)> = tree_costs.collect::<Result<_, _>>()?;
    Ok(weighted_ltr_sum(&terms))
}

/// Σ bandwidth × path Ltr.
pub fn weighted_ltr_sum(terms: &[(f64, f64)]) -> f64 {
    terms.iter().fold(0.0, |acc, (bw, ltr)| acc + bw * ltr)
}

/// Subtracts `bw` from every link of `path` if all of them can carry it.
fn reserve_path(work: &mut SubstrateNetwork, path: &Path, bw: f64) -> bool {
    if path.links.iter().any(|&l| work.link(l).bw_residual < bw) {
        return false;
    }
    for &l in &path.links {
        let r = work.link(l).bw_residual;
        work.set_bw_residual(l, r - bw);
    }
    true
}

fn unreserve_path(work: &mut SubstrateNetwork, path: &Path, bw: f64) {
    for &l in &path.links {
        let r = work.link(l).bw_residual;
        work.set_bw_residual(l, r + bw);
    }
}

fn reserve_cpu(work: &mut SubstrateNetwork, node: NodeId, cpu: f64) {
    let r = work.node(node).cpu_residual;
    work.set_cpu_residual(node, r - cpu);
}

/// Orients a path so it runs from the host of the vlink's first endpoint.
fn orient(path: Path, from: NodeId) -> Path {
    if path.source() == from {
        path
    } else {
        path.reversed()
    }
}

fn ltr_table(sn: &SubstrateNetwork, basis: LtrBasis) -> Result<LtrTable, RejectReason> {
    LtrTable::new(sn, basis).map_err(|e| match e {
        GraphError::ZeroTotalBandwidth => RejectReason::ZeroBandwidth,
        _ => unreachable!("ltr table construction only fails on zero bandwidth"),
    })
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::graph::VnrId;

    #[test]
    fn vn_node_capacity_of_triangle() {
        let vnr = triangle_vnr();
        assert_eq!(vn_node_capacity(&vnr, 0, 1.0), 15.0);
        assert_eq!(vn_node_capacity(&vnr, 1, 1.0), 9.0);
        assert_eq!(vn_node_capacity(&vnr, 2, 1.0), 10.0);
        let mut lone = VirtualNetworkRequest::new(VnrId(1), 0, 1);
        lone.add_vnode(7.0).unwrap();
        assert_eq!(vn_node_capacity(&lone, 0, 3.5), 7.0);
    }

    #[test]
    fn sn_node_capacity_sums_incident_residuals() {
        let mut sn = SubstrateNetwork::new();
        let hub = sn.add_node(10.0, None).unwrap();
        for bw in [5.0, 7.0, 9.0, 6.0] {
            let leaf = sn.add_node(1.0, None).unwrap();
            sn.add_link(hub, leaf, bw).unwrap();
        }
        assert_eq!(sn_node_capacity(&sn, hub, 1.0), 37.0);
        assert_eq!(sn_node_capacity(&sn, hub, 0.0), 10.0);
        let lone = sn.add_node(12.0, None).unwrap();
        assert_eq!(sn_node_capacity(&sn, lone, 1.0), 12.0);
    }

    #[test]
    fn order_follows_capacity_then_hops() {
        assert_eq!(order_vnodes(&triangle_vnr(), 1.0), vec![0, 2, 1]);

        let mut single = VirtualNetworkRequest::new(VnrId(1), 0, 1);
        single.add_vnode(1.0).unwrap();
        assert_eq!(order_vnodes(&single, 1.0), vec![0]);

        // u-v-w with capacities 20, 5, 5
        let mut line = VirtualNetworkRequest::new(VnrId(2), 0, 1);
        line.add_vnode(19.0).unwrap();
        line.add_vnode(3.0).unwrap();
        line.add_vnode(4.0).unwrap();
        line.add_vlink(0, 1, 1.0).unwrap();
        line.add_vlink(1, 2, 1.0).unwrap();
        assert_eq!(order_vnodes(&line, 1.0), vec![0, 1, 2]);
    }

    #[test]
    fn score_reproduces_worked_values() {
        let sn = worked_substrate();
        let neighbors = [(NodeId(5), 2.0), (NodeId(3), 4.0)];
        let s1 = score_candidate(&sn, NodeId(1), &neighbors).unwrap();
        let s2 = score_candidate(&sn, NodeId(2), &neighbors).unwrap();
        let s4 = score_candidate(&sn, NodeId(4), &neighbors).unwrap();
        assert!((s1 - 0.768).abs() <= 1e-12, "{s1}");
        assert!((s2 - 0.98).abs() <= 1e-12, "{s2}");
        assert!((s4 - 0.64).abs() <= 1e-12, "{s4}");
        assert_eq!(score_candidate(&sn, NodeId(1), &[]).unwrap(), 0.0);
    }

    #[test]
    fn weighted_sum_of_quoted_path_ratios() {
        assert!((weighted_ltr_sum(&[(2.0, 0.084), (4.0, 0.15)]) - 0.768).abs() <= 1e-12);
        assert!((weighted_ltr_sum(&[(2.0, 0.13 + 0.1), (4.0, 0.13)]) - 0.98).abs() <= 1e-12);
        assert!((weighted_ltr_sum(&[(2.0, 0.1), (4.0, 0.11)]) - 0.64).abs() <= 1e-12);
    }

    #[test]
    fn unreachable_candidate_is_infeasible() {
        let mut sn = worked_substrate();
        let isolated = sn.add_node(10.0, None).unwrap();
        assert!(matches!(
            score_candidate(&sn, isolated, &[(NodeId(3), 1.0)]),
            Err(ScoreError::CandidateInfeasible { .. })
        ));
    }

    #[test]
    fn registry_resolves_names() {
        for kind in EmbedderKind::ALL {
            let e = embedder_by_name(kind.as_str(), EmbedderConfig::default()).unwrap();
            assert_eq!(e.name(), kind.as_str());
        }
        assert!(embedder_by_name("d-vine", EmbedderConfig::default()).is_none());
    }
}
