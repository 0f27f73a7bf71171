//! Capacitated substrate and virtual network model.
//!
//! All resource amounts (CPU units, bandwidth units) live on a dyadic grid of
//! [`RESOURCE_QUANTUM`]. Every value that enters the model is snapped to that
//! grid, so residual bookkeeping by addition and subtraction is exact in `f64`
//! and `allocate` followed by `release` restores residuals bit for bit.

mod path;
pub mod text;
mod verify;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use path::{
    hop_shortest_feasible_path, k_hop_shortest_paths, ltr, ltr_shortest_path, path_ltr, LtrBasis,
    LtrTable, PathTree,
};
pub use verify::{verify_embedding, VerifyReport, Violation};

/// Granularity of every stored resource amount (2^-16 units).
pub const RESOURCE_QUANTUM: f64 = 1.0 / 65536.0;

/// Snaps a resource amount onto the [`RESOURCE_QUANTUM`] grid.
///
/// Values up to 2^36 units keep every sum and difference exact.
pub fn quantize(value: f64) -> f64 {
    (value / RESOURCE_QUANTUM).round() * RESOURCE_QUANTUM
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LinkId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VnrId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for VnrId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("allocation of {vnr} is infeasible: {detail}")]
    InfeasibleAllocation { vnr: VnrId, detail: String },
    #[error("{0} is already allocated")]
    AlreadyAllocated(VnrId),
    #[error("{0} is not allocated (double release?)")]
    DoubleRelease(VnrId),
    #[error("total bandwidth over all substrate links is zero")]
    ZeroTotalBandwidth,
    #[error("no bandwidth-feasible path from node {src} to node {dst}")]
    NoFeasiblePath { src: NodeId, dst: NodeId },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("invalid link {id}: {detail}")]
    InvalidLink { id: usize, detail: String },
    #[error("invalid amount {0}: must be finite and non-negative")]
    InvalidAmount(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstrateNode {
    pub id: NodeId,
    pub cpu_total: f64,
    pub cpu_residual: f64,
    pub position: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstrateLink {
    pub id: LinkId,
    pub endpoints: (NodeId, NodeId),
    pub bw_total: f64,
    pub bw_residual: f64,
}

impl SubstrateLink {
    /// The endpoint opposite to `node`.
    pub fn other(&self, node: NodeId) -> NodeId {
        if self.endpoints.0 == node {
            self.endpoints.1
        } else {
            self.endpoints.0
        }
    }

    pub fn touches(&self, node: NodeId) -> bool {
        self.endpoints.0 == node || self.endpoints.1 == node
    }
}

/// Undirected substrate graph with residual CPU and bandwidth.
///
/// Node and link ids are dense indices (`NodeId(i)` is `nodes[i]`).
/// Parallel links between the same pair of nodes are allowed; self-loops are not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstrateNetwork {
    nodes: Vec<SubstrateNode>,
    links: Vec<SubstrateLink>,
    /// Incident links per node, sorted by (neighbor id, link id).
    adjacency: Vec<Vec<LinkId>>,
    live: BTreeSet<VnrId>,
}

impl Default for SubstrateNetwork {
    fn default() -> Self {
        Self::new()
    }
}

fn check_amount(value: f64) -> Result<f64, GraphError> {
    if value.is_finite() && value >= 0.0 {
        Ok(quantize(value))
    } else {
        Err(GraphError::InvalidAmount(value))
    }
}

impl SubstrateNetwork {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            links: Vec::new(),
            adjacency: Vec::new(),
            live: BTreeSet::new(),
        }
    }

    pub fn add_node(
        &mut self,
        cpu: f64,
        position: Option<(f64, f64)>,
    ) -> Result<NodeId, GraphError> {
        let cpu = check_amount(cpu)?;
        let id = NodeId(self.nodes.len());
        self.nodes.push(SubstrateNode {
            id,
            cpu_total: cpu,
            cpu_residual: cpu,
            position,
        });
        self.adjacency.push(Vec::new());
        Ok(id)
    }

    pub fn add_link(&mut self, u: NodeId, v: NodeId, bw: f64) -> Result<LinkId, GraphError> {
        let bw = check_amount(bw)?;
        let id = LinkId(self.links.len());
        if u == v {
            return Err(GraphError::InvalidLink {
                id: id.0,
                detail: format!("self-loop on node {u}"),
            });
        }
        for n in [u, v] {
            if n.0 >= self.nodes.len() {
                return Err(GraphError::InvalidLink {
                    id: id.0,
                    detail: format!("dangling endpoint {n}"),
                });
            }
        }
        let endpoints = if u < v { (u, v) } else { (v, u) };
        self.links.push(SubstrateLink {
            id,
            endpoints,
            bw_total: bw,
            bw_residual: bw,
        });
        for n in [u, v] {
            self.adjacency[n.0].push(id);
            let links = &self.links;
            self.adjacency[n.0].sort_by_key(|l| (links[l.0].other(n), *l));
        }
        Ok(id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> &[SubstrateNode] {
        &self.nodes
    }

    pub fn links(&self) -> &[SubstrateLink] {
        &self.links
    }

    pub fn node(&self, id: NodeId) -> &SubstrateNode {
        &self.nodes[id.0]
    }

    pub fn link(&self, id: LinkId) -> &SubstrateLink {
        &self.links[id.0]
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn incident(&self, node: NodeId) -> &[LinkId] {
        &self.adjacency[node.0]
    }

    /// Ids of VNRs currently holding resources on this network.
    pub fn live_vnrs(&self) -> &BTreeSet<VnrId> {
        &self.live
    }

    pub fn total_cpu(&self) -> f64 {
        self.nodes.iter().map(|n| n.cpu_total).sum()
    }

    pub fn total_bw(&self) -> f64 {
        self.links.iter().map(|l| l.bw_total).sum()
    }

    pub fn residual_bw_sum(&self) -> f64 {
        self.links.iter().map(|l| l.bw_residual).sum()
    }

    /// Overwrites residuals directly. Used by audits and tests to model corruption.
    pub fn set_cpu_residual(&mut self, node: NodeId, value: f64) {
        self.nodes[node.0].cpu_residual = value;
    }

    pub fn set_bw_residual(&mut self, link: LinkId, value: f64) {
        self.links[link.0].bw_residual = value;
    }

    /// Resets every residual to its total and forgets all live allocations.
    pub fn reset(&mut self) {
        for n in &mut self.nodes {
            n.cpu_residual = n.cpu_total;
        }
        for l in &mut self.links {
            l.bw_residual = l.bw_total;
        }
        self.live.clear();
    }

    /// True when every residual equals its total exactly.
    pub fn is_pristine(&self) -> bool {
        self.nodes.iter().all(|n| n.cpu_residual == n.cpu_total)
            && self.links.iter().all(|l| l.bw_residual == l.bw_total)
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![NodeId(0)];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &l in &self.adjacency[u.0] {
                let v = self.links[l.0].other(u);
                if !seen[v.0] {
                    seen[v.0] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.nodes.len()
    }

    /// Aggregated per-node CPU and per-link bandwidth demand of an embedding.
    #[allow(clippy::type_complexity)]
    fn demand(
        &self,
        vnr: &VirtualNetworkRequest,
        emb: &Embedding,
    ) -> Result<(Vec<(NodeId, f64)>, Vec<(LinkId, f64)>), GraphError> {
        if emb.node_map.len() != vnr.vnodes.len() || emb.link_map.len() != vnr.vlinks.len() {
            return Err(GraphError::InfeasibleAllocation {
                vnr: vnr.id,
                detail: "embedding does not cover the request".into(),
            });
        }
        let mut cpu = Vec::with_capacity(vnr.vnodes.len());
        for (vnode, &host) in vnr.vnodes.iter().zip(&emb.node_map) {
            if host.0 >= self.nodes.len() {
                return Err(GraphError::UnknownNode(host));
            }
            cpu.push((host, vnode.cpu));
        }
        let mut bw: Vec<(LinkId, f64)> = Vec::new();
        for (vlink, path) in vnr.vlinks.iter().zip(&emb.link_map) {
            for &l in &path.links {
                if l.0 >= self.links.len() {
                    return Err(GraphError::InvalidLink {
                        id: l.0,
                        detail: "unknown link in path".into(),
                    });
                }
                match bw.iter_mut().find(|(id, _)| *id == l) {
                    Some((_, amount)) => *amount += vlink.bw,
                    None => bw.push((l, vlink.bw)),
                }
            }
        }
        Ok((cpu, bw))
    }

    /// Reserves the resources of `emb` for `vnr`.
    ///
    /// Nothing is modified if any residual would go negative.
    pub fn allocate(
        &mut self,
        vnr: &VirtualNetworkRequest,
        emb: &Embedding,
    ) -> Result<(), GraphError> {
        if self.live.contains(&vnr.id) {
            return Err(GraphError::AlreadyAllocated(vnr.id));
        }
        let (cpu, bw) = self.demand(vnr, emb)?;
        let mut cpu_after = Vec::with_capacity(cpu.len());
        for (host, req) in &cpu {
            // several vnodes on one host is an injectivity bug, but keep the arithmetic honest
            let already: f64 = cpu_after
                .iter()
                .filter(|(h, _)| h == host)
                .map(|(_, r): &(NodeId, f64)| *r)
                .sum();
            let residual = self.nodes[host.0].cpu_residual - already;
            if residual < *req {
                return Err(GraphError::InfeasibleAllocation {
                    vnr: vnr.id,
                    detail: format!("node {host} has {residual} CPU, needs {req}"),
                });
            }
            cpu_after.push((*host, *req));
        }
        for (link, req) in &bw {
            let residual = self.links[link.0].bw_residual;
            if residual < *req {
                return Err(GraphError::InfeasibleAllocation {
                    vnr: vnr.id,
                    detail: format!("link {link} has {residual} bandwidth, needs {req}"),
                });
            }
        }
        for (host, req) in cpu {
            self.nodes[host.0].cpu_residual -= req;
        }
        for (link, req) in bw {
            self.links[link.0].bw_residual -= req;
        }
        self.live.insert(vnr.id);
        Ok(())
    }

    /// Returns the resources of a previously allocated embedding.
    pub fn release(
        &mut self,
        vnr: &VirtualNetworkRequest,
        emb: &Embedding,
    ) -> Result<(), GraphError> {
        if !self.live.contains(&vnr.id) {
            return Err(GraphError::DoubleRelease(vnr.id));
        }
        let (cpu, bw) = self.demand(vnr, emb)?;
        for (host, req) in cpu {
            self.nodes[host.0].cpu_residual += req;
        }
        for (link, req) in bw {
            self.links[link.0].bw_residual += req;
        }
        self.live.remove(&vnr.id);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualNode {
    pub cpu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualLink {
    pub endpoints: (usize, usize),
    pub bw: f64,
}

impl VirtualLink {
    pub fn other(&self, vnode: usize) -> usize {
        if self.endpoints.0 == vnode {
            self.endpoints.1
        } else {
            self.endpoints.0
        }
    }
}

/// A virtual network request. Virtual nodes and links are addressed by index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualNetworkRequest {
    pub id: VnrId,
    pub vnodes: Vec<VirtualNode>,
    pub vlinks: Vec<VirtualLink>,
    /// Window index of arrival.
    pub arrival_time: u64,
    /// Service duration in windows, at least 1.
    pub lifetime: u64,
    pub deferral_count: u32,
}

impl VirtualNetworkRequest {
    pub fn new(id: VnrId, arrival_time: u64, lifetime: u64) -> Self {
        Self {
            id,
            vnodes: Vec::new(),
            vlinks: Vec::new(),
            arrival_time,
            lifetime,
            deferral_count: 0,
        }
    }

    pub fn add_vnode(&mut self, cpu: f64) -> Result<usize, GraphError> {
        let cpu = check_amount(cpu)?;
        self.vnodes.push(VirtualNode { cpu });
        Ok(self.vnodes.len() - 1)
    }

    pub fn add_vlink(&mut self, a: usize, b: usize, bw: f64) -> Result<usize, GraphError> {
        let bw = check_amount(bw)?;
        let id = self.vlinks.len();
        if a == b {
            return Err(GraphError::InvalidLink {
                id,
                detail: format!("self-loop on vnode {a}"),
            });
        }
        if a >= self.vnodes.len() || b >= self.vnodes.len() {
            return Err(GraphError::InvalidLink {
                id,
                detail: "dangling virtual endpoint".into(),
            });
        }
        self.vlinks.push(VirtualLink {
            endpoints: (a.min(b), a.max(b)),
            bw,
        });
        Ok(id)
    }

    /// Indices of vlinks incident to `vnode`.
    pub fn incident(&self, vnode: usize) -> impl Iterator<Item = usize> + '_ {
        self.vlinks
            .iter()
            .enumerate()
            .filter(move |(_, l)| l.endpoints.0 == vnode || l.endpoints.1 == vnode)
            .map(|(i, _)| i)
    }

    pub fn degree(&self, vnode: usize) -> usize {
        self.incident(vnode).count()
    }

    pub fn total_cpu(&self) -> f64 {
        self.vnodes.iter().map(|n| n.cpu).sum()
    }

    pub fn total_bw(&self) -> f64 {
        self.vlinks.iter().map(|l| l.bw).sum()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vnodes.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for l in &self.vlinks {
                if l.endpoints.0 == u || l.endpoints.1 == u {
                    let v = l.other(u);
                    if !seen[v] {
                        seen[v] = true;
                        count += 1;
                        stack.push(v);
                    }
                }
            }
        }
        count == n
    }
}

/// A loop-free walk through the substrate.
///
/// `nodes` has exactly one more entry than `links`; a path between identical
/// endpoints is a single node with no links.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
}

impl Path {
    pub fn trivial(node: NodeId) -> Self {
        Self {
            nodes: vec![node],
            links: Vec::new(),
        }
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn target(&self) -> NodeId {
        *self.nodes.last().expect("path has at least one node")
    }

    pub fn hops(&self) -> usize {
        self.links.len()
    }

    pub fn reversed(&self) -> Self {
        Self {
            nodes: self.nodes.iter().rev().copied().collect(),
            links: self.links.iter().rev().copied().collect(),
        }
    }

    /// Smallest residual bandwidth along the path (infinite for a trivial path).
    pub fn bottleneck(&self, sn: &SubstrateNetwork) -> f64 {
        self.links
            .iter()
            .map(|&l| sn.link(l).bw_residual)
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks that the path is a simple walk in `sn`.
    pub fn is_valid_in(&self, sn: &SubstrateNetwork) -> bool {
        if self.nodes.len() != self.links.len() + 1 {
            return false;
        }
        if self.nodes.iter().any(|n| n.0 >= sn.node_count())
            || self.links.iter().any(|l| l.0 >= sn.link_count())
        {
            return false;
        }
        let distinct: BTreeSet<_> = self.nodes.iter().collect();
        if distinct.len() != self.nodes.len() {
            return false;
        }
        self.links.iter().enumerate().all(|(i, &l)| {
            let link = sn.link(l);
            let (a, b) = (self.nodes[i], self.nodes[i + 1]);
            link.touches(a) && link.other(a) == b
        })
    }
}

/// Mapping of one VNR onto the substrate.
///
/// `node_map[i]` hosts vnode `i`; `link_map[j]` carries vlink `j` and runs
/// from the host of the vlink's first endpoint to the host of its second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub vnr_id: VnrId,
    pub node_map: Vec<NodeId>,
    pub link_map: Vec<Path>,
    pub embed_time: u64,
    pub expiry_time: u64,
}

impl Embedding {
    /// Served duration in windows.
    pub fn duration(&self) -> u64 {
        self.expiry_time - self.embed_time
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_hop() -> (SubstrateNetwork, VirtualNetworkRequest, Embedding) {
        let mut sn = SubstrateNetwork::new();
        let s = sn.add_node(10.0, None).unwrap();
        let a = sn.add_node(10.0, None).unwrap();
        let d = sn.add_node(10.0, None).unwrap();
        let l0 = sn.add_link(s, a, 9.0).unwrap();
        let l1 = sn.add_link(a, d, 7.0).unwrap();
        let mut vnr = VirtualNetworkRequest::new(VnrId(1), 0, 3);
        vnr.add_vnode(6.0).unwrap();
        vnr.add_vnode(2.0).unwrap();
        vnr.add_vlink(0, 1, 4.0).unwrap();
        let emb = Embedding {
            vnr_id: VnrId(1),
            node_map: vec![s, d],
            link_map: vec![Path {
                nodes: vec![s, a, d],
                links: vec![l0, l1],
            }],
            embed_time: 0,
            expiry_time: 3,
        };
        (sn, vnr, emb)
    }

    #[test]
    fn allocate_subtracts_cpu_and_bandwidth() {
        let (mut sn, vnr, emb) = two_hop();
        sn.allocate(&vnr, &emb).unwrap();
        assert_eq!(sn.node(NodeId(0)).cpu_residual, 4.0);
        assert_eq!(sn.node(NodeId(2)).cpu_residual, 8.0);
        assert_eq!(sn.link(LinkId(0)).bw_residual, 5.0);
        assert_eq!(sn.link(LinkId(1)).bw_residual, 3.0);
    }

    #[test]
    fn allocate_rejects_cpu_overdraw_without_side_effects() {
        let (mut sn, vnr, emb) = two_hop();
        sn.set_cpu_residual(NodeId(0), 5.0);
        let before = sn.clone();
        let err = sn.allocate(&vnr, &emb).unwrap_err();
        assert!(matches!(err, GraphError::InfeasibleAllocation { .. }));
        assert_eq!(sn, before);
    }

    #[test]
    fn shared_link_demand_is_summed() {
        let mut sn = SubstrateNetwork::new();
        for _ in 0..3 {
            sn.add_node(10.0, None).unwrap();
        }
        let l = sn.add_link(NodeId(0), NodeId(1), 6.0).unwrap();
        let l2 = sn.add_link(NodeId(1), NodeId(2), 6.0).unwrap();
        let mut vnr = VirtualNetworkRequest::new(VnrId(0), 0, 1);
        for _ in 0..3 {
            vnr.add_vnode(1.0).unwrap();
        }
        vnr.add_vlink(0, 1, 4.0).unwrap();
        vnr.add_vlink(0, 2, 4.0).unwrap();
        let emb = Embedding {
            vnr_id: VnrId(0),
            node_map: vec![NodeId(0), NodeId(1), NodeId(2)],
            link_map: vec![
                Path {
                    nodes: vec![NodeId(0), NodeId(1)],
                    links: vec![l],
                },
                Path {
                    nodes: vec![NodeId(0), NodeId(1), NodeId(2)],
                    links: vec![l, l2],
                },
            ],
            embed_time: 0,
            expiry_time: 1,
        };
        assert!(matches!(
            sn.allocate(&vnr, &emb),
            Err(GraphError::InfeasibleAllocation { .. })
        ));
    }

    #[test]
    fn release_restores_and_detects_double_release() {
        let (mut sn, vnr, emb) = two_hop();
        let before = sn.clone();
        assert_eq!(
            sn.release(&vnr, &emb),
            Err(GraphError::DoubleRelease(VnrId(1)))
        );
        sn.allocate(&vnr, &emb).unwrap();
        sn.release(&vnr, &emb).unwrap();
        assert_eq!(sn, before);
        assert_eq!(
            sn.release(&vnr, &emb),
            Err(GraphError::DoubleRelease(VnrId(1)))
        );
    }

    #[test]
    fn interleaved_release_restores_initial_state() {
        let (mut sn, vnr_a, emb_a) = two_hop();
        let mut vnr_b = vnr_a.clone();
        vnr_b.id = VnrId(2);
        vnr_b.vnodes[0].cpu = 1.5;
        vnr_b.vlinks[0].bw = 0.25;
        let mut emb_b = emb_a.clone();
        emb_b.vnr_id = VnrId(2);
        let before = sn.clone();
        sn.allocate(&vnr_a, &emb_a).unwrap();
        sn.allocate(&vnr_b, &emb_b).unwrap();
        sn.release(&vnr_a, &emb_a).unwrap();
        sn.release(&vnr_b, &emb_b).unwrap();
        assert_eq!(sn, before);
        assert!(sn.is_pristine());
    }

    #[test]
    fn quantize_snaps_to_grid() {
        assert_eq!(quantize(10.0), 10.0);
        let q = quantize(0.1);
        assert!((q - 0.1).abs() <= RESOURCE_QUANTUM / 2.0);
        assert_eq!(q / RESOURCE_QUANTUM, (q / RESOURCE_QUANTUM).round());
    }

    #[test]
    fn rejects_self_loops_and_dangling_links() {
        let mut sn = SubstrateNetwork::new();
        let a = sn.add_node(1.0, None).unwrap();
        assert!(sn.add_link(a, a, 1.0).is_err());
        assert!(sn.add_link(a, NodeId(5), 1.0).is_err());
        assert!(sn.add_node(-1.0, None).is_err());
    }

    #[test]
    fn path_validity() {
        let (sn, _, emb) = two_hop();
        assert!(emb.link_map[0].is_valid_in(&sn));
        assert!(emb.link_map[0].reversed().is_valid_in(&sn));
        let bad = Path {
            nodes: vec![NodeId(0), NodeId(2)],
            links: vec![LinkId(0)],
        };
        assert!(!bad.is_valid_in(&sn));
    }
}
