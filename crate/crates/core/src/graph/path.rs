//! Link-traffic-ratio weights and path search.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{GraphError, LinkId, NodeId, Path, SubstrateNetwork};

/// Which bandwidth figure feeds the link-traffic-ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LtrBasis {
    /// Currently unallocated bandwidth.
    #[default]
    Residual,
    /// Installed bandwidth.
    Total,
}

impl std::str::FromStr for LtrBasis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "residual" => Ok(Self::Residual),
            "total" => Ok(Self::Total),
            other => Err(format!(
                "unknown ltr basis `{other}` (expected residual|total)"
            )),
        }
    }
}

/// Link-traffic-ratio of every substrate link, frozen at construction time.
#[derive(Debug, Clone, PartialEq)]
pub struct LtrTable {
    weights: Vec<f64>,
}

impl LtrTable {
    pub fn new(sn: &SubstrateNetwork, basis: LtrBasis) -> Result<Self, GraphError> {
        let amount = |l: &super::SubstrateLink| match basis {
            LtrBasis::Residual => l.bw_residual,
            LtrBasis::Total => l.bw_total,
        };
        let total: f64 = sn.links().iter().map(amount).sum();
        if total <= 0.0 {
            return Err(GraphError::ZeroTotalBandwidth);
        }
        Ok(Self {
            weights: sn.links().iter().map(|l| amount(l) / total).collect(),
        })
    }

    pub fn weight(&self, link: LinkId) -> f64 {
        self.weights[link.0]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sum of link weights along `path`, accumulated from its source.
    pub fn path_cost(&self, path: &Path) -> f64 {
        path.links
            .iter()
            .fold(0.0, |acc, l| acc + self.weights[l.0])
    }

    /// Single-source minimum-Ltr tree over links with `bw_residual >= min_bw`.
    pub fn tree(&self, sn: &SubstrateNetwork, src: NodeId, min_bw: f64) -> PathTree {
        PathTree::build(sn, self, src, min_bw)
    }

    pub fn shortest_path(
        &self,
        sn: &SubstrateNetwork,
        src: NodeId,
        dst: NodeId,
        min_bw: f64,
    ) -> Result<Path, GraphError> {
        for n in [src, dst] {
            if n.0 >= sn.node_count() {
                return Err(GraphError::UnknownNode(n));
            }
        }
        self.tree(sn, src, min_bw)
            .path_to(dst)
            .ok_or(GraphError::NoFeasiblePath { src, dst })
    }
}

/// Link-traffic-ratio of one link: its residual bandwidth over the residual sum.
pub fn ltr(sn: &SubstrateNetwork, link: LinkId) -> Result<f64, GraphError> {
    let total = sn.residual_bw_sum();
    if total <= 0.0 {
        return Err(GraphError::ZeroTotalBandwidth);
    }
    Ok(sn.link(link).bw_residual / total)
}

pub fn path_ltr(sn: &SubstrateNetwork, path: &Path) -> Result<f64, GraphError> {
    if path.links.is_empty() {
        return Ok(0.0);
    }
    Ok(LtrTable::new(sn, LtrBasis::Residual)?.path_cost(path))
}

/// Minimum-Ltr path from `src` to `dst` using only links with at least `min_bw` residual.
pub fn ltr_shortest_path(
    sn: &SubstrateNetwork,
    src: NodeId,
    dst: NodeId,
    min_bw: f64,
) -> Result<Path, GraphError> {
    if src == dst {
        return Ok(Path::trivial(src));
    }
    let table = match LtrTable::new(sn, LtrBasis::Residual) {
        Ok(t) => t,
        Err(GraphError::ZeroTotalBandwidth) => return Err(GraphError::NoFeasiblePath { src, dst }),
        Err(e) => return Err(e),
    };
    table.shortest_path(sn, src, dst, min_bw)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    cost: f64,
    hops: usize,
    node: NodeId,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (cost, hops, node)
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.hops.cmp(&self.hops))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest-path tree produced by Dijkstra on Ltr weights.
///
/// Ties on cost are broken by fewer hops, then by the lexicographically
/// smallest node sequence, then by link ids.
#[derive(Debug, Clone)]
pub struct PathTree {
    src: NodeId,
    cost: Vec<f64>,
    hops: Vec<usize>,
    pred: Vec<Option<(NodeId, LinkId)>>,
}

impl PathTree {
    fn build(sn: &SubstrateNetwork, table: &LtrTable, src: NodeId, min_bw: f64) -> Self {
        let n = sn.node_count();
        let mut tree = Self {
            src,
            cost: vec![f64::INFINITY; n],
            hops: vec![usize::MAX; n],
            pred: vec![None; n],
        };
        let mut settled = vec![false; n];
        let mut heap = BinaryHeap::new();
        tree.cost[src.0] = 0.0;
        tree.hops[src.0] = 0;
        heap.push(HeapEntry {
            cost: 0.0,
            hops: 0,
            node: src,
        });

        while let Some(HeapEntry {
            cost,
            hops,
            node: u,
        }) = heap.pop()
        {
            if settled[u.0] || cost != tree.cost[u.0] || hops != tree.hops[u.0] {
                continue;
            }
            settled[u.0] = true;
            for &l in sn.incident(u) {
                let link = sn.link(l);
                if link.bw_residual < min_bw {
                    continue;
                }
                let v = link.other(u);
                if settled[v.0] {
                    continue;
                }
                let new_cost = cost + table.weight(l);
                let new_hops = hops + 1;
                let order = new_cost
                    .total_cmp(&tree.cost[v.0])
                    .then(new_hops.cmp(&tree.hops[v.0]));
                let better = match order {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => tree.sequence_key(u, l) < tree.sequence_key_of(v),
                };
                if better {
                    tree.cost[v.0] = new_cost;
                    tree.hops[v.0] = new_hops;
                    tree.pred[v.0] = Some((u, l));
                    if order != Ordering::Equal {
                        heap.push(HeapEntry {
                            cost: new_cost,
                            hops: new_hops,
                            node: v,
                        });
                    }
                }
            }
        }
        tree
    }

    fn trace(&self, mut v: NodeId) -> (Vec<NodeId>, Vec<LinkId>) {
        let mut nodes = vec![v];
        let mut links = Vec::new();
        while let Some((u, l)) = self.pred[v.0] {
            nodes.push(u);
            links.push(l);
            v = u;
        }
        nodes.reverse();
        links.reverse();
        (nodes, links)
    }

    /// Key of the path reaching `u` and then following link `l`.
    fn sequence_key(&self, u: NodeId, l: LinkId) -> (Vec<NodeId>, Vec<LinkId>) {
        let (nodes, mut links) = self.trace(u);
        links.push(l);
        (nodes, links)
    }

    fn sequence_key_of(&self, v: NodeId) -> (Vec<NodeId>, Vec<LinkId>) {
        let (mut nodes, links) = self.trace(v);
        nodes.pop();
        (nodes, links)
    }

    pub fn source(&self) -> NodeId {
        self.src
    }

    /// Total Ltr of the best path to `dst`, if reachable.
    pub fn cost(&self, dst: NodeId) -> Option<f64> {
        let c = self.cost[dst.0];
        c.is_finite().then_some(c)
    }

    pub fn path_to(&self, dst: NodeId) -> Option<Path> {
        self.cost(dst)?;
        let (nodes, links) = self.trace(dst);
        Some(Path { nodes, links })
    }
}

fn bfs_path(
    sn: &SubstrateNetwork,
    src: NodeId,
    dst: NodeId,
    min_bw: Option<f64>,
    banned_nodes: &BTreeSet<NodeId>,
    banned_links: &BTreeSet<LinkId>,
) -> Option<Path> {
    if banned_nodes.contains(&src) {
        return None;
    }
    if src == dst {
        return Some(Path::trivial(src));
    }
    let mut pred: Vec<Option<(NodeId, LinkId)>> = vec![None; sn.node_count()];
    let mut seen = vec![false; sn.node_count()];
    seen[src.0] = true;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for &l in sn.incident(u) {
            if banned_links.contains(&l) {
                continue;
            }
            let link = sn.link(l);
            if min_bw.is_some_and(|bw| link.bw_residual < bw) {
                continue;
            }
            let v = link.other(u);
            if seen[v.0] || banned_nodes.contains(&v) {
                continue;
            }
            seen[v.0] = true;
            pred[v.0] = Some((u, l));
            if v == dst {
                let mut nodes = vec![v];
                let mut links = Vec::new();
                let mut cur = v;
                while let Some((p, pl)) = pred[cur.0] {
                    nodes.push(p);
                    links.push(pl);
                    cur = p;
                }
                nodes.reverse();
                links.reverse();
                return Some(Path { nodes, links });
            }
            queue.push_back(v);
        }
    }
    None
}

/// Fewest-hop path over links with `bw_residual >= min_bw`.
pub fn hop_shortest_feasible_path(
    sn: &SubstrateNetwork,
    src: NodeId,
    dst: NodeId,
    min_bw: f64,
) -> Result<Path, GraphError> {
    bfs_path(
        sn,
        src,
        dst,
        Some(min_bw),
        &BTreeSet::new(),
        &BTreeSet::new(),
    )
    .ok_or(GraphError::NoFeasiblePath { src, dst })
}

type PathKey = (usize, Vec<NodeId>, Vec<LinkId>);

fn key(p: &Path) -> PathKey {
    (p.hops(), p.nodes.clone(), p.links.clone())
}

/// Up to `k` loopless paths in increasing hop count (Yen's algorithm),
/// ignoring bandwidth.
pub fn k_hop_shortest_paths(
    sn: &SubstrateNetwork,
    src: NodeId,
    dst: NodeId,
    k: usize,
) -> Vec<Path> {
    let (no_nodes, no_links) = (BTreeSet::new(), BTreeSet::new());
    let Some(first) = bfs_path(sn, src, dst, None, &no_nodes, &no_links) else {
        return Vec::new();
    };
    let mut accepted = vec![first];
    let mut candidates: BTreeSet<PathKey> = BTreeSet::new();
    while accepted.len() < k {
        let prev = accepted.last().expect("non-empty").clone();
        for i in 0..prev.hops() {
            let spur = prev.nodes[i];
            let root_nodes = &prev.nodes[..=i];
            let root_links = &prev.links[..i];
            let banned_links: BTreeSet<LinkId> = accepted
                .iter()
                .filter(|p| {
                    p.hops() > i && &p.nodes[..=i] == root_nodes && &p.links[..i] == root_links
                })
                .map(|p| p.links[i])
                .collect();
            let banned_nodes: BTreeSet<NodeId> = root_nodes[..i].iter().copied().collect();
            if let Some(spur_path) = bfs_path(sn, spur, dst, None, &banned_nodes, &banned_links) {
                let mut nodes = root_nodes.to_vec();
                nodes.extend_from_slice(&spur_path.nodes[1..]);
                let mut links = root_links.to_vec();
                links.extend_from_slice(&spur_path.links);
                let total = Path { nodes, links };
                if !accepted.contains(&total) {
                    candidates.insert(key(&total));
                }
            }
        }
        match candidates.pop_first() {
            Some((_, nodes, links)) => accepted.push(Path { nodes, links }),
            None => break,
        }
    }
    accepted
}
