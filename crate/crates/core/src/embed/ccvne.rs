use std::collections::VecDeque;

use super::{
    orient, reserve_cpu, reserve_path, sn_node_capacity, vn_node_capacity, EmbedResult, Embedder,
    EmbedderConfig, Outcome, RejectReason,
};
use crate::graph::{
    hop_shortest_feasible_path, Embedding, NodeId, Path, SubstrateNetwork, VirtualNetworkRequest,
};

/// Cluster-center baseline.
#[derive(Debug, Clone, Default)]
pub struct ClusterCenter {
    cfg: EmbedderConfig,
}

impl ClusterCenter {
    pub fn new(cfg: EmbedderConfig) -> Self {
        Self { cfg }
    }
}

impl Embedder for ClusterCenter {
    fn name(&self) -> &'static str {
        "cc-vne"
    }

    fn embed(&self, sn: &SubstrateNetwork, vnr: &VirtualNetworkRequest) -> EmbedResult {
        ccvne_embed(sn, vnr, &self.cfg)
    }
}

/// The substrate node with the largest residual capacity score.
pub fn cluster_center(sn: &SubstrateNetwork, psi: f64) -> Option<NodeId> {
    sn.node_ids()
        .map(|n| (sn_node_capacity(sn, n, psi), n))
        .min_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)))
        .map(|(_, n)| n)
}

fn hop_distances(sn: &SubstrateNetwork, from: NodeId) -> Vec<usize> {
    let mut dist = vec![usize::MAX; sn.node_count()];
    dist[from.0] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &l in sn.incident(u) {
            let v = sn.link(l).other(u);
            if dist[v.0] == usize::MAX {
                dist[v.0] = dist[u.0] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Ranks substrate nodes by hop distance from the cluster center (then by
/// capacity), ranks vnodes by degree (then by capacity), and pairs them off
/// in rank order subject to CPU. Vlinks take fewest-hop feasible paths.
pub fn ccvne_embed(
    sn: &SubstrateNetwork,
    vnr: &VirtualNetworkRequest,
    cfg: &EmbedderConfig,
) -> EmbedResult {
    let Some(center) = cluster_center(sn, cfg.psi) else {
        return EmbedResult::rejected(RejectReason::NodeMapping { vnode: 0 });
    };
    let dist = hop_distances(sn, center);
    let caps: Vec<f64> = sn
        .node_ids()
        .map(|n| sn_node_capacity(sn, n, cfg.psi))
        .collect();
    let mut ranked: Vec<NodeId> = sn.node_ids().collect();
    ranked.sort_by(|a, b| {
        dist[a.0]
            .cmp(&dist[b.0])
            .then(caps[b.0].total_cmp(&caps[a.0]))
            .then(a.cmp(b))
    });

    let vcaps: Vec<f64> = (0..vnr.vnodes.len())
        .map(|v| vn_node_capacity(vnr, v, cfg.psi))
        .collect();
    let degree: Vec<usize> = (0..vnr.vnodes.len()).map(|v| vnr.degree(v)).collect();
    let mut vorder: Vec<usize> = (0..vnr.vnodes.len()).collect();
    vorder.sort_by(|&a, &b| {
        degree[b]
            .cmp(&degree[a])
            .then(vcaps[b].total_cmp(&vcaps[a]))
            .then(a.cmp(&b))
    });

    let mut work = sn.clone();
    let mut used = vec![false; sn.node_count()];
    let mut node_map = vec![NodeId(usize::MAX); vnr.vnodes.len()];
    for vnode in vorder {
        let cpu = vnr.vnodes[vnode].cpu;
        let Some(&host) = ranked
            .iter()
            .find(|n| !used[n.0] && work.node(**n).cpu_residual >= cpu)
        else {
            return EmbedResult::rejected(RejectReason::NodeMapping { vnode });
        };
        used[host.0] = true;
        node_map[vnode] = host;
        reserve_cpu(&mut work, host, cpu);
    }

    let mut lorder: Vec<usize> = (0..vnr.vlinks.len()).collect();
    lorder.sort_by(|&a, &b| {
        vnr.vlinks[b]
            .bw
            .total_cmp(&vnr.vlinks[a].bw)
            .then(a.cmp(&b))
    });
    let mut link_map: Vec<Option<Path>> = vec![None; vnr.vlinks.len()];
    for vlink in lorder {
        let (a, b) = vnr.vlinks[vlink].endpoints;
        let bw = vnr.vlinks[vlink].bw;
        match hop_shortest_feasible_path(&work, node_map[a], node_map[b], bw) {
            Ok(p) => {
                let reserved = reserve_path(&mut work, &p, bw);
                debug_assert!(reserved);
                link_map[vlink] = Some(orient(p, node_map[a]));
            }
            Err(_) => return EmbedResult::rejected(RejectReason::LinkMapping { vlink }),
        }
    }

    EmbedResult {
        outcome: Outcome::Accepted(Embedding {
            vnr_id: vnr.id,
            node_map,
            link_map: link_map
                .into_iter()
                .map(|p| p.expect("all vlinks routed"))
                .collect(),
            embed_time: 0,
            expiry_time: 0,
        }),
        candidate_trace: Vec::new(),
    }
}
