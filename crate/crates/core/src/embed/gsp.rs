use super::{
    orient, reserve_cpu, reserve_path, EmbedResult, Embedder, EmbedderConfig, Outcome, RejectReason,
};
use crate::graph::{
    k_hop_shortest_paths, Embedding, NodeId, Path, SubstrateNetwork, VirtualNetworkRequest,
};

/// Greedy node mapping followed by k-shortest-path link mapping.
#[derive(Debug, Clone, Default)]
pub struct GreedySp {
    cfg: EmbedderConfig,
}

impl GreedySp {
    pub fn new(cfg: EmbedderConfig) -> Self {
        Self { cfg }
    }
}

impl Embedder for GreedySp {
    fn name(&self) -> &'static str {
        "g-sp"
    }

    fn embed(&self, sn: &SubstrateNetwork, vnr: &VirtualNetworkRequest) -> EmbedResult {
        gsp_embed(sn, vnr, &self.cfg)
    }
}

fn substrate_rank(sn: &SubstrateNetwork, n: NodeId) -> f64 {
    let bw: f64 = sn.incident(n).iter().map(|&l| sn.link(l).bw_residual).sum();
    sn.node(n).cpu_residual * bw
}

/// Two-phase baseline.
///
/// Vnodes are taken in decreasing `cpu × Σ incident bw` and each goes to the
/// unused substrate node with the largest `cpu_residual × Σ incident
/// bw_residual` that fits. Vlinks, largest first, take the first of the
/// `k_paths` hop-shortest paths that has enough residual bandwidth.
pub fn gsp_embed(
    sn: &SubstrateNetwork,
    vnr: &VirtualNetworkRequest,
    cfg: &EmbedderConfig,
) -> EmbedResult {
    let mut work = sn.clone();

    let priority: Vec<f64> = (0..vnr.vnodes.len())
        .map(|v| vnr.vnodes[v].cpu * vnr.incident(v).map(|l| vnr.vlinks[l].bw).sum::<f64>())
        .collect();
    let mut vorder: Vec<usize> = (0..vnr.vnodes.len()).collect();
    vorder.sort_by(|&a, &b| priority[b].total_cmp(&priority[a]).then(a.cmp(&b)));

    let mut node_map = vec![NodeId(usize::MAX); vnr.vnodes.len()];
    let mut used = vec![false; sn.node_count()];
    for vnode in vorder {
        let cpu = vnr.vnodes[vnode].cpu;
        let host = work
            .node_ids()
            .filter(|&n| !used[n.0] && work.node(n).cpu_residual >= cpu)
            .map(|n| (substrate_rank(&work, n), n))
            .min_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)))
            .map(|(_, n)| n);
        let Some(host) = host else {
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
        let (src, dst) = (node_map[a], node_map[b]);
        let chosen = k_hop_shortest_paths(&work, src, dst, cfg.k_paths)
            .into_iter()
            .find(|p| reserve_path(&mut work, p, bw));
        match chosen {
            Some(p) => link_map[vlink] = Some(orient(p, src)),
            None => return EmbedResult::rejected(RejectReason::LinkMapping { vlink }),
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
