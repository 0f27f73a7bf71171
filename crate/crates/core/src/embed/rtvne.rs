use std::cmp::Ordering;

use super::{
    ltr_table, order_vnodes, orient, reserve_cpu, reserve_path, sn_node_capacity, unreserve_path,
    CandidateTrace, EmbedResult, Embedder, EmbedderConfig, Outcome, RejectReason,
};
use crate::graph::{Embedding, LtrTable, NodeId, Path, SubstrateNetwork, VirtualNetworkRequest};

/// Coordinated node/link mapping guided by the link-traffic-ratio.
#[derive(Debug, Clone, Default)]
pub struct RtVne {
    cfg: EmbedderConfig,
}

impl RtVne {
    pub fn new(cfg: EmbedderConfig) -> Self {
        Self { cfg }
    }
}

impl Embedder for RtVne {
    fn name(&self) -> &'static str {
        "rt-vne"
    }

    fn embed(&self, sn: &SubstrateNetwork, vnr: &VirtualNetworkRequest) -> EmbedResult {
        rtvne_embed(sn, vnr, &self.cfg)
    }
}

struct Candidate {
    root: NodeId,
    score: f64,
    root_capacity_after: f64,
    node_map: Vec<NodeId>,
    link_map: Vec<Path>,
}

/// Embeds `vnr` rooted at each of the `x_candidates` substrate nodes with the
/// highest residual capacity and keeps the cheapest complete embedding.
///
/// For every root the vnodes are placed in [`order_vnodes`] order. Each
/// non-root vnode goes to the unused, CPU-feasible substrate node minimising
/// Σ bw × Ltr(path) over its already-placed neighbours, and its vlinks take
/// those minimum-Ltr paths. Link weights are frozen for the whole request;
/// bandwidth feasibility uses the tentative residuals of the current root.
pub fn rtvne_embed(
    sn: &SubstrateNetwork,
    vnr: &VirtualNetworkRequest,
    cfg: &EmbedderConfig,
) -> EmbedResult {
    let order = order_vnodes(vnr, cfg.psi);
    let Some(&parent) = order.first() else {
        return EmbedResult::rejected(RejectReason::NodeMapping { vnode: 0 });
    };
    let table = if vnr.vlinks.is_empty() {
        None
    } else {
        match ltr_table(sn, cfg.ltr_basis) {
            Ok(t) => Some(t),
            Err(reason) => return EmbedResult::rejected(reason),
        }
    };

    let mut roots: Vec<(f64, NodeId)> = sn
        .node_ids()
        .map(|n| (sn_node_capacity(sn, n, cfg.psi), n))
        .collect();
    roots.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    roots.truncate(cfg.x_candidates);

    let mut trace = Vec::with_capacity(roots.len());
    let mut best: Option<Candidate> = None;
    for &(_, root) in &roots {
        match build_candidate(sn, vnr, cfg, table.as_ref(), &order, parent, root) {
            Ok(cand) => {
                trace.push(CandidateTrace {
                    root,
                    feasible: true,
                    score: Some(cand.score),
                    failure: None,
                });
                let better = match &best {
                    None => true,
                    Some(b) => {
                        cand.score
                            .total_cmp(&b.score)
                            .then(b.root_capacity_after.total_cmp(&cand.root_capacity_after))
                            .then(cand.root.cmp(&b.root))
                            == Ordering::Less
                    }
                };
                if better {
                    best = Some(cand);
                }
            }
            Err(reason) => trace.push(CandidateTrace {
                root,
                feasible: false,
                score: None,
                failure: Some(reason),
            }),
        }
    }

    let outcome = match best {
        Some(c) => Outcome::Accepted(Embedding {
            vnr_id: vnr.id,
            node_map: c.node_map,
            link_map: c.link_map,
            embed_time: 0,
            expiry_time: 0,
        }),
        None => Outcome::Rejected(RejectReason::NoFeasibleCandidate { tried: roots.len() }),
    };
    EmbedResult {
        outcome,
        candidate_trace: trace,
    }
}

fn build_candidate(
    sn: &SubstrateNetwork,
    vnr: &VirtualNetworkRequest,
    cfg: &EmbedderConfig,
    table: Option<&LtrTable>,
    order: &[usize],
    parent: usize,
    root: NodeId,
) -> Result<Candidate, RejectReason> {
    if sn.node(root).cpu_residual < vnr.vnodes[parent].cpu {
        return Err(RejectReason::NodeMapping { vnode: parent });
    }
    // tentative state; dropping it rolls everything back
    let mut work = sn.clone();
    let mut node_map: Vec<Option<NodeId>> = vec![None; vnr.vnodes.len()];
    let mut link_map: Vec<Option<Path>> = vec![None; vnr.vlinks.len()];
    let mut used = vec![false; sn.node_count()];
    let mut total_score = 0.0;

    node_map[parent] = Some(root);
    used[root.0] = true;
    reserve_cpu(&mut work, root, vnr.vnodes[parent].cpu);

    for &vnode in &order[1..] {
        let cpu = vnr.vnodes[vnode].cpu;
        // (vlink, host of mapped neighbour, bandwidth)
        let anchors: Vec<(usize, NodeId, f64)> = vnr
            .incident(vnode)
            .filter_map(|l| node_map[vnr.vlinks[l].other(vnode)].map(|h| (l, h, vnr.vlinks[l].bw)))
            .collect();
        let trees: Vec<_> = match table {
            Some(t) => anchors
                .iter()
                .map(|&(_, h, bw)| t.tree(&work, h, bw))
                .collect(),
            None => Vec::new(),
        };

        let mut scored: Vec<(f64, NodeId)> = work
            .node_ids()
            .filter(|&n| !used[n.0] && work.node(n).cpu_residual >= cpu)
            .filter_map(|n| {
                let mut score = 0.0;
                for (tree, &(_, _, bw)) in trees.iter().zip(&anchors) {
                    score += bw * tree.cost(n)?;
                }
                Some((score, n))
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut placed = false;
        for &(score, host) in &scored {
            if let Some(paths) = route_all(&mut work, table, &anchors, &trees, host) {
                for ((l, _, _), path) in anchors.iter().zip(paths) {
                    let from = node_map[vnr.vlinks[*l].endpoints.0].unwrap_or(host);
                    link_map[*l] = Some(orient(path, from));
                }
                reserve_cpu(&mut work, host, cpu);
                node_map[vnode] = Some(host);
                used[host.0] = true;
                total_score += score;
                placed = true;
                break;
            }
        }
        if !placed {
            let cpu_feasible = work
                .node_ids()
                .any(|n| !used[n.0] && work.node(n).cpu_residual >= cpu);
            return Err(match anchors.first() {
                Some(&(vlink, _, _)) if cpu_feasible => RejectReason::LinkMapping { vlink },
                _ => RejectReason::NodeMapping { vnode },
            });
        }
    }

    let node_map: Vec<NodeId> = node_map
        .into_iter()
        .map(|n| n.expect("all vnodes placed"))
        .collect();
    // a vlink is routed when the later of its endpoints is placed
    let link_map: Vec<Path> = link_map
        .into_iter()
        .map(|p| p.expect("every vlink routed"))
        .collect();
    Ok(Candidate {
        root,
        score: total_score,
        root_capacity_after: sn_node_capacity(&work, root, cfg.psi),
        node_map,
        link_map,
    })
}

/// Reserves a path from every anchor to `host`, rerouting on the updated
/// residuals when an earlier vlink of the same vnode consumed a shared link.
/// On failure all reservations made here are undone.
fn route_all(
    work: &mut SubstrateNetwork,
    table: Option<&LtrTable>,
    anchors: &[(usize, NodeId, f64)],
    trees: &[crate::graph::PathTree],
    host: NodeId,
) -> Option<Vec<Path>> {
    let mut reserved: Vec<(Path, f64)> = Vec::with_capacity(anchors.len());
    for (tree, &(_, anchor, bw)) in trees.iter().zip(anchors) {
        let mut path = tree.path_to(host).expect("scored hosts are reachable");
        if !reserve_path(work, &path, bw) {
            let rerouted = table.and_then(|t| t.tree(work, anchor, bw).path_to(host));
            match rerouted {
                Some(p) if reserve_path(work, &p, bw) => path = p,
                _ => {
                    for (p, b) in &reserved {
                        unreserve_path(work, p, *b);
                    }
                    return None;
                }
            }
        }
        reserved.push((path, bw));
    }
    Some(reserved.into_iter().map(|(p, _)| p).collect())
}
