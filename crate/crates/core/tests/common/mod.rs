//! Shared fixtures and brute-force oracles for the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vne_core::engine::EngineConfig;
use vne_core::graph::{LinkId, NodeId, Path, SubstrateNetwork, VirtualNetworkRequest, VnrId};

/// Every simple path from `s` to `t`, found by depth-first search over links.
pub fn simple_paths(sn: &SubstrateNetwork, s: NodeId, t: NodeId) -> Vec<Path> {
    fn dfs(
        sn: &SubstrateNetwork,
        t: NodeId,
        nodes: &mut Vec<NodeId>,
        links: &mut Vec<LinkId>,
        out: &mut Vec<Path>,
    ) {
        let u = *nodes.last().unwrap();
        if u == t {
            out.push(Path {
                nodes: nodes.clone(),
                links: links.clone(),
            });
            return;
        }
        for &l in sn.incident(u) {
            let v = sn.link(l).other(u);
            if nodes.contains(&v) {
                continue;
            }
            nodes.push(v);
            links.push(l);
            dfs(sn, t, nodes, links, out);
            nodes.pop();
            links.pop();
        }
    }
    let mut out = Vec::new();
    dfs(sn, t, &mut vec![s], &mut Vec::new(), &mut out);
    out
}

fn injective_maps(n: usize, k: usize) -> Vec<Vec<NodeId>> {
    fn rec(n: usize, k: usize, cur: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for s in 0..n {
            if !cur.contains(&NodeId(s)) {
                cur.push(NodeId(s));
                rec(n, k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::new(), &mut out);
    out
}

/// Whether any injective node map together with any choice of simple paths
/// satisfies every CPU and (shared) bandwidth constraint.
pub fn exhaustive_feasible(sn: &SubstrateNetwork, vnr: &VirtualNetworkRequest) -> bool {
    fn route(vlinks: &[(Vec<Path>, f64)], i: usize, residual: &mut Vec<f64>) -> bool {
        let Some((paths, bw)) = vlinks.get(i) else {
            return true;
        };
        for p in paths {
            if p.links.iter().all(|l| residual[l.0] >= *bw) {
                for l in &p.links {
                    residual[l.0] -= bw;
                }
                let ok = route(vlinks, i + 1, residual);
                for l in &p.links {
                    residual[l.0] += bw;
                }
                if ok {
                    return true;
                }
            }
        }
        false
    }

    for map in injective_maps(sn.node_count(), vnr.vnodes.len()) {
        if vnr
            .vnodes
            .iter()
            .zip(&map)
            .any(|(v, h)| sn.node(*h).cpu_residual < v.cpu)
        {
            continue;
        }
        let vlinks: Vec<(Vec<Path>, f64)> = vnr
            .vlinks
            .iter()
            .map(|vl| {
                (
                    simple_paths(sn, map[vl.endpoints.0], map[vl.endpoints.1]),
                    vl.bw,
                )
            })
            .collect();
        let mut residual: Vec<f64> = sn.links().iter().map(|l| l.bw_residual).collect();
        if route(&vlinks, 0, &mut residual) {
            return true;
        }
    }
    false
}

/// Small random substrate (2..=6 nodes) and connected VNR (1..=3 vnodes)
/// with capacities tight enough that a fair share of instances is infeasible.
pub fn tiny_instance(rng: &mut ChaCha8Rng) -> (SubstrateNetwork, VirtualNetworkRequest) {
    let mut sn = SubstrateNetwork::new();
    let n = rng.random_range(2..=6);
    for _ in 0..n {
        sn.add_node(rng.random_range(0.0..=20.0), None).unwrap();
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(0.5) {
                sn.add_link(NodeId(u), NodeId(v), rng.random_range(0.0..=20.0))
                    .unwrap();
            }
        }
    }
    let k = rng.random_range(1..=3);
    let mut vnr = VirtualNetworkRequest::new(VnrId(0), 0, 1);
    for _ in 0..k {
        vnr.add_vnode(rng.random_range(0.0..=15.0)).unwrap();
    }
    for a in 0..k {
        for b in a + 1..k {
            if rng.random_bool(0.6) {
                vnr.add_vlink(a, b, rng.random_range(0.0..=15.0)).unwrap();
            }
        }
    }
    // keep the request connected
    for v in 1..k {
        if !vnr.vlinks.iter().any(|l| l.endpoints.1 == v) {
            vnr.add_vlink(v - 1, v, rng.random_range(0.0..=15.0))
                .unwrap();
        }
    }
    (sn, vnr)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two 10-CPU nodes joined by a 10-unit link, and three requests:
///
/// * 0: vnodes 6 and 4 joined by bw 5, arrives 0, lifetime 2
/// * 1: one vnode of 7, arrives 1, lifetime 1; fits only once request 0 leaves
/// * 2: one vnode of 11, arrives 0; never fits and is dropped
///
/// Run for three windows with `max_deferrals = 2` and auditing on.
pub fn golden_trace() -> (
    SubstrateNetwork,
    Vec<VirtualNetworkRequest>,
    u64,
    EngineConfig,
) {
    let mut sn = SubstrateNetwork::new();
    sn.add_node(10.0, None).unwrap();
    sn.add_node(10.0, None).unwrap();
    sn.add_link(NodeId(0), NodeId(1), 10.0).unwrap();

    let mut first = VirtualNetworkRequest::new(VnrId(0), 0, 2);
    first.add_vnode(6.0).unwrap();
    first.add_vnode(4.0).unwrap();
    first.add_vlink(0, 1, 5.0).unwrap();
    let mut second = VirtualNetworkRequest::new(VnrId(1), 1, 1);
    second.add_vnode(7.0).unwrap();
    let mut huge = VirtualNetworkRequest::new(VnrId(2), 0, 3);
    huge.add_vnode(11.0).unwrap();

    let cfg = EngineConfig {
        max_deferrals: 2,
        audit: true,
        ..Default::default()
    };
    (sn, vec![first, second, huge], 3, cfg)
}
