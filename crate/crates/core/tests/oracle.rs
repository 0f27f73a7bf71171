mod common;

use common::{exhaustive_feasible, rng, simple_paths, tiny_instance};
use rand::Rng;
use vne_core::embed::EmbedderKind;
use vne_core::graph::{ltr_shortest_path, verify_embedding, GraphError, NodeId, SubstrateNetwork};
use vne_core::EmbedderConfig;

/// Relative slack between two sums of the same Ltr terms taken in different orders.
const COST_TOL: f64 = 1e-12;

fn random_graph(rng: &mut rand_chacha::ChaCha8Rng) -> SubstrateNetwork {
    let mut sn = SubstrateNetwork::new();
    let n = rng.random_range(2..=8);
    for _ in 0..n {
        sn.add_node(1.0, None).unwrap();
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(0.45) {
                sn.add_link(NodeId(u), NodeId(v), rng.random_range(0.0..=100.0))
                    .unwrap();
            }
        }
    }
    if rng.random_bool(0.2) && n > 1 {
        // an occasional parallel link
        sn.add_link(NodeId(0), NodeId(1), rng.random_range(0.0..=100.0))
            .unwrap();
    }
    sn
}

#[test]
fn ltr_shortest_path_matches_enumeration() {
    let mut r = rng(11);
    let mut queries = 0;
    for _ in 0..300 {
        let sn = random_graph(&mut r);
        let total = sn.residual_bw_sum();
        let n = sn.node_count();
        for _ in 0..4 {
            let s = NodeId(r.random_range(0..n));
            let t = NodeId(r.random_range(0..n));
            let min_bw = r.random_range(0.0..=60.0);
            let best = simple_paths(&sn, s, t)
                .into_iter()
                .filter(|p| p.links.iter().all(|l| sn.link(*l).bw_residual >= min_bw))
                .map(|p| {
                    p.links
                        .iter()
                        .map(|l| sn.link(*l).bw_residual / total)
                        .sum::<f64>()
                })
                .min_by(f64::total_cmp);
            let got = ltr_shortest_path(&sn, s, t, min_bw);
            queries += 1;
            match (best, got) {
                (None, Err(GraphError::NoFeasiblePath { .. })) => {}
                (Some(c), Ok(p)) => {
                    assert!(p.is_valid_in(&sn));
                    assert_eq!((p.source(), p.target()), (s, t));
                    assert!(p.links.iter().all(|l| sn.link(*l).bw_residual >= min_bw));
                    let cost: f64 = p
                        .links
                        .iter()
                        .map(|l| sn.link(*l).bw_residual / total)
                        .sum();
                    assert!((cost - c).abs() <= COST_TOL * c.max(1.0), "{cost} vs {c}");
                }
                (best, got) => panic!("oracle {best:?}, search {got:?}"),
            }
        }
    }
    assert!(queries >= 1000);
}

#[test]
fn embedders_never_accept_infeasible_instances() {
    let mut r = rng(5);
    let cfg = EmbedderConfig::default();
    let embedders: Vec<_> = EmbedderKind::ALL
        .iter()
        .map(|k| (k, k.build(cfg)))
        .collect();
    let mut feasible = 0;
    let mut false_rejects = [0usize; 3];
    let instances = 300;
    for _ in 0..instances {
        let (sn, vnr) = tiny_instance(&mut r);
        let oracle = exhaustive_feasible(&sn, &vnr);
        feasible += oracle as usize;
        for (i, (kind, e)) in embedders.iter().enumerate() {
            let res = e.embed(&sn, &vnr);
            if let Some(emb) = res.embedding() {
                assert!(oracle, "{kind} accepted an infeasible instance");
                let report = verify_embedding(&sn, &vnr, emb);
                assert!(report.passed(), "{kind}: {:?}", report.violations);
            } else if oracle {
                false_rejects[i] += 1;
            }
        }
    }
    assert!(
        feasible > 0 && feasible < instances,
        "instances should mix feasible and infeasible"
    );
    for (i, kind) in EmbedderKind::ALL.iter().enumerate() {
        println!(
            "{kind}: false rejects {}/{} feasible ({:.1}%)",
            false_rejects[i],
            feasible,
            100.0 * false_rejects[i] as f64 / feasible as f64
        );
    }
}

#[test]
fn rtvne_acceptance_under_more_capacity() {
    // heuristics need not be monotone; the rate is reported only
    let mut r = rng(17);
    let cfg = EmbedderConfig::default();
    let (mut accepted, mut lost) = (0, 0);
    for _ in 0..300 {
        let (sn, vnr) = tiny_instance(&mut r);
        if !vne_core::embed::rtvne_embed(&sn, &vnr, &cfg).is_accepted() {
            continue;
        }
        accepted += 1;
        let mut more = SubstrateNetwork::new();
        for node in sn.nodes() {
            more.add_node(node.cpu_total + 3.0, None).unwrap();
        }
        for link in sn.links() {
            more.add_link(link.endpoints.0, link.endpoints.1, link.bw_total + 3.0)
                .unwrap();
        }
        if !vne_core::embed::rtvne_embed(&more, &vnr, &cfg).is_accepted() {
            lost += 1;
        }
    }
    println!("rt-vne monotonicity violations: {lost}/{accepted}");
    assert!(accepted > 0);
}
