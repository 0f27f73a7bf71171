mod common;

use proptest::prelude::*;
use vne_core::embed::{order_vnodes, rtvne_embed, sn_node_capacity, EmbedderKind};
use vne_core::graph::{LtrBasis, LtrTable, NodeId, SubstrateNetwork, VirtualNetworkRequest, VnrId};
use vne_core::EmbedderConfig;

fn substrate() -> impl Strategy<Value = SubstrateNetwork> {
    (2usize..=8).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..50.0, n),
            prop::collection::vec(prop::option::weighted(0.6, 0.0f64..50.0), n * (n - 1) / 2),
        )
            .prop_map(move |(cpus, links)| {
                let mut sn = SubstrateNetwork::new();
                for c in cpus {
                    sn.add_node(c, None).unwrap();
                }
                let mut it = links.into_iter();
                for u in 0..n {
                    for v in u + 1..n {
                        if let Some(bw) = it.next().flatten() {
                            sn.add_link(NodeId(u), NodeId(v), bw).unwrap();
                        }
                    }
                }
                sn
            })
    })
}

fn request() -> impl Strategy<Value = VirtualNetworkRequest> {
    (1usize..=4).prop_flat_map(|k| {
        (
            prop::collection::vec(0.0f64..20.0, k),
            prop::collection::vec(prop::option::weighted(0.7, 0.0f64..20.0), k * (k - 1) / 2),
        )
            .prop_map(move |(cpus, links)| {
                let mut vnr = VirtualNetworkRequest::new(VnrId(0), 0, 1);
                for c in cpus {
                    vnr.add_vnode(c).unwrap();
                }
                let mut it = links.into_iter();
                for a in 0..k {
                    for b in a + 1..k {
                        if let Some(bw) = it.next().flatten() {
                            vnr.add_vlink(a, b, bw).unwrap();
                        }
                    }
                }
                vnr
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn accepted_embeddings_verify_and_conserve(sn in substrate(), vnr in request()) {
        for kind in EmbedderKind::ALL {
            let res = kind.build(EmbedderConfig::default()).embed(&sn, &vnr);
            if let Some(emb) = res.embedding() {
                prop_assert!(vne_core::graph::verify_embedding(&sn, &vnr, emb).passed());
                let mut work = sn.clone();
                work.allocate(&vnr, emb).unwrap();
                let cpu_used: f64 = work.nodes().iter().map(|n| n.cpu_total - n.cpu_residual).sum();
                let bw_used: f64 = work.links().iter().map(|l| l.bw_total - l.bw_residual).sum();
                let bw_demand: f64 = vnr.vlinks.iter().zip(&emb.link_map).map(|(l, p)| l.bw * p.hops() as f64).sum();
                prop_assert_eq!(cpu_used, vnr.total_cpu());
                prop_assert_eq!(bw_used, bw_demand);
                work.release(&vnr, emb).unwrap();
                prop_assert!(work.is_pristine());
            }
        }
    }

    #[test]
    fn ltr_weights_are_normalized(sn in substrate()) {
        if let Ok(table) = LtrTable::new(&sn, LtrBasis::Residual) {
            let sum: f64 = table.weights().iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            prop_assert!(table.weights().iter().all(|w| (0.0..=1.0).contains(w)));
        }
    }

    #[test]
    fn rtvne_is_invariant_to_bandwidth_scale(sn in substrate(), vnr in request(), exp in 1i32..4) {
        // scaling by a power of two keeps every amount on the same grid
        let factor = 2f64.powi(exp);
        let mut scaled = SubstrateNetwork::new();
        for n in sn.nodes() {
            scaled.add_node(n.cpu_total, None).unwrap();
        }
        for l in sn.links() {
            scaled.add_link(l.endpoints.0, l.endpoints.1, l.bw_total * factor).unwrap();
        }
        let mut vnr_scaled = vnr.clone();
        for l in &mut vnr_scaled.vlinks {
            l.bw *= factor;
        }
        // psi 0 keeps node capacities independent of the bandwidth scale
        let cfg = EmbedderConfig { psi: 0.0, ..Default::default() };
        let a = rtvne_embed(&sn, &vnr, &cfg);
        let b = rtvne_embed(&scaled, &vnr_scaled, &cfg);
        prop_assert_eq!(a.embedding().map(|e| &e.node_map), b.embedding().map(|e| &e.node_map));
    }

    #[test]
    fn order_vnodes_is_a_permutation(vnr in request(), psi in 0.0f64..3.0) {
        let mut order = order_vnodes(&vnr, psi);
        order.sort_unstable();
        prop_assert_eq!(order, (0..vnr.vnodes.len()).collect::<Vec<_>>());
    }

    #[test]
    fn single_vnode_goes_to_best_capacity(sn in substrate(), cpu in 0.0f64..30.0) {
        let mut vnr = VirtualNetworkRequest::new(VnrId(0), 0, 1);
        vnr.add_vnode(cpu).unwrap();
        let cfg = EmbedderConfig { x_candidates: sn.node_count(), ..Default::default() };
        let best = sn
            .node_ids()
            .filter(|&n| sn.node(n).cpu_residual >= vnr.vnodes[0].cpu)
            .map(|n| (sn_node_capacity(&sn, n, cfg.psi), n))
            .min_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)))
            .map(|(_, n)| n);
        let got = rtvne_embed(&sn, &vnr, &cfg);
        prop_assert_eq!(got.embedding().map(|e| e.node_map[0]), best);
    }
}
