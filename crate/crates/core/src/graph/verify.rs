use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Embedding, LinkId, NodeId, SubstrateNetwork, VirtualNetworkRequest};

/// One violated embedding constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    /// Node or link map does not have one entry per vnode / vlink.
    Shape { detail: String },
    /// Two vnodes share a substrate host.
    NotInjective {
        host: NodeId,
        vnodes: (usize, usize),
    },
    /// Path is not a simple walk in the substrate.
    InvalidPath { vlink: usize },
    /// Path endpoints do not match the hosts of the vlink endpoints.
    EndpointMismatch { vlink: usize },
    Cpu {
        host: NodeId,
        required: f64,
        residual: f64,
    },
    Bandwidth {
        link: LinkId,
        required: f64,
        residual: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks an embedding against the substrate as it was before allocation.
pub fn verify_embedding(
    sn: &SubstrateNetwork,
    vnr: &VirtualNetworkRequest,
    emb: &Embedding,
) -> VerifyReport {
    let mut violations = Vec::new();
    if emb.node_map.len() != vnr.vnodes.len() || emb.link_map.len() != vnr.vlinks.len() {
        violations.push(Violation::Shape {
            detail: format!(
                "{} node / {} link mappings for {} vnodes / {} vlinks",
                emb.node_map.len(),
                emb.link_map.len(),
                vnr.vnodes.len(),
                vnr.vlinks.len()
            ),
        });
        return VerifyReport { violations };
    }
    if let Some(&bad) = emb.node_map.iter().find(|n| n.0 >= sn.node_count()) {
        violations.push(Violation::Shape {
            detail: format!("unknown substrate node {bad}"),
        });
        return VerifyReport { violations };
    }

    let mut hosts: BTreeMap<NodeId, usize> = BTreeMap::new();
    let mut cpu: BTreeMap<NodeId, f64> = BTreeMap::new();
    for (i, &host) in emb.node_map.iter().enumerate() {
        if let Some(&first) = hosts.get(&host) {
            violations.push(Violation::NotInjective {
                host,
                vnodes: (first, i),
            });
        } else {
            hosts.insert(host, i);
        }
        *cpu.entry(host).or_default() += vnr.vnodes[i].cpu;
    }
    for (host, required) in cpu {
        let residual = sn.node(host).cpu_residual;
        if required > residual {
            violations.push(Violation::Cpu {
                host,
                required,
                residual,
            });
        }
    }

    let mut bw: BTreeMap<LinkId, f64> = BTreeMap::new();
    for (j, (vlink, path)) in vnr.vlinks.iter().zip(&emb.link_map).enumerate() {
        if path.nodes.is_empty() || !path.is_valid_in(sn) {
            violations.push(Violation::InvalidPath { vlink: j });
            continue;
        }
        let (a, b) = vlink.endpoints;
        if path.source() != emb.node_map[a] || path.target() != emb.node_map[b] {
            violations.push(Violation::EndpointMismatch { vlink: j });
        }
        for &l in &path.links {
            *bw.entry(l).or_default() += vlink.bw;
        }
    }
    for (link, required) in bw {
        let residual = sn.link(link).bw_residual;
        if required > residual {
            violations.push(Violation::Bandwidth {
                link,
                required,
                residual,
            });
        }
    }
    VerifyReport { violations }
}
