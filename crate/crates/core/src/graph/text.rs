//! Line-oriented text format for substrate networks and VNR workloads.
//!
//! ```text
//! # comment
//! nodes <n> links <m>
//! node <id> <cpu> [<x> <y>]
//! link <id> <u> <v> <bw>
//! ```
//!
//! Node ids must be exactly `0..n` and link ids exactly `0..m`, each listed
//! once, in any order. A workload file is a sequence of such blocks, each
//! preceded by `vnr <id> arrive <window> life <windows>`. Numbers are written
//! with Rust's shortest round-trip formatting, so write/parse is lossless.

use std::fmt::Write as _;

use thiserror::Error;

use super::{GraphError, NodeId, SubstrateNetwork, VirtualNetworkRequest, VnrId};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// cpu and optional position of a parsed node line
type NodeEntry = (f64, Option<(f64, f64)>);

struct Block {
    header_line: usize,
    nodes: Vec<Option<NodeEntry>>,
    links: Vec<Option<(usize, usize, f64)>>,
}

fn parse_num<T: std::str::FromStr>(
    tok: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T, ParseError> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| err(line, format!("invalid {what} `{tok}`")))
}

fn no_trailing<'a>(mut toks: impl Iterator<Item = &'a str>, line: usize) -> Result<(), ParseError> {
    match toks.next() {
        Some(t) => Err(err(line, format!("unexpected token `{t}`"))),
        None => Ok(()),
    }
}

type Lines<'a> = std::vec::IntoIter<(usize, &'a str)>;

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn meaningful(input: &str) -> Lines<'_> {
    input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect::<Vec<_>>()
        .into_iter()
}

fn parse_block(lines: &mut Lines<'_>) -> Result<Block, ParseError> {
    let (ln, header) = lines
        .next()
        .ok_or_else(|| err(0, "expected `nodes <n> links <m>` header"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("nodes") {
        return Err(err(ln, "expected `nodes <n> links <m>` header"));
    }
    let n: usize = parse_num(toks.next(), ln, "node count")?;
    if toks.next() != Some("links") {
        return Err(err(ln, "expected `links` in header"));
    }
    let m: usize = parse_num(toks.next(), ln, "link count")?;
    no_trailing(toks, ln)?;

    let mut block = Block {
        header_line: ln,
        nodes: vec![None; n],
        links: vec![None; m],
    };
    for _ in 0..n + m {
        let (ln, line) = lines.next().ok_or_else(|| {
            err(
                ln,
                format!("block declares {n} nodes and {m} links but ends early"),
            )
        })?;
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("node") => {
                let id: usize = parse_num(toks.next(), ln, "node id")?;
                let cpu: f64 = parse_num(toks.next(), ln, "cpu")?;
                let pos = match toks.next() {
                    None => None,
                    Some(x) => {
                        let x: f64 = parse_num(Some(x), ln, "x coordinate")?;
                        let y: f64 = parse_num(toks.next(), ln, "y coordinate")?;
                        Some((x, y))
                    }
                };
                no_trailing(toks, ln)?;
                let slot = block
                    .nodes
                    .get_mut(id)
                    .ok_or_else(|| err(ln, format!("node id {id} out of range 0..{n}")))?;
                if slot.is_some() {
                    return Err(err(ln, format!("duplicate node id {id}")));
                }
                *slot = Some((cpu, pos));
            }
            Some("link") => {
                let id: usize = parse_num(toks.next(), ln, "link id")?;
                let u: usize = parse_num(toks.next(), ln, "endpoint")?;
                let v: usize = parse_num(toks.next(), ln, "endpoint")?;
                let bw: f64 = parse_num(toks.next(), ln, "bandwidth")?;
                no_trailing(toks, ln)?;
                if u >= n || v >= n {
                    return Err(err(ln, format!("link {id} has dangling endpoint")));
                }
                let slot = block
                    .links
                    .get_mut(id)
                    .ok_or_else(|| err(ln, format!("link id {id} out of range 0..{m}")))?;
                if slot.is_some() {
                    return Err(err(ln, format!("duplicate link id {id}")));
                }
                *slot = Some((u, v, bw));
            }
            _ => {
                return Err(err(
                    ln,
                    format!("expected `node` or `link`, found `{line}`"),
                ))
            }
        }
    }
    Ok(block)
}

fn graph_err(line: usize) -> impl Fn(GraphError) -> ParseError {
    move |e| err(line, e.to_string())
}

pub fn parse_substrate(input: &str) -> Result<SubstrateNetwork, ParseError> {
    let mut lines = meaningful(input);
    let block = parse_block(&mut lines)?;
    if let Some((ln, line)) = lines.next() {
        return Err(err(ln, format!("unexpected trailing content `{line}`")));
    }
    let ln = block.header_line;
    let mut sn = SubstrateNetwork::new();
    for node in block.nodes {
        let (cpu, pos) = node.expect("all ids filled");
        sn.add_node(cpu, pos).map_err(graph_err(ln))?;
    }
    for link in block.links {
        let (u, v, bw) = link.expect("all ids filled");
        sn.add_link(NodeId(u), NodeId(v), bw)
            .map_err(graph_err(ln))?;
    }
    Ok(sn)
}

pub fn write_substrate(sn: &SubstrateNetwork) -> String {
    let mut out = String::new();
    writeln!(out, "nodes {} links {}", sn.node_count(), sn.link_count()).unwrap();
    for n in sn.nodes() {
        match n.position {
            Some((x, y)) => writeln!(out, "node {} {} {} {}", n.id, n.cpu_total, x, y),
            None => writeln!(out, "node {} {}", n.id, n.cpu_total),
        }
        .unwrap();
    }
    for l in sn.links() {
        writeln!(
            out,
            "link {} {} {} {}",
            l.id, l.endpoints.0, l.endpoints.1, l.bw_total
        )
        .unwrap();
    }
    out
}

fn write_vnr_into(out: &mut String, vnr: &VirtualNetworkRequest) {
    writeln!(
        out,
        "vnr {} arrive {} life {}",
        vnr.id, vnr.arrival_time, vnr.lifetime
    )
    .unwrap();
    writeln!(out, "nodes {} links {}", vnr.vnodes.len(), vnr.vlinks.len()).unwrap();
    for (i, n) in vnr.vnodes.iter().enumerate() {
        writeln!(out, "node {} {}", i, n.cpu).unwrap();
    }
    for (j, l) in vnr.vlinks.iter().enumerate() {
        writeln!(
            out,
            "link {} {} {} {}",
            j, l.endpoints.0, l.endpoints.1, l.bw
        )
        .unwrap();
    }
}

pub fn write_workload(vnrs: &[VirtualNetworkRequest]) -> String {
    let mut out = String::new();
    for vnr in vnrs {
        write_vnr_into(&mut out, vnr);
    }
    out
}

pub fn parse_workload(input: &str) -> Result<Vec<VirtualNetworkRequest>, ParseError> {
    let mut lines = meaningful(input);
    let mut vnrs: Vec<VirtualNetworkRequest> = Vec::new();
    while let Some((ln, header)) = lines.next() {
        let mut toks = header.split_whitespace();
        if toks.next() != Some("vnr") {
            return Err(err(ln, "expected `vnr <id> arrive <w> life <d>`"));
        }
        let id: u64 = parse_num(toks.next(), ln, "vnr id")?;
        if toks.next() != Some("arrive") {
            return Err(err(ln, "expected `arrive`"));
        }
        let arrive: u64 = parse_num(toks.next(), ln, "arrival window")?;
        if toks.next() != Some("life") {
            return Err(err(ln, "expected `life`"));
        }
        let life: u64 = parse_num(toks.next(), ln, "lifetime")?;
        no_trailing(toks, ln)?;
        if life == 0 {
            return Err(err(ln, "lifetime must be at least 1 window"));
        }
        if vnrs.iter().any(|v| v.id == VnrId(id)) {
            return Err(err(ln, format!("duplicate vnr id {id}")));
        }
        let block = parse_block(&mut lines)?;
        let mut vnr = VirtualNetworkRequest::new(VnrId(id), arrive, life);
        for node in block.nodes {
            let (cpu, _) = node.expect("all ids filled");
            vnr.add_vnode(cpu).map_err(graph_err(ln))?;
        }
        for link in block.links {
            let (u, v, bw) = link.expect("all ids filled");
            vnr.add_vlink(u, v, bw).map_err(graph_err(ln))?;
        }
        vnrs.push(vnr);
    }
    Ok(vnrs)
}
