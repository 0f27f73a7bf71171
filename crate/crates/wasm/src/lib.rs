//! Browser bindings for the simulator.
//!
//! Each export takes and returns JSON strings. The `*_json` functions hold
//! the logic and run natively too; the `#[wasm_bindgen]` wrappers only turn
//! errors into JS exceptions.

use serde::Serialize;
use serde_json::{Map, Value};
use vne_core::embed::{rtvne_embed, CandidateTrace, EmbedderConfig, EmbedderKind};
use vne_core::engine::Simulation;
use vne_core::graph::{NodeId, SubstrateNetwork, VirtualNetworkRequest, VnrId};
use vne_core::netgen::gen_substrate;
use vne_core::scenario::{generate_inputs, ScenarioConfig};
use wasm_bindgen::prelude::*;

/// Limits that keep a single call responsive in a browser tab.
const MAX_NODES: usize = 100;
const MAX_WINDOWS: u64 = 1000;

#[derive(Serialize)]
struct NodeView {
    id: usize,
    cpu: f64,
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct LinkView {
    id: usize,
    u: usize,
    v: usize,
    bw: f64,
}

#[derive(Serialize)]
struct TopologyView {
    nodes: Vec<NodeView>,
    links: Vec<LinkView>,
}

fn topology(sn: &SubstrateNetwork) -> TopologyView {
    TopologyView {
        nodes: sn
            .nodes()
            .iter()
            .map(|n| {
                let (x, y) = n.position.unwrap_or((n.id.0 as f64, 0.0));
                NodeView {
                    id: n.id.0,
                    cpu: n.cpu_total,
                    x,
                    y,
                }
            })
            .collect(),
        links: sn
            .links()
            .iter()
            .map(|l| LinkView {
                id: l.id.0,
                u: l.endpoints.0 .0,
                v: l.endpoints.1 .0,
                bw: l.bw_total,
            })
            .collect(),
    }
}

/// Applies a JSON object of config keys on top of the defaults.
fn config_from_json(params: &str) -> Result<ScenarioConfig, String> {
    let mut cfg = ScenarioConfig::default();
    if !params.trim().is_empty() {
        let map: Map<String, Value> =
            serde_json::from_str(params).map_err(|e| format!("params: {e}"))?;
        let mut problems = Vec::new();
        for (k, v) in &map {
            let text = match v {
                Value::String(s) => s.clone(),
                Value::Array(items) => items
                    .iter()
                    .map(|i| {
                        i.as_str()
                            .map(str::to_string)
                            .unwrap_or_else(|| i.to_string())
                    })
                    .collect::<Vec<_>>()
                    .join(","),
                other => other.to_string(),
            };
            if let Err(e) = cfg.set(k, &text) {
                problems.push(e);
            }
        }
        if !problems.is_empty() {
            return Err(problems.join("; "));
        }
    }
    // wall-clock timers are unavailable on this target
    cfg.engine.record_timing = false;
    cfg.validate().map_err(|e| e.problems.join("; "))?;
    if cfg.substrate.n_nodes > MAX_NODES {
        return Err(format!("n_nodes is limited to {MAX_NODES} in the browser"));
    }
    if cfg.workload.n_windows > MAX_WINDOWS {
        return Err(format!(
            "n_windows is limited to {MAX_WINDOWS} in the browser"
        ));
    }
    Ok(cfg)
}

/// Substrate for `params` (config keys plus `seed`) as nodes with grid
/// positions and links.
pub fn generate_substrate_json(params: &str) -> Result<String, String> {
    let cfg = config_from_json(params)?;
    let sn = gen_substrate(&cfg.substrate_config(cfg.seed)).map_err(|e| e.to_string())?;
    serde_json::to_string(&topology(&sn)).map_err(|e| e.to_string())
}

#[derive(Serialize, Default)]
struct Series {
    embedder: String,
    accepted_cum: Vec<u64>,
    arrivals_cum: Vec<u64>,
    acceptance_ratio: Vec<Option<f64>>,
    revenue_cum: Vec<f64>,
    node_util: Vec<f64>,
    link_util: Vec<f64>,
    net_util: Vec<f64>,
    long_term_average_revenue: f64,
    final_acceptance_ratio: Option<f64>,
}

#[derive(Serialize)]
struct SimulationView {
    n_windows: u64,
    requests: usize,
    series: Vec<Series>,
}

/// Runs every configured embedder on the seed's inputs and returns the
/// per-window series.
pub fn simulate_json(params: &str) -> Result<String, String> {
    let cfg = config_from_json(params)?;
    let inputs = generate_inputs(&cfg, cfg.seed).map_err(|e| e.to_string())?;
    let mut series = Vec::new();
    for &kind in &cfg.embedders {
        let mut sim = Simulation::new(
            &inputs.substrate,
            &inputs.workload,
            cfg.workload.n_windows,
            &cfg.engine_config(kind),
        )
        .map_err(|e| e.to_string())?;
        let mut s = Series {
            embedder: kind.to_string(),
            ..Default::default()
        };
        let (mut arrivals, mut accepted) = (0, 0);
        while let Some(r) = sim.step().map_err(|e| e.to_string())? {
            arrivals += r.arrivals;
            accepted += r.accepted;
            s.arrivals_cum.push(arrivals);
            s.accepted_cum.push(accepted);
            s.acceptance_ratio
                .push((arrivals > 0).then(|| 100.0 * accepted as f64 / arrivals as f64));
            s.revenue_cum.push(r.revenue_cum);
            s.node_util.push(r.node_util);
            s.link_util.push(r.link_util);
            s.net_util.push(r.net_util);
        }
        let (report, _) = sim.finish().map_err(|e| e.to_string())?;
        s.long_term_average_revenue = report.summary.long_term_average_revenue;
        s.final_acceptance_ratio = report.summary.acceptance_ratio;
        series.push(s);
    }
    serde_json::to_string(&SimulationView {
        n_windows: cfg.workload.n_windows,
        requests: inputs.workload.len(),
        series,
    })
    .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct WorkedExample {
    substrate: TopologyView,
    vnodes: Vec<&'static str>,
    vnode_cpu: Vec<f64>,
    vlinks: Vec<(usize, usize, f64)>,
    node_map: Vec<usize>,
    link_paths: Vec<Vec<usize>>,
    candidates: Vec<CandidateTrace>,
}

/// The three-node triangle request embedded by RT-VNE on a six-node
/// substrate, with every root candidate's score.
pub fn worked_example_json() -> String {
    let mut sn = SubstrateNetwork::new();
    let layout = [
        (0.0, 0.0),
        (1.0, 0.0),
        (0.0, 2.0),
        (2.0, 1.0),
        (3.0, 2.0),
        (2.0, 0.0),
    ];
    for (i, pos) in layout.iter().enumerate() {
        let cpu = if i == 0 { 0.0 } else { 10.0 };
        sn.add_node(cpu, Some(*pos)).expect("valid node");
    }
    for (u, v, bw) in [
        (3, 1, 150.0),
        (3, 2, 130.0),
        (3, 4, 110.0),
        (3, 5, 105.0),
        (5, 1, 84.0),
        (5, 4, 100.0),
        (4, 2, 130.0),
        (0, 1, 191.0),
    ] {
        sn.add_link(NodeId(u), NodeId(v), bw).expect("valid link");
    }
    let mut vnr = VirtualNetworkRequest::new(VnrId(0), 0, 5);
    for cpu in [6.0, 3.0, 3.0] {
        vnr.add_vnode(cpu).expect("valid vnode");
    }
    for (a, b, bw) in [(0, 1, 4.0), (0, 2, 5.0), (1, 2, 2.0)] {
        vnr.add_vlink(a, b, bw).expect("valid vlink");
    }
    let result = rtvne_embed(&sn, &vnr, &EmbedderConfig::default());
    let emb = result.embedding().expect("worked example embeds");
    let view = WorkedExample {
        substrate: topology(&sn),
        vnodes: vec!["a", "b", "c"],
        vnode_cpu: vnr.vnodes.iter().map(|v| v.cpu).collect(),
        vlinks: vnr
            .vlinks
            .iter()
            .map(|l| (l.endpoints.0, l.endpoints.1, l.bw))
            .collect(),
        node_map: emb.node_map.iter().map(|n| n.0).collect(),
        link_paths: emb
            .link_map
            .iter()
            .map(|p| p.nodes.iter().map(|n| n.0).collect())
            .collect(),
        candidates: result.candidate_trace.clone(),
    };
    serde_json::to_string(&view).expect("serializable")
}

#[wasm_bindgen]
pub fn worked_example() -> String {
    worked_example_json()
}

#[wasm_bindgen]
pub fn generate_substrate(params_json: &str) -> Result<String, JsValue> {
    generate_substrate_json(params_json).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn simulate(params_json: &str) -> Result<String, JsValue> {
    simulate_json(params_json).map_err(|e| JsValue::from_str(&e))
}

/// Registry names of the available embedders.
#[wasm_bindgen]
pub fn embedder_names() -> String {
    let names: Vec<&str> = EmbedderKind::ALL.iter().map(|k| k.as_str()).collect();
    serde_json::to_string(&names).expect("serializable")
}
