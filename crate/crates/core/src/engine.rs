//! Discrete-event, window-driven online embedding simulation.
//!
//! Time advances in integer scan windows. Within a window the engine first
//! releases embeddings that expire at that window, then collects the window's
//! arrivals, then attempts every queued request once: deferred requests
//! first (oldest arrival first), then new arrivals in the configured order.
//! A rejected request is requeued until it has been rejected more than
//! `max_deferrals` times, after which it is dropped. After the last window
//! all remaining embeddings are released.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::{Embedder, EmbedderConfig, EmbedderKind, Outcome};
use crate::graph::{
    verify_embedding, Embedding, GraphError, SubstrateNetwork, VirtualNetworkRequest, VnrId,
};
use crate::metrics::{revenue, utilization_lenient, Aggregates, MetricsRecord, SimulationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid engine config: {0}")]
    InvalidConfig(String),
    #[error("invalid workload: {0}")]
    InvalidWorkload(String),
    #[error("allocation failed: {0}")]
    Allocation(#[from] GraphError),
    #[error("audit failed at window {window}: {}", .issues.join("; "))]
    AuditFailed { window: u64, issues: Vec<String> },
}

/// Order in which a window's new arrivals are attempted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowOrdering {
    /// Largest total demand first.
    #[default]
    Descending,
    Ascending,
    /// By request id.
    Fifo,
}

impl FromStr for WindowOrdering {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "descending" | "desc" => Ok(Self::Descending),
            "ascending" | "asc" => Ok(Self::Ascending),
            "fifo" => Ok(Self::Fifo),
            _ => Err(format!(
                "unknown ordering `{s}` (expected descending, ascending or fifo)"
            )),
        }
    }
}

impl fmt::Display for WindowOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Descending => "descending",
            Self::Ascending => "ascending",
            Self::Fifo => "fifo",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub embedder: EmbedderKind,
    pub embedder_config: EmbedderConfig,
    /// A request rejected more than this many times is dropped.
    pub max_deferrals: u32,
    pub ordering: WindowOrdering,
    /// Verify every embedding and recompute residuals after every window.
    pub audit: bool,
    /// Measure wall-clock embedding time. Off by default so reports are
    /// byte-reproducible.
    pub record_timing: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            embedder: EmbedderKind::RtVne,
            embedder_config: EmbedderConfig::default(),
            max_deferrals: 3,
            ordering: WindowOrdering::Descending,
            audit: false,
            record_timing: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    Departure(VnrId),
    WindowStart,
    Arrival(VnrId),
}

impl EventKind {
    fn rank(self) -> u8 {
        match self {
            Self::Departure(_) => 0,
            Self::WindowStart => 1,
            Self::Arrival(_) => 2,
        }
    }
}

/// A timestamped event. At equal times departures precede the window start,
/// which precedes arrivals; insertion order breaks remaining ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimEvent {
    pub time: u64,
    pub kind: EventKind,
    pub sequence: u64,
}

impl Ord for SimEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .cmp(&other.time)
            .then(self.kind.rank().cmp(&other.kind.rank()))
            .then(self.sequence.cmp(&other.sequence))
    }
}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<SimEvent>>,
    next_sequence: u64,
}

impl EventQueue {
    pub fn push(&mut self, time: u64, kind: EventKind) {
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.heap.push(Reverse(SimEvent {
            time,
            kind,
            sequence,
        }));
    }

    pub fn pop(&mut self) -> Option<SimEvent> {
        self.heap.pop().map(|Reverse(e)| e)
    }

    pub fn peek(&self) -> Option<&SimEvent> {
        self.heap.peek().map(|Reverse(e)| e)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

/// Result of an invariant check over the current simulation state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuditReport {
    pub issues: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Step-wise simulation over a fixed horizon of `n_windows` windows.
pub struct Simulation {
    cfg: EngineConfig,
    embedder: Box<dyn Embedder>,
    pristine: SubstrateNetwork,
    substrate: SubstrateNetwork,
    vnrs: BTreeMap<VnrId, VirtualNetworkRequest>,
    live: BTreeMap<VnrId, Embedding>,
    deferred: Vec<VnrId>,
    events: EventQueue,
    clock: u64,
    n_windows: u64,
    revenue_cum: f64,
    records: Vec<MetricsRecord>,
    drained: bool,
}

impl Simulation {
    pub fn new(
        sn: &SubstrateNetwork,
        workload: &[VirtualNetworkRequest],
        n_windows: u64,
        cfg: &EngineConfig,
    ) -> Result<Self, EngineError> {
        cfg.embedder_config
            .validate()
            .map_err(EngineError::InvalidConfig)?;
        if !sn.live_vnrs().is_empty() || !sn.is_pristine() {
            return Err(EngineError::InvalidWorkload(
                "substrate must start with no allocations".into(),
            ));
        }
        let mut events = EventQueue::default();
        let mut vnrs = BTreeMap::new();
        let mut seen = HashSet::new();
        for vnr in workload {
            if !seen.insert(vnr.id) {
                return Err(EngineError::InvalidWorkload(format!(
                    "duplicate request id {}",
                    vnr.id
                )));
            }
            if vnr.arrival_time >= n_windows {
                return Err(EngineError::InvalidWorkload(format!(
                    "request {} arrives at window {} but the horizon is {n_windows} windows",
                    vnr.id, vnr.arrival_time
                )));
            }
            if vnr.lifetime == 0 {
                return Err(EngineError::InvalidWorkload(format!(
                    "request {} has zero lifetime",
                    vnr.id
                )));
            }
            if vnr.vnodes.is_empty() {
                return Err(EngineError::InvalidWorkload(format!(
                    "request {} has no vnodes",
                    vnr.id
                )));
            }
            let mut vnr = vnr.clone();
            vnr.deferral_count = 0;
            events.push(vnr.arrival_time, EventKind::Arrival(vnr.id));
            vnrs.insert(vnr.id, vnr);
        }
        for w in 0..n_windows {
            events.push(w, EventKind::WindowStart);
        }
        Ok(Self {
            cfg: cfg.clone(),
            embedder: cfg.embedder.build(cfg.embedder_config),
            pristine: sn.clone(),
            substrate: sn.clone(),
            vnrs,
            live: BTreeMap::new(),
            deferred: Vec::new(),
            events,
            clock: 0,
            n_windows,
            revenue_cum: 0.0,
            records: Vec::with_capacity(n_windows as usize),
            drained: false,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn substrate(&self) -> &SubstrateNetwork {
        &self.substrate
    }

    pub fn live(&self) -> &BTreeMap<VnrId, Embedding> {
        &self.live
    }

    pub fn request(&self, id: VnrId) -> Option<&VirtualNetworkRequest> {
        self.vnrs.get(&id)
    }

    /// Requests waiting for their next attempt.
    pub fn deferred(&self) -> &[VnrId] {
        &self.deferred
    }

    /// Index of the next window to simulate.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn n_windows(&self) -> u64 {
        self.n_windows
    }

    pub fn is_done(&self) -> bool {
        self.clock >= self.n_windows
    }

    pub fn records(&self) -> &[MetricsRecord] {
        &self.records
    }

    fn depart(&mut self, id: VnrId) -> Result<(), EngineError> {
        let emb = self.live.remove(&id).expect("departure of a live request");
        self.substrate.release(&self.vnrs[&id], &emb)?;
        Ok(())
    }

    fn demand(&self, id: VnrId) -> f64 {
        let v = &self.vnrs[&id];
        v.total_cpu() + self.cfg.embedder_config.psi * v.total_bw()
    }

    /// Simulates the next window and returns its record, or `None` once the
    /// horizon is reached.
    pub fn step(&mut self) -> Result<Option<&MetricsRecord>, EngineError> {
        if self.is_done() {
            return Ok(None);
        }
        let now = self.clock;
        let mut arrivals = Vec::new();
        while let Some(ev) = self.events.peek().copied() {
            if ev.time > now {
                break;
            }
            debug_assert_eq!(ev.time, now);
            self.events.pop();
            match ev.kind {
                EventKind::Departure(id) => self.depart(id)?,
                EventKind::WindowStart => {}
                EventKind::Arrival(id) => arrivals.push(id),
            }
        }

        match self.cfg.ordering {
            WindowOrdering::Descending => {
                arrivals.sort_by(|a, b| self.demand(*b).total_cmp(&self.demand(*a)).then(a.cmp(b)))
            }
            WindowOrdering::Ascending => {
                arrivals.sort_by(|a, b| self.demand(*a).total_cmp(&self.demand(*b)).then(a.cmp(b)))
            }
            WindowOrdering::Fifo => arrivals.sort(),
        }
        let mut queue = std::mem::take(&mut self.deferred);
        queue.sort_by_key(|id| (self.vnrs[id].arrival_time, *id));
        let n_arrivals = arrivals.len() as u64;
        queue.extend(arrivals);

        let psi = self.cfg.embedder_config.psi;
        let mut record = MetricsRecord {
            window: now,
            arrivals: n_arrivals,
            accepted: 0,
            rejected_final: 0,
            deferred: 0,
            revenue_window: 0.0,
            revenue_cum: 0.0,
            node_util: 0.0,
            link_util: 0.0,
            net_util: 0.0,
            mean_embed_seconds: 0.0,
        };
        let mut embed_seconds = 0.0;
        for id in queue {
            let vnr = &self.vnrs[&id];
            let started = self.cfg.record_timing.then(Instant::now);
            let result = self.embedder.embed(&self.substrate, vnr);
            if let Some(t) = started {
                embed_seconds += t.elapsed().as_secs_f64();
            }
            match result.outcome {
                Outcome::Accepted(mut emb) => {
                    if self.cfg.audit {
                        let check = verify_embedding(&self.substrate, vnr, &emb);
                        if !check.passed() {
                            return Err(EngineError::AuditFailed {
                                window: now,
                                issues: check
                                    .violations
                                    .iter()
                                    .map(|v| format!("request {id}: {v:?}"))
                                    .collect(),
                            });
                        }
                    }
                    self.substrate.allocate(vnr, &emb)?;
                    emb.embed_time = now;
                    emb.expiry_time = now + vnr.lifetime;
                    self.events.push(emb.expiry_time, EventKind::Departure(id));
                    record.revenue_window += revenue(vnr, vnr.lifetime as f64, psi);
                    record.accepted += 1;
                    self.live.insert(id, emb);
                }
                Outcome::Rejected(_) => {
                    let vnr = self.vnrs.get_mut(&id).expect("known request");
                    vnr.deferral_count += 1;
                    if vnr.deferral_count <= self.cfg.max_deferrals {
                        record.deferred += 1;
                        self.deferred.push(id);
                    } else {
                        record.rejected_final += 1;
                    }
                }
            }
        }

        self.revenue_cum += record.revenue_window;
        record.revenue_cum = self.revenue_cum;
        let u = utilization_lenient(&self.substrate);
        record.node_util = u.node;
        record.link_util = u.link;
        record.net_util = u.net;
        let attempts = record.attempts();
        if attempts > 0 {
            record.mean_embed_seconds = embed_seconds / attempts as f64;
        }

        self.clock += 1;
        self.records.push(record);
        if self.cfg.audit {
            let report = audit(self);
            if !report.passed() {
                return Err(EngineError::AuditFailed {
                    window: now,
                    issues: report.issues,
                });
            }
        }
        Ok(self.records.last())
    }

    /// Runs any remaining windows, releases every live embedding and builds
    /// the report.
    pub fn finish(mut self) -> Result<(SimulationReport, SubstrateNetwork), EngineError> {
        while self.step()?.is_some() {}
        if !self.drained {
            while let Some(ev) = self.events.pop() {
                if let EventKind::Departure(id) = ev.kind {
                    self.depart(id)?;
                }
            }
            self.drained = true;
        }
        let report = SimulationReport {
            config: self.cfg.clone(),
            n_windows: self.n_windows,
            final_state_restored: self.substrate.is_pristine()
                && self.substrate.live_vnrs().is_empty(),
            summary: Aggregates::from_records(&self.records),
            records: self.records,
        };
        Ok((report, self.substrate))
    }
}

/// Simulates `workload` on a private copy of `sn` for `n_windows` windows.
pub fn run(
    sn: &SubstrateNetwork,
    workload: &[VirtualNetworkRequest],
    n_windows: u64,
    cfg: &EngineConfig,
) -> Result<SimulationReport, EngineError> {
    Ok(Simulation::new(sn, workload, n_windows, cfg)?.finish()?.0)
}

/// Checks every live embedding against the installed capacities and
/// recomputes every residual from scratch; residuals must match bit for bit
/// and stay within `[0, total]`.
pub fn audit(sim: &Simulation) -> AuditReport {
    let mut issues = Vec::new();
    let sn = &sim.substrate;
    let mut cpu: Vec<f64> = sim.pristine.nodes().iter().map(|n| n.cpu_total).collect();
    let mut bw: Vec<f64> = sim.pristine.links().iter().map(|l| l.bw_total).collect();

    let live_ids: Vec<VnrId> = sim.live.keys().copied().collect();
    let tracked: Vec<VnrId> = sn.live_vnrs().iter().copied().collect();
    if live_ids != tracked {
        issues.push(format!(
            "live set mismatch: engine holds {live_ids:?}, substrate tracks {tracked:?}"
        ));
    }

    for (id, emb) in &sim.live {
        let vnr = &sim.vnrs[id];
        let check = verify_embedding(&sim.pristine, vnr, emb);
        if !check.passed() {
            issues.push(format!("request {id}: {:?}", check.violations));
            continue;
        }
        // between windows `clock` is the next window; anything expiring
        // before it should already have been released
        if emb.duration() != vnr.lifetime || emb.expiry_time < sim.clock {
            issues.push(format!(
                "request {id}: live over [{}, {}) before window {}",
                emb.embed_time, emb.expiry_time, sim.clock
            ));
        }
        for (v, host) in emb.node_map.iter().enumerate() {
            cpu[host.0] -= vnr.vnodes[v].cpu;
        }
        for (l, path) in emb.link_map.iter().enumerate() {
            for link in &path.links {
                bw[link.0] -= vnr.vlinks[l].bw;
            }
        }
    }

    for (node, expected) in sn.nodes().iter().zip(&cpu) {
        if node.cpu_residual != *expected {
            issues.push(format!(
                "node {}: residual {} but live embeddings leave {}",
                node.id, node.cpu_residual, expected
            ));
        }
        if !(0.0..=node.cpu_total).contains(&node.cpu_residual) {
            issues.push(format!(
                "node {}: residual {} out of range",
                node.id, node.cpu_residual
            ));
        }
    }
    for (link, expected) in sn.links().iter().zip(&bw) {
        if link.bw_residual != *expected {
            issues.push(format!(
                "link {}: residual {} but live embeddings leave {}",
                link.id, link.bw_residual, expected
            ));
        }
        if !(0.0..=link.bw_total).contains(&link.bw_residual) {
            issues.push(format!(
                "link {}: residual {} out of range",
                link.id, link.bw_residual
            ));
        }
    }
    AuditReport { issues }
}
