//! Revenue, acceptance and utilization metrics, plus the report schemas.
//!
//! # Per-window CSV
//!
//! Header line, then one row per window, comma-separated, no quoting:
//!
//! ```text
//! window,arrivals,accepted,rejected_final,deferred,revenue_window,revenue_cum,node_util,link_util,net_util,mean_embed_seconds
//! ```
//!
//! Integers are decimal; reals use Rust's shortest round-trip formatting, so
//! parsing a row yields bit-identical values.
//!
//! # JSON summary
//!
//! `{ "config": <EngineConfig>, "n_windows": u64, "final_state_restored": bool,
//!    "summary": <Aggregates> }`, pretty-printed with a trailing newline.
//! `summary.acceptance_ratio` is `null` when no requests arrived.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::EngineConfig;
use crate::graph::{SubstrateNetwork, VirtualNetworkRequest};

pub const CSV_HEADER: &str = "window,arrivals,accepted,rejected_final,deferred,revenue_window,revenue_cum,node_util,link_util,net_util,mean_embed_seconds";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("no requests arrived; acceptance ratio is undefined")]
    NoRequests,
    #[error("total {0} capacity is zero")]
    ZeroCapacity(&'static str),
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
}

/// Snapshot of one scan window, taken after its embedding attempts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub window: u64,
    /// Requests that arrived in this window.
    pub arrivals: u64,
    pub accepted: u64,
    /// Requests dropped after exhausting their deferrals.
    pub rejected_final: u64,
    /// Requests requeued for the next window.
    pub deferred: u64,
    /// Revenue of requests accepted in this window, each for its full lifetime.
    pub revenue_window: f64,
    pub revenue_cum: f64,
    pub node_util: f64,
    pub link_util: f64,
    pub net_util: f64,
    /// Mean wall-clock time per embedding attempt; zero unless timing is recorded.
    pub mean_embed_seconds: f64,
}

impl MetricsRecord {
    pub fn attempts(&self) -> u64 {
        self.accepted + self.rejected_final + self.deferred
    }
}

/// Revenue of serving `vnr` for `t_d` windows.
pub fn revenue(vnr: &VirtualNetworkRequest, t_d: f64, psi: f64) -> f64 {
    (vnr.total_cpu() + psi * vnr.total_bw()) * t_d
}

/// Total accepted revenue divided by the number of simulated windows.
pub fn long_term_average_revenue(records: &[MetricsRecord]) -> f64 {
    match records.last() {
        Some(last) => last.revenue_cum / records.len() as f64,
        None => 0.0,
    }
}

/// Percentage of arrived requests that were eventually embedded.
pub fn acceptance_ratio(records: &[MetricsRecord]) -> Result<f64, MetricsError> {
    let arrivals: u64 = records.iter().map(|r| r.arrivals).sum();
    if arrivals == 0 {
        return Err(MetricsError::NoRequests);
    }
    let accepted: u64 = records.iter().map(|r| r.accepted).sum();
    Ok(100.0 * accepted as f64 / arrivals as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Utilization {
    pub node: f64,
    pub link: f64,
    pub net: f64,
}

fn allocated(sn: &SubstrateNetwork) -> (f64, f64, f64, f64) {
    let cpu_total = sn.total_cpu();
    let bw_total = sn.total_bw();
    let cpu_used: f64 = sn
        .nodes()
        .iter()
        .map(|n| n.cpu_total - n.cpu_residual)
        .sum();
    let bw_used: f64 = sn.links().iter().map(|l| l.bw_total - l.bw_residual).sum();
    (cpu_used, cpu_total, bw_used, bw_total)
}

/// Share of installed CPU, bandwidth and both combined held by live embeddings.
pub fn utilization(sn: &SubstrateNetwork) -> Result<Utilization, MetricsError> {
    let (cpu_used, cpu_total, bw_used, bw_total) = allocated(sn);
    if cpu_total == 0.0 {
        return Err(MetricsError::ZeroCapacity("cpu"));
    }
    if bw_total == 0.0 {
        return Err(MetricsError::ZeroCapacity("bandwidth"));
    }
    Ok(Utilization {
        node: cpu_used / cpu_total,
        link: bw_used / bw_total,
        net: (cpu_used + bw_used) / (cpu_total + bw_total),
    })
}

/// Like [`utilization`], but a component with zero capacity reports 0.
pub(crate) fn utilization_lenient(sn: &SubstrateNetwork) -> Utilization {
    let (cpu_used, cpu_total, bw_used, bw_total) = allocated(sn);
    let ratio = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    Utilization {
        node: ratio(cpu_used, cpu_total),
        link: ratio(bw_used, bw_total),
        net: ratio(cpu_used + bw_used, cpu_total + bw_total),
    }
}

/// Whole-run figures, all derived from the per-window records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub long_term_average_revenue: f64,
    pub total_revenue: f64,
    /// Percent; `None` when nothing arrived.
    pub acceptance_ratio: Option<f64>,
    pub total_arrivals: u64,
    pub total_accepted: u64,
    pub total_dropped: u64,
    /// Requests still queued when the horizon ended.
    pub pending_at_end: u64,
    pub mean_node_util: f64,
    pub mean_link_util: f64,
    pub mean_net_util: f64,
    /// Attempt-weighted mean embedding time.
    pub mean_embed_seconds: f64,
}

impl Aggregates {
    pub fn from_records(records: &[MetricsRecord]) -> Self {
        let n = records.len().max(1) as f64;
        let total_arrivals: u64 = records.iter().map(|r| r.arrivals).sum();
        let total_accepted: u64 = records.iter().map(|r| r.accepted).sum();
        let total_dropped: u64 = records.iter().map(|r| r.rejected_final).sum();
        let attempts: u64 = records.iter().map(MetricsRecord::attempts).sum();
        let embed_time: f64 = records
            .iter()
            .map(|r| r.mean_embed_seconds * r.attempts() as f64)
            .sum();
        Self {
            long_term_average_revenue: long_term_average_revenue(records),
            total_revenue: records.last().map_or(0.0, |r| r.revenue_cum),
            acceptance_ratio: acceptance_ratio(records).ok(),
            total_arrivals,
            total_accepted,
            total_dropped,
            pending_at_end: total_arrivals - total_accepted - total_dropped,
            mean_node_util: records.iter().map(|r| r.node_util).sum::<f64>() / n,
            mean_link_util: records.iter().map(|r| r.link_util).sum::<f64>() / n,
            mean_net_util: records.iter().map(|r| r.net_util).sum::<f64>() / n,
            mean_embed_seconds: if attempts == 0 {
                0.0
            } else {
                embed_time / attempts as f64
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: EngineConfig,
    pub n_windows: u64,
    /// Every residual equalled its total after the final drain.
    pub final_state_restored: bool,
    pub summary: Aggregates,
    #[serde(skip)]
    pub records: Vec<MetricsRecord>,
}

impl SimulationReport {
    pub fn to_csv(&self) -> String {
        records_to_csv(&self.records)
    }

    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn records_to_csv(records: &[MetricsRecord]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.window,
            r.arrivals,
            r.accepted,
            r.rejected_final,
            r.deferred,
            r.revenue_window,
            r.revenue_cum,
            r.node_util,
            r.link_util,
            r.net_util,
            r.mean_embed_seconds
        )
        .unwrap();
    }
    out
}

pub fn records_from_csv(input: &str) -> Result<Vec<MetricsRecord>, MetricsError> {
    let mut lines = input.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => {
            return Err(MetricsError::Csv {
                line: 1,
                message: "missing or unexpected header".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| MetricsError::Csv {
            line: i + 1,
            message,
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(bad(format!("expected 11 fields, found {}", f.len())));
        }
        let int = |k: usize| {
            f[k].parse::<u64>()
                .map_err(|e| bad(format!("field {k}: {e}")))
        };
        let real = |k: usize| {
            f[k].parse::<f64>()
                .map_err(|e| bad(format!("field {k}: {e}")))
        };
        out.push(MetricsRecord {
            window: int(0)?,
            arrivals: int(1)?,
            accepted: int(2)?,
            rejected_final: int(3)?,
            deferred: int(4)?,
            revenue_window: real(5)?,
            revenue_cum: real(6)?,
            node_util: real(7)?,
            link_util: real(8)?,
            net_util: real(9)?,
            mean_embed_seconds: real(10)?,
        });
    }
    Ok(out)
}
