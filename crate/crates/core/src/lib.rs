//! Online virtual network embedding: substrate and request models, the
//! RT-VNE, G-SP and CC-VNE embedders, seeded generators, a window-driven
//! simulation engine and its metrics.

pub mod embed;
pub mod engine;
pub mod graph;
pub mod metrics;
pub mod netgen;
pub mod scenario;

pub use embed::{EmbedResult, Embedder, EmbedderConfig, EmbedderKind, Outcome, RejectReason};
pub use engine::{run, EngineConfig, EngineError, Simulation, WindowOrdering};
pub use graph::{
    Embedding, GraphError, LinkId, NodeId, Path, SubstrateNetwork, VirtualNetworkRequest, VnrId,
};
pub use metrics::{MetricsRecord, SimulationReport};
pub use scenario::{ConfigError, ScenarioConfig};
