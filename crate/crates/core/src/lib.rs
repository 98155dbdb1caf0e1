//! IPv6 packet-record compliance engine.
//!
//! The crate hosts two verification pipelines over packet records and a
//! shared substrate:
//!
//! - [`packet`]: record schema, JSON Lines parsing, canonical serialization.
//! - [`oracle`]: deterministic ground-truth checks for the eleven violation
//!   categories.
//! - [`inject`]: dataset construction by mutating compliant records with
//!   seeded violations.
//! - [`corpus`]: standards-text chunking, embedding, HNSW retrieval, and
//!   section reconstruction.
//! - [`agent`]: verdict grammar, prompt construction, and the pluggable
//!   agent backends (oracle-grounded, seeded-noisy, remote, scripted).
//! - [`debate`]: the per-section debate orchestrator and its run harness.
//! - [`rules`]: the predicate rule language, extraction/critic/refinement
//!   loop, and dataset-wide rule-matrix execution.
//! - [`metrics`]: classification metrics and report emission.

pub mod agent;
pub mod corpus;
pub mod debate;
pub mod inject;
pub mod metrics;
pub mod oracle;
pub mod packet;
pub mod rules;

pub use oracle::{ComplianceReport, Difficulty, Oracle, ViolationKind};
pub use packet::{FieldSchema, PacketRecord, TransportGroup};
