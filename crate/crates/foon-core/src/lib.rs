//! Task planning over functional object-oriented networks.
//!
//! A network is built from line-oriented annotation files describing
//! functional units (input objects, one motion, output objects). Subgraph
//! files merge into a deduplicated universal network, and task trees — the
//! ordered unit sequences that produce a goal object from a kitchen
//! inventory — are retrieved with iterative deepening or one of two greedy
//! breadth-first heuristics.
//!
//! Modules:
//!
//! * [`model`] — domain types and canonical keys
//! * [`parser`] — annotation/kitchen file parsing and canonical serialization
//! * [`graph`] — the merged universal network and its creators index
//! * [`retrieval`] — the three retrieval strategies, finalization, validation
//! * [`bench`] — brute-force oracle enumeration, timing tables, CSV
//! * [`corpus`] — seeded random network generation for tests and benchmarks
//! * [`dot`] — Graphviz export

pub mod bench;
pub mod corpus;
pub mod dot;
pub mod graph;
pub mod model;
pub mod parser;
pub mod retrieval;

pub use graph::UniversalFoon;
pub use model::{
    FunctionalUnit, KitchenItem, ModelError, MotionFlag, MotionNode, ObjectKey, ObjectNode, UnitKey,
};
pub use parser::{ParseDiagnostic, parse_kitchen, parse_subgraph, serialize_subgraph};
pub use retrieval::{
    RetrievalError, RetrievalQuery, Strategy, TaskTree, ValidationReport, retrieve, validate,
};
