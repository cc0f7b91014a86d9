//! Exact computation in graph products of groups.
//!
//! A graph product is built from a finite simple graph and a group attached
//! to each vertex; adjacent vertex groups commute. Words are spelled in the
//! prism generating set (every nontrivial element of every vertex group is a
//! single generator). This crate provides:
//!
//! - geodesic normal forms and word arithmetic ([`words`]),
//! - combinatorial disk diagrams with combing ([`diagram`]),
//! - hyperplanes, the star metric and contact-graph distance bounds
//!   ([`contact`]),
//! - empirical subgroup diagnostics: join-busting, distortion and
//!   stability obstructions ([`analyze`]),
//! - breadth-first Cayley-graph oracles used to cross-check the fast
//!   implementations ([`oracle`]).

pub mod analyze;
pub mod config;
pub mod contact;
pub mod diagram;
pub mod graph;
pub mod groups;
pub mod oracle;
pub mod render;
pub mod sampling;
pub mod words;

pub use config::ProjectConfig;
pub use graph::{DefiningGraph, VertexId, VertexSet};
pub use groups::{GroupElement, GroupSpec};
pub use words::{Letter, PrismWord};
