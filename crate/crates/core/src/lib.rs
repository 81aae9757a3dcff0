//! Alignment of two versions of an RDF graph.
//!
//! Nodes of the two versions are matched by coloring a combined graph:
//! exact partitions from label equality and bisimulation refinement, then
//! weighted partitions that tolerate small literal and structural edits.

pub mod edit;
pub mod eval;
pub mod fixtures;
pub mod generate;
pub mod keys;
pub mod model;
pub mod ntriples;
pub mod overlap;
pub mod partition;
pub mod refine;
pub mod weighted;

pub use keys::{node_keys, NodeKey};
pub use model::{disjoint_union, GraphBuilder, Label, Literal, NodeId, Origin, Triple, TripleGraph};
pub use partition::{align, Color, ColorDesc, ColorInterner, Partition};
pub use refine::{bisim_partition, deblank_partition, hybrid_partition, Scope};
pub use weighted::{Weight, WeightedPartition};
