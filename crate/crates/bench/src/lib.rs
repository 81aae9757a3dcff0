//! Inputs shared by the benchmarks.

use rdfalign_core::generate::{generate_versions, GeneratorSpec};
use rdfalign_core::{disjoint_union, TripleGraph};

/// Combined graph of two generated versions with `rows` rows per table.
pub fn versioned_graph(rows: usize, rename: bool) -> TripleGraph {
    let spec = GeneratorSpec { rows, rename, seed: 11, ..GeneratorSpec::default() };
    let out = generate_versions(&spec).expect("bench spec is valid");
    disjoint_union(&out.v1, &out.v2)
}
