//! Grammar-guided genetic-algorithm fuzzing.
//!
//! Inputs are derivation trees of a context-free grammar. A population of
//! them is evolved with structure-preserving one-point crossover and element
//! reordering, selected by tournament on branch-coverage fitness measured
//! against instrumented targets. A probabilistic-grammar baseline (rule
//! probabilities learned from samples and mutated instead of the inputs) is
//! available for comparison.

pub mod cli;
pub mod engine;
pub mod fitness;
pub mod genetic;
pub mod grammar;
pub mod harness;
pub mod report;
pub mod tree;

/// The JSON grammar used by default.
pub const JSON_GRAMMAR: &str = include_str!("../grammars/json.g");

/// A small JSON grammar with string-keyed objects only.
pub const LISTING_GRAMMAR: &str = include_str!("../grammars/listing.g");

/// Hand-written sample documents for learning rule probabilities.
pub const CLASSIC_SAMPLES: [&str; 5] = [
    include_str!("../samples/01-record.json"),
    include_str!("../samples/02-list.json"),
    include_str!("../samples/03-nested.json"),
    include_str!("../samples/04-mixed.json"),
    include_str!("../samples/05-array.json"),
];
