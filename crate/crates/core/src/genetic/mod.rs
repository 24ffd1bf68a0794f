//! Variation and selection over derivation trees.

mod crossover;
mod individual;
mod mutation;
mod selection;
pub mod sequence;

pub use crossover::{
    one_point_crossover, splice_at, splice_lengths, subtree_exchange, CrossoverError, CrossoverKind,
};
pub use individual::{Individual, Population};
pub use mutation::{reorder_at, reorder_candidates, reorder_mutation};
pub use selection::{tournament_select, SelectionError};
pub use sequence::{build_container, ContainerShape, Shapes};
