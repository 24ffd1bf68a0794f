use std::sync::Arc;

use crate::harness::ExecutionOutcome;
use crate::tree::DerivationTree;

/// One candidate input. The text is always the serialized tree. Clones
/// share the tree, text and outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    tree: Arc<DerivationTree>,
    text: Arc<str>,
    nodes: usize,
    pub fitness: Option<f64>,
    /// Exception reward at evaluation time, kept for weighted fitness.
    pub feedback: Option<f64>,
    /// One outcome per evaluated target, in target order.
    pub outcomes: Option<Arc<[ExecutionOutcome]>>,
}

impl Individual {
    pub fn new(tree: DerivationTree) -> Self {
        let text = tree.serialize().into();
        Individual {
            nodes: tree.node_count(),
            tree: Arc::new(tree),
            text,
            fitness: None,
            feedback: None,
            outcomes: None,
        }
    }

    pub fn tree(&self) -> &DerivationTree {
        &self.tree
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn into_tree(self) -> DerivationTree {
        Arc::unwrap_or_clone(self.tree)
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn is_evaluated(&self) -> bool {
        self.fitness.is_some()
    }
}

impl From<DerivationTree> for Individual {
    fn from(tree: DerivationTree) -> Self {
        Individual::new(tree)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Population {
    pub members: Vec<Individual>,
    pub generation: u64,
}

impl Population {
    pub fn new(members: Vec<Individual>) -> Self {
        Population {
            members,
            generation: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Index of the best member: highest fitness, then fewest nodes, then
    /// earliest. `None` if empty or any fitness is unset.
    pub fn best(&self) -> Option<usize> {
        let mut best: Option<(usize, f64, usize)> = None;
        for (i, m) in self.members.iter().enumerate() {
            let f = m.fitness?;
            let n = m.node_count();
            if best.is_none_or(|(_, bf, bn)| f > bf || (f == bf && n < bn)) {
                best = Some((i, f, n));
            }
        }
        best.map(|(i, _, _)| i)
    }
}
