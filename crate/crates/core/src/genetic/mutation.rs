use rand::seq::SliceRandom;
use rand::Rng;

use super::sequence::Shapes;
use crate::tree::{DerivationTree, NodePath};

/// Containers of `tree` holding at least two elements.
pub fn reorder_candidates(shapes: &Shapes, tree: &DerivationTree) -> Vec<NodePath> {
    shapes
        .containers(tree)
        .into_iter()
        .filter(|p| {
            tree.get(p)
                .and_then(|n| shapes.elements(n))
                .is_some_and(|e| e.len() >= 2)
        })
        .collect()
}

/// Permutes the elements of one random container with at least two of
/// them, using a random non-identity permutation. Returns the new tree and
/// the mutated node's path, or an unchanged copy and `None` when no node
/// qualifies.
pub fn reorder_mutation<R: Rng + ?Sized>(
    shapes: &Shapes,
    tree: &DerivationTree,
    rng: &mut R,
) -> (DerivationTree, Option<NodePath>) {
    let candidates = reorder_candidates(shapes, tree);
    if candidates.is_empty() {
        return (tree.clone(), None);
    }
    let path = candidates[rng.random_range(0..candidates.len())].clone();
    let n = tree
        .get(&path)
        .and_then(|node| shapes.elements(node))
        .map_or(0, |e| e.len());
    let identity: Vec<usize> = (0..n).collect();
    let mut perm = identity.clone();
    while perm == identity {
        perm.shuffle(rng);
    }
    let out = reorder_at(shapes, tree, &path, &perm).expect("candidate is a container");
    (out, Some(path))
}

/// Places element `perm[k]` into slot `k` of the container at `path`. The
/// list skeleton and separators are left as they are.
pub fn reorder_at(
    shapes: &Shapes,
    tree: &DerivationTree,
    path: &[usize],
    perm: &[usize],
) -> Option<DerivationTree> {
    let node = tree.get(path)?;
    let slots = shapes.element_slots(node)?;
    if perm.len() != slots.len() {
        return None;
    }
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
            return None;
        }
    }
    let mut target = node.clone();
    let mut items: Vec<Option<DerivationTree>> = slots
        .iter()
        .map(|s| target.get_mut(s).map(|n| std::mem::replace(n, DerivationTree::terminal(String::new()))))
        .collect::<Option<Vec<_>>>()?
        .into_iter()
        .map(Some)
        .collect();
    for (slot, &src) in slots.iter().zip(perm) {
        *target.get_mut(slot)? = items[src].take()?;
    }
    tree.with_replaced(path, target)
}
