use rand::Rng;
use thiserror::Error;

use super::sequence::{build_container, Shapes};
use crate::grammar::Grammar;
use crate::tree::{DerivationTree, NodePath};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CrossoverError {
    #[error("parents share no nonterminal")]
    Infeasible,
    #[error("cut {cut} is past the end of a {len}-element sequence")]
    CutOutOfRange { cut: usize, len: usize },
    #[error("parents have no compatible root sequences")]
    NoRootSequence,
}

/// How a pair of children was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossoverKind {
    Splice { i: usize, j: usize },
    SubtreeExchange,
}

/// One-point crossover over root element sequences. Parents whose root
/// containers differ in kind, or where either is empty, exchange a random
/// pair of same-rule subtrees instead.
pub fn one_point_crossover<R: Rng + ?Sized>(
    grammar: &Grammar,
    shapes: &Shapes,
    a: &DerivationTree,
    b: &DerivationTree,
    rng: &mut R,
) -> Result<(DerivationTree, DerivationTree, CrossoverKind), CrossoverError> {
    if let Some((la, lb)) = splice_lengths(shapes, a, b) {
        let i = rng.random_range(0..=la);
        let j = rng.random_range(0..=lb);
        let (c1, c2) = splice_at(grammar, shapes, a, b, i, j)?;
        return Ok((c1, c2, CrossoverKind::Splice { i, j }));
    }
    let (c1, c2) = subtree_exchange(a, b, rng)?;
    Ok((c1, c2, CrossoverKind::SubtreeExchange))
}

/// Root sequence lengths when both parents qualify for splicing.
pub fn splice_lengths(shapes: &Shapes, a: &DerivationTree, b: &DerivationTree) -> Option<(usize, usize)> {
    let (_, na) = root(shapes, a)?;
    let (_, nb) = root(shapes, b)?;
    if na.rule() != nb.rule() {
        return None;
    }
    let la = shapes.elements(na)?.len();
    let lb = shapes.elements(nb)?.len();
    (la > 0 && lb > 0).then_some((la, lb))
}

fn root<'t>(shapes: &Shapes, t: &'t DerivationTree) -> Option<(NodePath, &'t DerivationTree)> {
    let p = shapes.root_container(t)?;
    let node = t.get(&p)?;
    Some((p, node))
}

/// child1 = A[..i] ++ B[j..] in `a`'s skeleton; child2 = B[..j] ++ A[i..]
/// in `b`'s.
pub fn splice_at(
    grammar: &Grammar,
    shapes: &Shapes,
    a: &DerivationTree,
    b: &DerivationTree,
    i: usize,
    j: usize,
) -> Result<(DerivationTree, DerivationTree), CrossoverError> {
    let (pa, na) = root(shapes, a).ok_or(CrossoverError::NoRootSequence)?;
    let (pb, nb) = root(shapes, b).ok_or(CrossoverError::NoRootSequence)?;
    if na.rule() != nb.rule() {
        return Err(CrossoverError::NoRootSequence);
    }
    let shape = shapes.shape_of(na).ok_or(CrossoverError::NoRootSequence)?;
    let ea = shapes.elements(na).unwrap_or_default();
    let eb = shapes.elements(nb).unwrap_or_default();
    if i > ea.len() {
        return Err(CrossoverError::CutOutOfRange { cut: i, len: ea.len() });
    }
    if j > eb.len() {
        return Err(CrossoverError::CutOutOfRange { cut: j, len: eb.len() });
    }
    let first: Vec<DerivationTree> = ea[..i].iter().chain(&eb[j..]).map(|e| (*e).clone()).collect();
    let second: Vec<DerivationTree> = eb[..j].iter().chain(&ea[i..]).map(|e| (*e).clone()).collect();
    let c1 = a.with_replaced(&pa, build_container(grammar, shape, first));
    let c2 = b.with_replaced(&pb, build_container(grammar, shape, second));
    Ok((
        c1.expect("path from root_container"),
        c2.expect("path from root_container"),
    ))
}

/// Swaps one random subtree of `a` with a random subtree of `b` rooted at
/// the same rule. Non-root nodes of `a` are preferred.
pub fn subtree_exchange<R: Rng + ?Sized>(
    a: &DerivationTree,
    b: &DerivationTree,
    rng: &mut R,
) -> Result<(DerivationTree, DerivationTree), CrossoverError> {
    let nodes_a = a.nonterminal_paths();
    let nodes_b = b.nonterminal_paths();
    let in_b = |rule| nodes_b.iter().any(|(_, r)| *r == rule);
    let shared: Vec<&(NodePath, usize)> = nodes_a.iter().filter(|(_, r)| in_b(*r)).collect();
    let non_root: Vec<&(NodePath, usize)> = shared.iter().copied().filter(|(p, _)| !p.is_empty()).collect();
    let pool = if non_root.is_empty() { &shared } else { &non_root };
    if pool.is_empty() {
        return Err(CrossoverError::Infeasible);
    }
    let (path_a, rule) = pool[rng.random_range(0..pool.len())];
    let candidates: Vec<&NodePath> = nodes_b.iter().filter(|(_, r)| r == rule).map(|(p, _)| p).collect();
    let path_b = candidates[rng.random_range(0..candidates.len())];
    let sub_a = a.get(path_a).expect("path from a").clone();
    let sub_b = b.get(path_b).expect("path from b").clone();
    let c1 = a.with_replaced(path_a, sub_b).expect("path from a");
    let c2 = b.with_replaced(path_b, sub_a).expect("path from b");
    Ok((c1, c2))
}
