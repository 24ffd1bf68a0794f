use rand::Rng;
use thiserror::Error;

use super::{Grammar, RuleId, Symbol};
use crate::tree::DerivationTree;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerationError {
    #[error("max_depth must be at least 1")]
    ZeroDepth,
    #[error("rule `{rule}` cannot produce a complete tree within depth {max_depth}")]
    Impossible { rule: String, max_depth: u32 },
}

/// Default node budget for generation; see [`generate_random_within`].
pub const DEFAULT_MAX_NODES: usize = 20_000;

/// Expands `rule` top-down. `choose` receives the rule and its admissible
/// alternatives (never empty) and returns one of them.
pub(crate) fn expand<F>(
    grammar: &Grammar,
    rule: RuleId,
    max_depth: u32,
    max_nodes: usize,
    choose: &mut F,
) -> Result<DerivationTree, GenerationError>
where
    F: FnMut(RuleId, &[usize]) -> usize,
{
    if max_depth == 0 {
        return Err(GenerationError::ZeroDepth);
    }
    match grammar.min_height(rule) {
        Some(h) if h <= max_depth => {
            let mut left = max_nodes;
            Ok(expand_within(grammar, rule, max_depth, &mut left, choose))
        }
        _ => Err(GenerationError::Impossible {
            rule: grammar.name(rule).to_string(),
            max_depth,
        }),
    }
}

fn expand_within<F>(grammar: &Grammar, rule: RuleId, budget: u32, left: &mut usize, choose: &mut F) -> DerivationTree
where
    F: FnMut(RuleId, &[usize]) -> usize,
{
    let mut admissible: Vec<usize> = grammar.admissible(rule, budget).collect();
    debug_assert!(!admissible.is_empty());
    if *left == 0 {
        // Out of nodes: only the shortest alternatives, which strictly
        // shrink the remaining height and so finish quickly.
        let h = |a: &usize| grammar.alt_min_height(rule, *a);
        let lowest = admissible.iter().filter_map(h).min();
        admissible.retain(|a| h(a) == lowest);
    }
    let alt = choose(rule, &admissible);
    let symbols = &grammar.alternatives(rule)[alt];
    *left = left.saturating_sub(1 + symbols.len());
    let children = symbols
        .iter()
        .map(|sym| match sym {
            Symbol::Terminal(t) => DerivationTree::Terminal(t.clone()),
            Symbol::Nonterminal(n) => expand_within(grammar, *n, budget - 1, left, choose),
        })
        .collect();
    DerivationTree::Nonterminal {
        rule,
        alt,
        children,
    }
}

/// Samples a tree rooted at the start symbol, picking uniformly among the
/// alternatives whose minimal height still fits the remaining depth budget.
/// The result never exceeds `max_depth` in height.
pub fn generate_random<R: Rng + ?Sized>(
    grammar: &Grammar,
    max_depth: u32,
    rng: &mut R,
) -> Result<DerivationTree, GenerationError> {
    generate_random_within(grammar, max_depth, DEFAULT_MAX_NODES, rng)
}

/// [`generate_random`] with a soft cap on tree size. Once about `max_nodes`
/// nodes exist, every remaining expansion picks among its lowest
/// alternatives only. Depth limits alone do not bound width, so without
/// this a recursive list rule can build trees exponential in `max_depth`.
pub fn generate_random_within<R: Rng + ?Sized>(
    grammar: &Grammar,
    max_depth: u32,
    max_nodes: usize,
    rng: &mut R,
) -> Result<DerivationTree, GenerationError> {
    expand(grammar, grammar.start(), max_depth, max_nodes, &mut |_, alts| {
        alts[rng.random_range(0..alts.len())]
    })
}
