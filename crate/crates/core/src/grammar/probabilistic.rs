use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use thiserror::Error;

use super::generate::{expand, GenerationError, DEFAULT_MAX_NODES};
use super::{parse_input, Grammar, InputParseError, RuleId};
use crate::tree::DerivationTree;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("expected weights for {expected} rules, got {got}")]
    RuleCount { expected: usize, got: usize },
    #[error("rule `{rule}` has {expected} alternatives but {got} weights")]
    AltCount {
        rule: String,
        expected: usize,
        got: usize,
    },
    #[error("rule `{rule}` has a negative or non-finite weight")]
    Invalid { rule: String },
    #[error("weights of rule `{rule}` sum to zero")]
    ZeroMass { rule: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("sample {index} does not parse: {source}")]
pub struct LearnError {
    pub index: usize,
    #[source]
    pub source: InputParseError,
}

/// How often each alternative was applied across a set of derivation trees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleCounts {
    counts: Vec<Vec<u64>>,
}

impl RuleCounts {
    pub fn new(grammar: &Grammar) -> Self {
        RuleCounts {
            counts: grammar
                .rules()
                .iter()
                .map(|r| vec![0; r.alternatives.len()])
                .collect(),
        }
    }

    pub fn add_tree(&mut self, tree: &DerivationTree) {
        if let DerivationTree::Nonterminal {
            rule,
            alt,
            children,
        } = tree
        {
            self.counts[*rule][*alt] += 1;
            for c in children {
                self.add_tree(c);
            }
        }
    }

    pub fn alt_counts(&self, rule: RuleId) -> &[u64] {
        &self.counts[rule]
    }

    /// Add-one smoothed relative frequencies: `(count + 1) / (total + alts)`.
    pub fn smoothed(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|alts| {
                let total: u64 = alts.iter().sum();
                let denom = (total + alts.len() as u64) as f64;
                alts.iter().map(|&c| (c + 1) as f64 / denom).collect()
            })
            .collect()
    }
}

/// A grammar with a non-negative weight per alternative.
#[derive(Debug, Clone)]
pub struct ProbabilisticGrammar {
    grammar: Arc<Grammar>,
    weights: Vec<Vec<f64>>,
}

impl ProbabilisticGrammar {
    pub fn new(grammar: Arc<Grammar>, weights: Vec<Vec<f64>>) -> Result<Self, WeightError> {
        if weights.len() != grammar.rules().len() {
            return Err(WeightError::RuleCount {
                expected: grammar.rules().len(),
                got: weights.len(),
            });
        }
        for (rule, w) in grammar.rules().iter().zip(&weights) {
            if w.len() != rule.alternatives.len() {
                return Err(WeightError::AltCount {
                    rule: rule.name.clone(),
                    expected: rule.alternatives.len(),
                    got: w.len(),
                });
            }
            if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(WeightError::Invalid {
                    rule: rule.name.clone(),
                });
            }
            if w.iter().sum::<f64>() <= 0.0 {
                return Err(WeightError::ZeroMass {
                    rule: rule.name.clone(),
                });
            }
        }
        Ok(ProbabilisticGrammar { grammar, weights })
    }

    pub fn uniform(grammar: Arc<Grammar>) -> Self {
        let weights = grammar
            .rules()
            .iter()
            .map(|r| vec![1.0 / r.alternatives.len() as f64; r.alternatives.len()])
            .collect();
        ProbabilisticGrammar { grammar, weights }
    }

    /// Smoothed frequencies of the rule applications in `trees`.
    pub fn from_trees<'a, I>(grammar: Arc<Grammar>, trees: I) -> Self
    where
        I: IntoIterator<Item = &'a DerivationTree>,
    {
        let mut counts = RuleCounts::new(&grammar);
        for t in trees {
            counts.add_tree(t);
        }
        let weights = counts.smoothed();
        ProbabilisticGrammar { grammar, weights }
    }

    pub fn grammar(&self) -> &Arc<Grammar> {
        &self.grammar
    }

    pub fn weights(&self, rule: RuleId) -> &[f64] {
        &self.weights[rule]
    }

    pub fn all_weights(&self) -> &[Vec<f64>] {
        &self.weights
    }
}

/// Learns add-one smoothed alternative probabilities from sample inputs.
pub fn learn_probabilities<S: AsRef<str>>(
    grammar: Arc<Grammar>,
    samples: &[S],
) -> Result<ProbabilisticGrammar, LearnError> {
    let trees = samples
        .iter()
        .enumerate()
        .map(|(index, s)| {
            parse_input(&grammar, s.as_ref()).map_err(|source| LearnError { index, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProbabilisticGrammar::from_trees(grammar, &trees))
}

/// Each rule is independently selected with probability `rate`; a selected
/// rule's weights are replaced by a uniform draw from the probability
/// simplex. `pg` itself is left untouched.
pub fn mutate_probabilities<R: Rng + ?Sized>(
    pg: &ProbabilisticGrammar,
    rate: f64,
    rng: &mut R,
) -> ProbabilisticGrammar {
    debug_assert!((0.0..=1.0).contains(&rate));
    let mut out = pg.clone();
    for w in &mut out.weights {
        if rng.random_bool(rate) {
            resample_simplex(w, rng);
        }
    }
    out
}

// Normalized Exp(1) draws are Dirichlet(1, ..., 1).
fn resample_simplex<R: Rng + ?Sized>(w: &mut [f64], rng: &mut R) {
    let mut total = 0.0;
    for x in w.iter_mut() {
        let e: f64 = Exp1.sample(rng);
        *x = e;
        total += e;
    }
    if total > 0.0 {
        w.iter_mut().for_each(|x| *x /= total);
    } else {
        let n = w.len() as f64;
        w.iter_mut().for_each(|x| *x = 1.0 / n);
    }
}

/// Like [`generate_random`](super::generate_random), but alternatives are
/// drawn in proportion to their weights, renormalized over the alternatives
/// admissible under the depth budget. If every admissible alternative has
/// zero weight the choice falls back to uniform.
pub fn sample_weighted<R: Rng + ?Sized>(
    pg: &ProbabilisticGrammar,
    max_depth: u32,
    rng: &mut R,
) -> Result<DerivationTree, GenerationError> {
    sample_weighted_within(pg, max_depth, DEFAULT_MAX_NODES, rng)
}

/// [`sample_weighted`] with the node cap of
/// [`generate_random_within`](super::generate_random_within). Mutated
/// weights easily favour recursion enough to need it.
pub fn sample_weighted_within<R: Rng + ?Sized>(
    pg: &ProbabilisticGrammar,
    max_depth: u32,
    max_nodes: usize,
    rng: &mut R,
) -> Result<DerivationTree, GenerationError> {
    let grammar = pg.grammar.as_ref();
    expand(grammar, grammar.start(), max_depth, max_nodes, &mut |rule, alts| {
        let w = &pg.weights[rule];
        let mass: f64 = alts.iter().map(|&a| w[a]).sum();
        if mass <= 0.0 {
            return alts[rng.random_range(0..alts.len())];
        }
        let mut target = rng.random::<f64>() * mass;
        for &a in alts {
            if w[a] <= 0.0 {
                continue;
            }
            if target < w[a] {
                return a;
            }
            target -= w[a];
        }
        // Rounding left a sliver of mass; take the last weighted choice.
        *alts.iter().rev().find(|&&a| w[a] > 0.0).expect("positive mass")
    })
}
