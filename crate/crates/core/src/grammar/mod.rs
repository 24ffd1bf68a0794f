//! Context-free grammars, derivation sampling, input parsing and rule
//! probabilities.
//!
//! A [`Grammar`] is an ordered list of rules. Every rule owns one or more
//! alternatives, each a (possibly empty) sequence of [`Symbol`]s. The first
//! rule is the start symbol. Nonterminals are stored as [`RuleId`] indices so
//! derivation trees stay compact; names are only needed for display.

mod file;
mod generate;
mod parse;
mod probabilistic;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use file::parse_grammar;
pub use generate::{generate_random, generate_random_within, GenerationError, DEFAULT_MAX_NODES};
pub use parse::{parse_input, parse_input_from, InputParseError};
pub use probabilistic::{
    learn_probabilities, mutate_probabilities, sample_weighted, sample_weighted_within, LearnError, ProbabilisticGrammar,
    RuleCounts, WeightError,
};

/// Index of a rule inside its [`Grammar`].
pub type RuleId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Symbol {
    Terminal(String),
    Nonterminal(RuleId),
}

/// Symbol as written by a grammar author, before names are resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawSymbol {
    Terminal(String),
    Nonterminal(String),
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub name: String,
    pub alternatives: Vec<Vec<Symbol>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("undefined nonterminal `{name}` at line {line}, column {column}")]
    UndefinedAt {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("undefined nonterminal `{0}`")]
    Undefined(String),
    #[error("rule `{0}` has no alternatives")]
    NoAlternatives(String),
    #[error("grammar has no rules")]
    Empty,
}

/// An immutable context-free grammar.
#[derive(Debug, Clone)]
pub struct Grammar {
    rules: Vec<Rule>,
    index: HashMap<String, RuleId>,
    // Minimal derivation height per alternative; `None` when the alternative
    // can never bottom out.
    alt_heights: Vec<Vec<Option<u32>>>,
    rule_heights: Vec<Option<u32>>,
}

impl Grammar {
    /// Builds a grammar from named rules. Rules sharing a left-hand side are
    /// merged, keeping alternatives in the order given. The first rule is the
    /// start symbol.
    pub fn new<I, A>(rules: I) -> Result<Self, GrammarError>
    where
        I: IntoIterator<Item = (String, A)>,
        A: IntoIterator<Item = Vec<RawSymbol>>,
    {
        let mut order: Vec<(String, Vec<Vec<RawSymbol>>)> = Vec::new();
        let mut index = HashMap::new();
        for (name, alts) in rules {
            let id = *index.entry(name.clone()).or_insert_with(|| {
                order.push((name.clone(), Vec::new()));
                order.len() - 1
            });
            order[id].1.extend(alts);
        }
        if order.is_empty() {
            return Err(GrammarError::Empty);
        }

        let mut resolved = Vec::with_capacity(order.len());
        for (name, alts) in order {
            if alts.is_empty() {
                return Err(GrammarError::NoAlternatives(name));
            }
            let mut out = Vec::with_capacity(alts.len());
            for alt in alts {
                let mut seq = Vec::with_capacity(alt.len());
                for sym in alt {
                    seq.push(match sym {
                        RawSymbol::Terminal(t) => Symbol::Terminal(t),
                        RawSymbol::Nonterminal(n) => match index.get(&n) {
                            Some(&id) => Symbol::Nonterminal(id),
                            None => return Err(GrammarError::Undefined(n)),
                        },
                    });
                }
                out.push(seq);
            }
            resolved.push(Rule {
                name,
                alternatives: out,
            });
        }

        let (alt_heights, rule_heights) = min_heights(&resolved);
        Ok(Grammar {
            rules: resolved,
            index,
            alt_heights,
            rule_heights,
        })
    }

    pub fn start(&self) -> RuleId {
        0
    }

    pub fn start_symbol(&self) -> &str {
        &self.rules[0].name
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: RuleId) -> &Rule {
        &self.rules[id]
    }

    pub fn rule_id(&self, name: &str) -> Option<RuleId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: RuleId) -> &str {
        &self.rules[id].name
    }

    pub fn alternatives(&self, id: RuleId) -> &[Vec<Symbol>] {
        &self.rules[id].alternatives
    }

    /// Minimal height of any complete derivation tree rooted at `id`. Height
    /// counts nonterminal levels: `s ::= "a" ;` has height 1.
    pub fn min_height(&self, id: RuleId) -> Option<u32> {
        self.rule_heights[id]
    }

    pub fn alt_min_height(&self, id: RuleId, alt: usize) -> Option<u32> {
        self.alt_heights[id][alt]
    }

    /// Alternatives of `id` that fit in a subtree of height at most `budget`.
    pub fn admissible(&self, id: RuleId, budget: u32) -> impl Iterator<Item = usize> + '_ {
        self.alt_heights[id]
            .iter()
            .enumerate()
            .filter(move |(_, h)| matches!(h, Some(h) if *h <= budget))
            .map(|(i, _)| i)
    }
}

fn min_heights(rules: &[Rule]) -> (Vec<Vec<Option<u32>>>, Vec<Option<u32>>) {
    let mut alt_h: Vec<Vec<Option<u32>>> = rules
        .iter()
        .map(|r| vec![None; r.alternatives.len()])
        .collect();
    let mut rule_h: Vec<Option<u32>> = vec![None; rules.len()];

    loop {
        let mut changed = false;
        for (rid, rule) in rules.iter().enumerate() {
            for (aid, alt) in rule.alternatives.iter().enumerate() {
                let mut tallest = 0u32;
                let mut complete = true;
                for sym in alt {
                    let h = match sym {
                        Symbol::Terminal(_) => Some(0),
                        Symbol::Nonterminal(n) => rule_h[*n],
                    };
                    match h {
                        Some(h) => tallest = tallest.max(h),
                        None => {
                            complete = false;
                            break;
                        }
                    }
                }
                if complete {
                    let h = tallest + 1;
                    if alt_h[rid][aid].is_none_or(|old| h < old) {
                        alt_h[rid][aid] = Some(h);
                        changed = true;
                    }
                    if rule_h[rid].is_none_or(|old| h < old) {
                        rule_h[rid] = Some(h);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return (alt_h, rule_h);
        }
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in &self.rules {
            write!(f, "{} ::=", rule.name)?;
            for (i, alt) in rule.alternatives.iter().enumerate() {
                if i > 0 {
                    write!(f, " |")?;
                }
                if alt.is_empty() {
                    write!(f, " \"\"")?;
                }
                for sym in alt {
                    match sym {
                        Symbol::Terminal(t) => write!(f, " {}", quote_terminal(t))?,
                        Symbol::Nonterminal(n) => write!(f, " {}", self.rules[*n].name)?,
                    }
                }
            }
            writeln!(f, " ;")?;
        }
        Ok(())
    }
}

fn quote_terminal(t: &str) -> String {
    let mut out = String::with_capacity(t.len() + 2);
    out.push('"');
    for c in t.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_heights_by_fixpoint() {
        let g = parse_grammar("s ::= a a | \"x\" ; a ::= a \"y\" | \"z\" ;").unwrap();
        let s = g.rule_id("s").unwrap();
        let a = g.rule_id("a").unwrap();
        assert_eq!(g.min_height(a), Some(1));
        assert_eq!(g.alt_min_height(a, 0), Some(2));
        assert_eq!(g.alt_min_height(s, 0), Some(2));
        assert_eq!(g.min_height(s), Some(1));
        assert_eq!(g.admissible(s, 1).collect::<Vec<_>>(), vec![1]);
        assert_eq!(g.admissible(s, 2).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn unproductive_rule_has_no_height() {
        let g = parse_grammar("s ::= s \"a\" ;").unwrap();
        assert_eq!(g.min_height(0), None);
    }

    #[test]
    fn display_round_trips_through_the_file_format() {
        let g = parse_grammar(crate::JSON_GRAMMAR).unwrap();
        let again = parse_grammar(&g.to_string()).unwrap();
        assert_eq!(g.to_string(), again.to_string());
    }
}
