//! Parsing concrete inputs back into derivation trees.
//!
//! Memoized top-down parsing. For every `(rule, offset)` the parser keeps one
//! candidate end per alternative, ordered longest first with ties going to
//! the earlier alternative. Sequences try those candidates in order and keep
//! the first that lets the rest of the sequence match. The tree returned for
//! an ambiguous input is therefore the first-listed-alternative,
//! longest-match derivation.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use thiserror::Error;

use super::{Grammar, RuleId, Symbol};
use crate::tree::DerivationTree;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("input does not match the grammar (furthest failure at byte {offset}{})", expected_suffix(.expected))]
pub struct InputParseError {
    /// Furthest byte offset the parser reached before failing.
    pub offset: usize,
    /// Terminals that would have been accepted at `offset`.
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!("; expected one of {}", expected.join(" "))
    }
}

type Ends = Rc<[(usize, usize)]>;

struct Parser<'g, 't> {
    grammar: &'g Grammar,
    text: &'t [u8],
    rule_memo: HashMap<(RuleId, usize), Ends>,
    seq_memo: HashMap<(RuleId, usize, usize, usize), Option<usize>>,
    in_progress: BTreeSet<(RuleId, usize)>,
    furthest: usize,
    expected: BTreeSet<String>,
}

impl<'g, 't> Parser<'g, 't> {
    fn new(grammar: &'g Grammar, text: &'t str) -> Self {
        Parser {
            grammar,
            text: text.as_bytes(),
            rule_memo: HashMap::new(),
            seq_memo: HashMap::new(),
            in_progress: BTreeSet::new(),
            furthest: 0,
            expected: BTreeSet::new(),
        }
    }

    fn note_failure(&mut self, pos: usize, terminal: &str) {
        if pos > self.furthest {
            self.furthest = pos;
            self.expected.clear();
        }
        if pos == self.furthest {
            self.expected.insert(format!("{terminal:?}"));
        }
    }

    /// Candidate `(end, alternative)` pairs for `rule` starting at `pos`.
    fn rule_ends(&mut self, rule: RuleId, pos: usize) -> Ends {
        if let Some(e) = self.rule_memo.get(&(rule, pos)) {
            return e.clone();
        }
        // Left recursion re-entering at the same offset contributes nothing.
        if !self.in_progress.insert((rule, pos)) {
            return Rc::from(Vec::new());
        }
        let mut ends = Vec::new();
        for alt in 0..self.grammar.alternatives(rule).len() {
            if let Some(end) = self.seq(rule, alt, 0, pos) {
                ends.push((end, alt));
            }
        }
        self.in_progress.remove(&(rule, pos));
        // Stable sort keeps listed order among equal ends.
        ends.sort_by_key(|e| std::cmp::Reverse(e.0));
        ends.dedup_by_key(|e| e.0);
        let ends: Ends = Rc::from(ends);
        self.rule_memo.insert((rule, pos), ends.clone());
        ends
    }

    /// End offset of symbols `idx..` of an alternative matched from `pos`.
    fn seq(&mut self, rule: RuleId, alt: usize, idx: usize, pos: usize) -> Option<usize> {
        let key = (rule, alt, idx, pos);
        if let Some(r) = self.seq_memo.get(&key) {
            return *r;
        }
        let grammar = self.grammar;
        let seq = &grammar.alternatives(rule)[alt];
        let result = if idx == seq.len() {
            Some(pos)
        } else {
            match &seq[idx] {
                Symbol::Terminal(t) => {
                    if self.text[pos..].starts_with(t.as_bytes()) {
                        self.seq(rule, alt, idx + 1, pos + t.len())
                    } else {
                        self.note_failure(pos, t);
                        None
                    }
                }
                Symbol::Nonterminal(n) => {
                    let candidates = self.rule_ends(*n, pos);
                    candidates
                        .iter()
                        .find_map(|&(mid, _)| self.seq(rule, alt, idx + 1, mid))
                }
            }
        };
        self.seq_memo.insert(key, result);
        result
    }

    fn build_rule(&mut self, rule: RuleId, pos: usize, end: usize) -> DerivationTree {
        let ends = self.rule_ends(rule, pos);
        let alt = ends
            .iter()
            .find(|(e, _)| *e == end)
            .map(|(_, a)| *a)
            .expect("end reachable");
        let grammar = self.grammar;
        let seq = &grammar.alternatives(rule)[alt];
        let mut children = Vec::with_capacity(seq.len());
        let mut at = pos;
        for (idx, sym) in seq.iter().enumerate() {
            match sym {
                Symbol::Terminal(t) => {
                    children.push(DerivationTree::Terminal(t.clone()));
                    at += t.len();
                }
                Symbol::Nonterminal(n) => {
                    let candidates = self.rule_ends(*n, at);
                    let mid = candidates
                        .iter()
                        .map(|&(mid, _)| mid)
                        .find(|&mid| self.seq(rule, alt, idx + 1, mid) == Some(end))
                        .expect("sequence reachable");
                    children.push(self.build_rule(*n, at, mid));
                    at = mid;
                }
            }
        }
        DerivationTree::Nonterminal {
            rule,
            alt,
            children,
        }
    }
}

/// Parses `text` as a derivation of the grammar's start symbol.
pub fn parse_input(grammar: &Grammar, text: &str) -> Result<DerivationTree, InputParseError> {
    parse_input_from(grammar, grammar.start(), text)
}

/// Parses `text` as a complete derivation of `rule`.
pub fn parse_input_from(
    grammar: &Grammar,
    rule: RuleId,
    text: &str,
) -> Result<DerivationTree, InputParseError> {
    let mut p = Parser::new(grammar, text);
    let ends = p.rule_ends(rule, 0);
    if ends.iter().any(|(e, _)| *e == text.len()) {
        return Ok(p.build_rule(rule, 0, text.len()));
    }
    let reached = ends.first().map(|e| e.0).unwrap_or(0);
    if reached > p.furthest {
        Err(InputParseError {
            offset: reached,
            expected: Vec::new(),
        })
    } else {
        Err(InputParseError {
            offset: p.furthest,
            expected: p.expected.into_iter().collect(),
        })
    }
}
