//! Derivation trees: the structured form of one input.

use std::fmt::Write as _;

use crate::grammar::{Grammar, RuleId, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DerivationTree {
    Terminal(String),
    Nonterminal {
        rule: RuleId,
        /// Which alternative of `rule` was expanded.
        alt: usize,
        children: Vec<DerivationTree>,
    },
}

/// Position of a node as child indices from the root.
pub type NodePath = Vec<usize>;

impl DerivationTree {
    pub fn terminal(text: impl Into<String>) -> Self {
        DerivationTree::Terminal(text.into())
    }

    /// Concatenation of the terminal leaves, left to right.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        self.write_to(&mut out);
        out
    }

    pub fn write_to(&self, out: &mut String) {
        match self {
            DerivationTree::Terminal(t) => out.push_str(t),
            DerivationTree::Nonterminal { children, .. } => {
                for c in children {
                    c.write_to(out);
                }
            }
        }
    }

    pub fn rule(&self) -> Option<RuleId> {
        match self {
            DerivationTree::Terminal(_) => None,
            DerivationTree::Nonterminal { rule, .. } => Some(*rule),
        }
    }

    pub fn children(&self) -> &[DerivationTree] {
        match self {
            DerivationTree::Terminal(_) => &[],
            DerivationTree::Nonterminal { children, .. } => children,
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(Self::node_count).sum::<usize>()
    }

    /// Number of nonterminal levels on the longest root-to-leaf path.
    pub fn height(&self) -> u32 {
        match self {
            DerivationTree::Terminal(_) => 0,
            DerivationTree::Nonterminal { children, .. } => {
                1 + children.iter().map(Self::height).max().unwrap_or(0)
            }
        }
    }

    pub fn get(&self, path: &[usize]) -> Option<&DerivationTree> {
        path.iter().try_fold(self, |node, &i| node.children().get(i))
    }

    pub fn get_mut(&mut self, path: &[usize]) -> Option<&mut DerivationTree> {
        let mut node = self;
        for &i in path {
            node = match node {
                DerivationTree::Terminal(_) => return None,
                DerivationTree::Nonterminal { children, .. } => children.get_mut(i)?,
            };
        }
        Some(node)
    }

    /// Copy of the tree with the node at `path` replaced by `sub`. Only the
    /// nodes along the path and their siblings are cloned.
    pub fn with_replaced(&self, path: &[usize], sub: DerivationTree) -> Option<DerivationTree> {
        let Some((&first, rest)) = path.split_first() else {
            return Some(sub);
        };
        let DerivationTree::Nonterminal { rule, alt, children } = self else {
            return None;
        };
        let replaced = children.get(first)?.with_replaced(rest, sub)?;
        let mut out = Vec::with_capacity(children.len());
        let mut replaced = Some(replaced);
        for (i, c) in children.iter().enumerate() {
            out.push(if i == first { replaced.take().unwrap() } else { c.clone() });
        }
        Some(DerivationTree::Nonterminal {
            rule: *rule,
            alt: *alt,
            children: out,
        })
    }

    /// Paths of every nonterminal node, in pre-order.
    pub fn nonterminal_paths(&self) -> Vec<(NodePath, RuleId)> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_nonterminals(&mut path, &mut out);
        out
    }

    fn collect_nonterminals(&self, path: &mut NodePath, out: &mut Vec<(NodePath, RuleId)>) {
        if let DerivationTree::Nonterminal { rule, children, .. } = self {
            out.push((path.clone(), *rule));
            for (i, c) in children.iter().enumerate() {
                path.push(i);
                c.collect_nonterminals(path, out);
                path.pop();
            }
        }
    }

    /// Checks that every nonterminal's children match its chosen alternative
    /// symbol for symbol.
    pub fn conforms_to(&self, grammar: &Grammar) -> bool {
        match self {
            DerivationTree::Terminal(_) => true,
            DerivationTree::Nonterminal {
                rule,
                alt,
                children,
            } => {
                let Some(seq) = grammar.rules().get(*rule).and_then(|r| r.alternatives.get(*alt))
                else {
                    return false;
                };
                seq.len() == children.len()
                    && seq.iter().zip(children).all(|(sym, child)| match (sym, child) {
                        (Symbol::Terminal(t), DerivationTree::Terminal(c)) => t == c,
                        (Symbol::Nonterminal(r), DerivationTree::Nonterminal { rule, .. }) => {
                            r == rule && child.conforms_to(grammar)
                        }
                        _ => false,
                    })
            }
        }
    }

    /// Indented rendering with rule names, for debugging.
    pub fn pretty(&self, grammar: &Grammar) -> String {
        let mut out = String::new();
        self.pretty_into(grammar, 0, &mut out);
        out
    }

    fn pretty_into(&self, grammar: &Grammar, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        match self {
            DerivationTree::Terminal(t) => {
                let _ = writeln!(out, "{pad}{t:?}");
            }
            DerivationTree::Nonterminal {
                rule,
                alt,
                children,
            } => {
                let _ = writeln!(out, "{pad}{}#{alt}", grammar.name(*rule));
                for c in children {
                    c.pretty_into(grammar, depth + 1, out);
                }
            }
        }
    }
}
