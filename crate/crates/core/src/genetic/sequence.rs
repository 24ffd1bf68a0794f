//! Sequence-bearing nodes: containers whose content is a separated list.
//!
//! A container rule has an empty alternative `open close` and a filled one
//! `open list close`. The list rule has a single-item alternative `item` and
//! a cons alternative `item sep list`; it may have others (for example
//! `item sep item sep list`), which are read but never built.

use crate::grammar::{Grammar, RuleId, Symbol};
use crate::tree::{DerivationTree, NodePath};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContainerShape {
    pub container: RuleId,
    pub empty_alt: usize,
    pub filled_alt: usize,
    /// Index of the list symbol inside the filled alternative.
    pub list_pos: usize,
    pub list: RuleId,
    pub item: RuleId,
    pub single_alt: usize,
    pub cons_alt: usize,
}

/// All container shapes found in a grammar.
#[derive(Debug, Clone, Default)]
pub struct Shapes {
    shapes: Vec<ContainerShape>,
}

impl Shapes {
    pub fn detect(grammar: &Grammar) -> Self {
        let mut shapes = Vec::new();
        for (container, rule) in grammar.rules().iter().enumerate() {
            if let Some(shape) = detect_container(grammar, container, &rule.alternatives) {
                shapes.push(shape);
            }
        }
        Shapes { shapes }
    }

    pub fn all(&self) -> &[ContainerShape] {
        &self.shapes
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn of(&self, container: RuleId) -> Option<&ContainerShape> {
        self.shapes.iter().find(|s| s.container == container)
    }

    /// The shape of `node` if it is a container node.
    pub fn shape_of(&self, node: &DerivationTree) -> Option<&ContainerShape> {
        self.of(node.rule()?)
    }

    /// Element subtrees of a container node, in order. Empty for `{}`/`[]`.
    pub fn elements<'t>(&self, node: &'t DerivationTree) -> Option<Vec<&'t DerivationTree>> {
        let shape = self.shape_of(node)?;
        let mut out = Vec::new();
        if let DerivationTree::Nonterminal { alt, children, .. } = node {
            if *alt == shape.filled_alt {
                collect_items(shape, &children[shape.list_pos], &mut out);
            }
        }
        Some(out)
    }

    /// Paths (relative to the container node) of every element slot.
    pub fn element_slots(&self, node: &DerivationTree) -> Option<Vec<NodePath>> {
        let shape = self.shape_of(node)?;
        let mut out = Vec::new();
        if let DerivationTree::Nonterminal { alt, children, .. } = node {
            if *alt == shape.filled_alt {
                let mut path = vec![shape.list_pos];
                collect_slots(shape, &children[shape.list_pos], &mut path, &mut out);
            }
        }
        Some(out)
    }

    /// Follows single-child chains from the root down to the first
    /// container node.
    pub fn root_container(&self, tree: &DerivationTree) -> Option<NodePath> {
        let mut path = Vec::new();
        let mut node = tree;
        loop {
            if self.shape_of(node).is_some() {
                return Some(path);
            }
            match node.children() {
                [child @ DerivationTree::Nonterminal { .. }] => {
                    path.push(0);
                    node = child;
                }
                _ => return None,
            }
        }
    }

    /// Every container node in the tree, in pre-order.
    pub fn containers(&self, tree: &DerivationTree) -> Vec<NodePath> {
        tree.nonterminal_paths()
            .into_iter()
            .filter(|(_, rule)| self.of(*rule).is_some())
            .map(|(p, _)| p)
            .collect()
    }
}

/// Builds a container node holding `items`, with separators regenerated.
pub fn build_container(
    grammar: &Grammar,
    shape: &ContainerShape,
    items: Vec<DerivationTree>,
) -> DerivationTree {
    let alts = grammar.alternatives(shape.container);
    if items.is_empty() {
        return DerivationTree::Nonterminal {
            rule: shape.container,
            alt: shape.empty_alt,
            children: terminals(&alts[shape.empty_alt]),
        };
    }
    let mut children = Vec::new();
    for (k, sym) in alts[shape.filled_alt].iter().enumerate() {
        if k == shape.list_pos {
            children.push(build_list(grammar, shape, items.clone()));
        } else if let Symbol::Terminal(t) = sym {
            children.push(DerivationTree::terminal(t.clone()));
        }
    }
    DerivationTree::Nonterminal {
        rule: shape.container,
        alt: shape.filled_alt,
        children,
    }
}

fn build_list(grammar: &Grammar, shape: &ContainerShape, items: Vec<DerivationTree>) -> DerivationTree {
    let cons = &grammar.alternatives(shape.list)[shape.cons_alt];
    let sep = match &cons[1] {
        Symbol::Terminal(t) => t.clone(),
        Symbol::Nonterminal(_) => unreachable!("cons alternative has a terminal separator"),
    };
    let mut iter = items.into_iter().rev();
    let last = iter.next().expect("non-empty list");
    let mut node = DerivationTree::Nonterminal {
        rule: shape.list,
        alt: shape.single_alt,
        children: vec![last],
    };
    for item in iter {
        node = DerivationTree::Nonterminal {
            rule: shape.list,
            alt: shape.cons_alt,
            children: vec![item, DerivationTree::terminal(sep.clone()), node],
        };
    }
    node
}

fn terminals(seq: &[Symbol]) -> Vec<DerivationTree> {
    seq.iter()
        .map(|s| match s {
            Symbol::Terminal(t) => DerivationTree::terminal(t.clone()),
            Symbol::Nonterminal(_) => unreachable!("empty container alternative is all terminals"),
        })
        .collect()
}

fn collect_items<'t>(shape: &ContainerShape, list: &'t DerivationTree, out: &mut Vec<&'t DerivationTree>) {
    for child in list.children() {
        match child.rule() {
            Some(r) if r == shape.item => out.push(child),
            Some(r) if r == shape.list => collect_items(shape, child, out),
            _ => {}
        }
    }
}

fn collect_slots(
    shape: &ContainerShape,
    list: &DerivationTree,
    path: &mut NodePath,
    out: &mut Vec<NodePath>,
) {
    for (i, child) in list.children().iter().enumerate() {
        path.push(i);
        match child.rule() {
            Some(r) if r == shape.item => out.push(path.clone()),
            Some(r) if r == shape.list => collect_slots(shape, child, path, out),
            _ => {}
        }
        path.pop();
    }
}

fn detect_container(grammar: &Grammar, container: RuleId, alts: &[Vec<Symbol>]) -> Option<ContainerShape> {
    for (filled_alt, seq) in alts.iter().enumerate() {
        let [Symbol::Terminal(open), Symbol::Nonterminal(list), Symbol::Terminal(close)] =
            seq.as_slice()
        else {
            continue;
        };
        let Some(empty_alt) = alts.iter().position(|a| {
            matches!(a.as_slice(), [Symbol::Terminal(o), Symbol::Terminal(c)] if o == open && c == close)
        }) else {
            continue;
        };
        if let Some((item, single_alt, cons_alt)) = detect_list(grammar, *list) {
            return Some(ContainerShape {
                container,
                empty_alt,
                filled_alt,
                list_pos: 1,
                list: *list,
                item,
                single_alt,
                cons_alt,
            });
        }
    }
    None
}

fn detect_list(grammar: &Grammar, list: RuleId) -> Option<(RuleId, usize, usize)> {
    let alts = grammar.alternatives(list);
    for (cons_alt, seq) in alts.iter().enumerate() {
        let [Symbol::Nonterminal(item), Symbol::Terminal(_), Symbol::Nonterminal(tail)] =
            seq.as_slice()
        else {
            continue;
        };
        if *tail != list || *item == list {
            continue;
        }
        let single = alts
            .iter()
            .position(|a| matches!(a.as_slice(), [Symbol::Nonterminal(i)] if i == item));
        if let Some(single_alt) = single {
            return Some((*item, single_alt, cons_alt));
        }
    }
    None
}
