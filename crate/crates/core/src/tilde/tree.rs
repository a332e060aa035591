use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::logic::{satisfies, Atom, FactStore, GroundAtom, PredId, Schema, Substitution};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub value: f64,
    pub n_examples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    /// Literals added at this node.
    pub test: Vec<Atom>,
    pub on_true: Node,
    pub on_false: Node,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Leaf(Leaf),
    Split(Box<Split>),
}

impl Node {
    pub fn leaf(value: f64, n_examples: usize) -> Self {
        Node::Leaf(Leaf { value, n_examples })
    }

    pub fn split(test: Vec<Atom>, on_true: Node, on_false: Node) -> Self {
        Node::Split(Box::new(Split { test, on_true, on_false }))
    }

    fn depth(&self) -> usize {
        match self {
            Node::Leaf(_) => 0,
            Node::Split(s) => 1 + s.on_true.depth().max(s.on_false.depth()),
        }
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Leaf>) {
        match self {
            Node::Leaf(l) => out.push(l),
            Node::Split(s) => {
                s.on_true.collect_leaves(out);
                s.on_false.collect_leaves(out);
            }
        }
    }

    fn collect_predicates(&self, out: &mut BTreeSet<PredId>) {
        if let Node::Split(s) = self {
            out.extend(s.test.iter().map(|l| l.pred));
            s.on_true.collect_predicates(out);
            s.on_false.collect_predicates(out);
        }
    }
}

/// A relational regression tree for one target predicate.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationalTree {
    pub target: PredId,
    pub root: Node,
}

impl RelationalTree {
    pub fn new(target: PredId, root: Node) -> Self {
        Self { target, root }
    }

    pub fn constant(target: PredId, value: f64) -> Self {
        Self::new(target, Node::leaf(value, 0))
    }

    /// Number of inner nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Leaves in pre-order (true branch first).
    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::new();
        self.root.collect_leaves(&mut out);
        out
    }

    /// Predicates mentioned by any test.
    pub fn predicates(&self) -> BTreeSet<PredId> {
        let mut out = BTreeSet::new();
        self.root.collect_predicates(&mut out);
        out
    }

    pub fn evaluate(&self, query: &GroundAtom, store: &FactStore) -> Result<f64> {
        Ok(self.reach(query, store)?.value)
    }

    /// The single leaf a query reaches.
    pub fn reach(&self, query: &GroundAtom, store: &FactStore) -> Result<&Leaf> {
        if query.pred != self.target {
            let s = store.schema();
            return Err(Error::PredicateMismatch {
                expected: s.predicate_name(self.target).into(),
                found: s.predicate_name(query.pred).into(),
            });
        }
        Ok(self.reach_bound(&Substitution::from_args(&query.args), store))
    }

    pub(crate) fn reach_bound(&self, theta: &Substitution, store: &FactStore) -> &Leaf {
        let mut path: Vec<Atom> = Vec::new();
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(l) => return l,
                Node::Split(s) => {
                    let base = path.len();
                    path.extend_from_slice(&s.test);
                    if satisfies(&path, theta, store) {
                        node = &s.on_true;
                    } else {
                        path.truncate(base);
                        node = &s.on_false;
                    }
                }
            }
        }
    }

    /// Indented if-then rendering.
    pub fn display<'a>(&'a self, schema: &'a Schema) -> impl fmt::Display + 'a {
        ShowTree { tree: self, schema }
    }
}

struct ShowTree<'a> {
    tree: &'a RelationalTree,
    schema: &'a Schema,
}

impl ShowTree<'_> {
    fn node(&self, f: &mut fmt::Formatter<'_>, node: &Node, indent: usize) -> fmt::Result {
        match node {
            Node::Leaf(l) => {
                writeln!(f, "{:indent$}value {:.4} (n={})", "", l.value, l.n_examples, indent = indent)
            }
            Node::Split(s) => {
                write!(f, "{:indent$}if ", "", indent = indent)?;
                for (i, lit) in s.test.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", lit.show(self.schema))?;
                }
                writeln!(f, " then")?;
                self.node(f, &s.on_true, indent + 2)?;
                writeln!(f, "{:indent$}else", "", indent = indent)?;
                self.node(f, &s.on_false, indent + 2)
            }
        }
    }
}

impl fmt::Display for ShowTree<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = self.schema.signature(self.tree.target);
        write!(f, "{}(", sig.name)?;
        for i in 0..sig.arity() {
            if i > 0 {
                f.write_str(",")?;
            }
            crate::logic::write_var_name(f, crate::logic::VarId(i as u32))?;
        }
        writeln!(f, ")")?;
        self.node(f, &self.tree.root, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::tiny_domain;
    use alloc::string::ToString;

    #[test]
    fn path_semantics_accumulate_true_branch_tests() {
        let dom = tiny_domain(40, 1);
        let ds = &dom.dataset;
        let (good, fl) = (dom.rule[0].clone(), dom.rule[1..].to_vec());
        let tree = RelationalTree::new(
            ds.target(),
            Node::split(fl, Node::split(alloc::vec![good], Node::leaf(1.0, 0), Node::leaf(0.0, 0)), Node::leaf(0.0, 0)),
        );
        for ex in &ds.examples {
            for arm in ds.arms() {
                let q = ds.query(&ex.context, arm);
                assert_eq!(tree.evaluate(&q, &ds.store).unwrap() == 1.0, ex.labels.contains(&arm));
            }
        }
        assert_eq!(tree.depth(), 2);
        assert_eq!(tree.leaves().len(), 3);
        assert_eq!(tree.predicates().len(), 3);
    }

    #[test]
    fn display_is_indented_if_then() {
        let dom = tiny_domain(10, 0);
        let ds = &dom.dataset;
        let tree = RelationalTree::new(
            ds.target(),
            Node::split(alloc::vec![dom.rule[0].clone()], Node::leaf(0.9, 3), Node::leaf(0.1, 7)),
        );
        let text = tree.display(ds.store.schema()).to_string();
        assert_eq!(text, "willclick(A,B)\nif goodmovie(B) then\n  value 0.9000 (n=3)\nelse\n  value 0.1000 (n=7)\n");
    }

    #[test]
    fn wrong_target_is_an_error() {
        let dom = tiny_domain(10, 0);
        let ds = &dom.dataset;
        let tree = RelationalTree::constant(ds.target(), 0.0);
        let fact = ds.store.facts()[0].clone();
        assert!(tree.evaluate(&fact, &ds.store).is_err());
    }
}
