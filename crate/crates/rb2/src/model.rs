//! Versioned text serialization of boosted models.
//!
//! ```text
//! rb2-model 1
//! target willclick/2
//! psi0 -1.0986122886681098
//! stages 1
//! stage eta 1.0
//! % willclick(A,B)
//! % if goodmovie(B) then ...
//! split goodmovie(B)
//! leaf 0.75 12
//! leaf -0.5 20
//! end
//! ```
//!
//! Trees are written in pre-order, true branch first. Floats use Rust's
//! shortest round-trip formatting, so parsing a written model reproduces it
//! bit for bit. Lines starting with `%` are comments.

use std::fmt::Write;

use rb2_core::boosting::BoostedModel;
use rb2_core::logic::{Atom, Schema, Term, VarId};
use rb2_core::tilde::{Node, RelationalTree};

use crate::text::{parse_atom, strip_comment, write_constant};
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "rb2-model";

pub fn write_model(model: &BoostedModel, schema: &Schema) -> String {
    let sig = schema.signature(model.target());
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {FORMAT_VERSION}");
    let _ = writeln!(out, "target {}/{}", sig.name, sig.arity());
    let _ = writeln!(out, "psi0 {:?}", model.psi0());
    let _ = writeln!(out, "stages {}", model.len());
    for stage in model.stages() {
        let _ = writeln!(out, "stage eta {:?}", stage.eta);
        for line in stage.tree.display(schema).to_string().lines() {
            let _ = writeln!(out, "% {line}");
        }
        write_node(&mut out, &stage.tree.root, schema);
    }
    out.push_str("end\n");
    out
}

/// A single tree in the same pre-order body format, without the header.
pub fn write_tree(tree: &RelationalTree, schema: &Schema) -> String {
    let mut out = String::new();
    write_node(&mut out, &tree.root, schema);
    out
}

fn write_node(out: &mut String, node: &Node, schema: &Schema) {
    match node {
        Node::Leaf(l) => {
            let _ = writeln!(out, "leaf {:?} {}", l.value, l.n_examples);
        }
        Node::Split(s) => {
            out.push_str("split ");
            for (i, lit) in s.test.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_literal(out, lit, schema);
            }
            out.push('\n');
            write_node(out, &s.on_true, schema);
            write_node(out, &s.on_false, schema);
        }
    }
}

fn write_literal(out: &mut String, lit: &Atom, schema: &Schema) {
    out.push_str(schema.predicate_name(lit.pred));
    out.push('(');
    for (i, t) in lit.args.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        match *t {
            Term::Const(c) => write_constant(out, schema.constant_name(c)),
            Term::Var(v) => out.push_str(&var_name(v)),
        }
    }
    out.push(')');
}

fn var_name(v: VarId) -> String {
    if v.0 < 26 {
        char::from(b'A' + v.0 as u8).to_string()
    } else {
        format!("V{}", v.0)
    }
}

fn parse_var(s: &str) -> Option<VarId> {
    let b = s.as_bytes();
    if b.len() == 1 && b[0].is_ascii_uppercase() {
        return Some(VarId(u32::from(b[0] - b'A')));
    }
    s.strip_prefix('V').and_then(|n| n.parse::<u32>().ok()).filter(|&n| n >= 26).map(VarId)
}

struct Lines<'a> {
    file: &'a str,
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, file: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> =
            Box::new(text.lines().enumerate().map(|(i, l)| (i + 1, strip_comment(l))).filter(|(_, l)| !l.is_empty()));
        Self { file, inner: it.peekable(), last: 0 }
    }

    fn next(&mut self) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last = n;
                Ok((n, l))
            }
            None => Err(Error::parse(self.file, self.last, "unexpected end of model")),
        }
    }

    fn keyword(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, line) = self.next()?;
        match line.strip_prefix(key) {
            Some(rest) if rest.is_empty() || rest.starts_with(' ') => Ok((n, rest.trim())),
            _ => Err(Error::parse(self.file, n, format!("expected `{key}`"))),
        }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::parse(self.file, line, msg)
    }
}

fn parse_f64(lines: &Lines<'_>, n: usize, s: &str) -> Result<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| lines.err(n, format!("bad number `{s}`")))
}

/// Parses a model written by [`write_model`] against `schema`.
pub fn parse_model(text: &str, file: &str, schema: &Schema) -> Result<BoostedModel> {
    let mut lines = Lines::new(text, file);
    let (n, version) = lines.keyword(MAGIC)?;
    if version != FORMAT_VERSION.to_string() {
        return Err(lines.err(n, format!("unsupported model version `{version}`")));
    }
    let (n, target) = lines.keyword("target")?;
    let (name, arity) = target.split_once('/').ok_or_else(|| lines.err(n, "expected `name/arity`"))?;
    let pred = schema.predicate(name).ok_or_else(|| lines.err(n, format!("unknown predicate `{name}`")))?;
    if arity.parse::<usize>().ok() != Some(schema.signature(pred).arity()) {
        return Err(lines.err(n, format!("arity mismatch for `{name}`")));
    }
    let (n, psi0) = lines.keyword("psi0")?;
    let psi0 = parse_f64(&lines, n, psi0)?;
    let (n, count) = lines.keyword("stages")?;
    let count: usize = count.parse().map_err(|_| lines.err(n, "bad stage count"))?;
    let mut model = BoostedModel::new(pred, psi0);
    for _ in 0..count {
        let (n, eta) = lines.keyword("stage eta")?;
        let eta = parse_f64(&lines, n, eta)?;
        let root = parse_node(&mut lines, schema, 0)?;
        model.push_stage(RelationalTree::new(pred, root), eta)?;
    }
    lines.keyword("end")?;
    if let Some((n, _)) = lines.inner.next() {
        return Err(lines.err(n, "content after `end`"));
    }
    Ok(model)
}

/// Parses one tree body written by [`write_tree`].
pub fn parse_tree(text: &str, file: &str, schema: &Schema, target: rb2_core::logic::PredId) -> Result<RelationalTree> {
    let mut lines = Lines::new(text, file);
    let root = parse_node(&mut lines, schema, 0)?;
    if let Some((n, _)) = lines.inner.next() {
        return Err(lines.err(n, "content after tree"));
    }
    Ok(RelationalTree::new(target, root))
}

const MAX_DEPTH: usize = 256;

fn parse_node(lines: &mut Lines<'_>, schema: &Schema, depth: usize) -> Result<Node> {
    let (n, line) = lines.next()?;
    if depth > MAX_DEPTH {
        return Err(lines.err(n, "tree too deep"));
    }
    if let Some(rest) = line.strip_prefix("leaf ") {
        let mut parts = rest.split_whitespace();
        let (Some(v), Some(k), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(lines.err(n, "expected `leaf <value> <count>`"));
        };
        let value = parse_f64(lines, n, v)?;
        let count = k.parse().map_err(|_| lines.err(n, format!("bad count `{k}`")))?;
        return Ok(Node::leaf(value, count));
    }
    let Some(rest) = line.strip_prefix("split ") else {
        return Err(lines.err(n, "expected `split` or `leaf`"));
    };
    let test = parse_literals(rest, schema).map_err(|m| lines.err(n, m))?;
    let on_true = parse_node(lines, schema, depth + 1)?;
    let on_false = parse_node(lines, schema, depth + 1)?;
    Ok(Node::split(test, on_true, on_false))
}

fn parse_literals(mut s: &str, schema: &Schema) -> std::result::Result<Vec<Atom>, String> {
    let mut out = Vec::new();
    loop {
        let (name, args, rest) = parse_atom(s)?;
        let pred = schema.predicate(&name).ok_or_else(|| format!("unknown predicate `{name}`"))?;
        let terms = args
            .iter()
            .map(|a| {
                if !a.quoted {
                    if let Some(v) = parse_var(&a.text) {
                        return Ok(Term::Var(v));
                    }
                }
                schema.constant_id(&a.text).map(Term::Const).ok_or_else(|| format!("unknown constant `{}`", a.text))
            })
            .collect::<std::result::Result<Vec<_>, String>>()?;
        let atom = Atom::new(pred, terms);
        atom.check(schema, &mut Default::default()).map_err(|e| e.to_string())?;
        out.push(atom);
        let rest = rest.trim_start();
        if rest.is_empty() {
            return Ok(out);
        }
        s = rest.strip_prefix(',').ok_or("expected `,` between literals")?;
    }
}
