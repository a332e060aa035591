use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

use super::{ConstId, PredId, Schema, Substitution, TypeId, VarId};
use crate::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// A constant; its type is recorded in the [`Schema`].
    Const(ConstId),
    Var(VarId),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: PredId,
    pub args: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    pub pred: PredId,
    pub args: Vec<ConstId>,
}

impl Atom {
    pub fn new(pred: PredId, args: Vec<Term>) -> Self {
        Self { pred, args }
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(*v),
            Term::Const(_) => None,
        })
    }

    /// Replaces bound variables by their constants.
    pub fn apply(&self, theta: &Substitution) -> Atom {
        let args = self
            .args
            .iter()
            .map(|t| match *t {
                Term::Var(v) => theta.get(v).map_or(*t, Term::Const),
                c => c,
            })
            .collect();
        Atom { pred: self.pred, args }
    }

    /// The ground atom obtained under `theta`, if it binds every variable.
    pub fn ground(&self, theta: &Substitution) -> Option<GroundAtom> {
        let args = self
            .args
            .iter()
            .map(|t| match *t {
                Term::Var(v) => theta.get(v),
                Term::Const(c) => Some(c),
            })
            .collect::<Option<Vec<_>>>()?;
        Some(GroundAtom { pred: self.pred, args })
    }

    /// Checks arity and constant types, and records variable types into
    /// `var_types`, failing on an inconsistent use.
    pub fn check(&self, schema: &Schema, var_types: &mut BTreeMap<VarId, TypeId>) -> Result<()> {
        if self.pred.index() >= schema.num_predicates() {
            return Err(Error::UnknownPredicate(format!("#{}", self.pred.0)));
        }
        let sig = schema.signature(self.pred);
        if sig.arity() != self.args.len() {
            return Err(Error::Arity { predicate: sig.name.clone(), expected: sig.arity(), found: self.args.len() });
        }
        for (pos, (t, &ty)) in self.args.iter().zip(&sig.arg_types).enumerate() {
            match *t {
                Term::Const(c) => {
                    if c.index() >= schema.num_constants() || schema.constant_type(c) != ty {
                        return Err(Error::Type(format!(
                            "constant at position {} of `{}` is not of type `{}`",
                            pos + 1,
                            sig.name,
                            schema.type_name(ty)
                        )));
                    }
                }
                Term::Var(v) => match var_types.get(&v) {
                    Some(&prev) if prev != ty => {
                        return Err(Error::Type(format!(
                            "variable {} used as `{}` and `{}`",
                            v.0,
                            schema.type_name(prev),
                            schema.type_name(ty)
                        )))
                    }
                    Some(_) => {}
                    None => {
                        var_types.insert(v, ty);
                    }
                },
            }
        }
        Ok(())
    }

    pub fn show<'a>(&'a self, schema: &'a Schema) -> ShowAtom<'a> {
        ShowAtom { schema, atom: self }
    }
}

impl GroundAtom {
    pub fn new(pred: PredId, args: Vec<ConstId>) -> Self {
        Self { pred, args }
    }

    pub fn to_atom(&self) -> Atom {
        Atom { pred: self.pred, args: self.args.iter().map(|&c| Term::Const(c)).collect() }
    }
}

/// Display adapter rendering variables as `A, B, ...` for the first 26 ids
/// and `V<n>` beyond.
pub struct ShowAtom<'a> {
    schema: &'a Schema,
    atom: &'a Atom,
}

pub fn write_var_name(f: &mut fmt::Formatter<'_>, v: VarId) -> fmt::Result {
    if v.0 < 26 {
        write!(f, "{}", (b'A' + v.0 as u8) as char)
    } else {
        write!(f, "V{}", v.0)
    }
}

impl fmt::Display for ShowAtom<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.schema.predicate_name(self.atom.pred))?;
        for (i, t) in self.atom.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match *t {
                Term::Const(c) => f.write_str(self.schema.constant_name(c))?,
                Term::Var(v) => write_var_name(f, v)?,
            }
        }
        f.write_str(")")
    }
}

/// Ordered list of positive literals, read as their conjunction.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Conjunction {
    pub literals: Vec<Atom>,
}

impl Conjunction {
    pub fn new(literals: Vec<Atom>) -> Self {
        Self { literals }
    }

    /// Type-checks every literal and returns the inferred variable types.
    pub fn check(&self, schema: &Schema) -> Result<BTreeMap<VarId, TypeId>> {
        let mut types = BTreeMap::new();
        for lit in &self.literals {
            lit.check(schema, &mut types)?;
        }
        Ok(types)
    }
}

impl Deref for Conjunction {
    type Target = [Atom];

    fn deref(&self) -> &[Atom] {
        &self.literals
    }
}

impl From<Vec<Atom>> for Conjunction {
    fn from(literals: Vec<Atom>) -> Self {
        Self { literals }
    }
}
