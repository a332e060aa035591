use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Type name given to every argument position of an untyped dataset.
pub const UNIVERSAL_TYPE: &str = "any";

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(
    /// Interned predicate name.
    PredId
);
id_type!(
    /// Interned type name.
    TypeId
);
id_type!(
    /// Interned constant symbol.
    ConstId
);

/// Bidirectional string ↔ dense id table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Interner {
    names: Vec<String>,
    index: BTreeMap<String, u32>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateSignature {
    pub name: String,
    pub arg_types: Vec<TypeId>,
}

impl PredicateSignature {
    pub fn arity(&self) -> usize {
        self.arg_types.len()
    }
}

/// Declared predicates, type names and the typed constant universe.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    predicates: Vec<PredicateSignature>,
    pred_index: BTreeMap<String, PredId>,
    types: Interner,
    constants: Interner,
    constant_types: Vec<TypeId>,
    constants_by_type: Vec<Vec<ConstId>>,
}

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare_type(&mut self, name: &str) -> TypeId {
        let id = TypeId(self.types.intern(name));
        if self.constants_by_type.len() <= id.index() {
            self.constants_by_type.resize(id.index() + 1, Vec::new());
        }
        id
    }

    pub fn type_id(&self, name: &str) -> Option<TypeId> {
        self.types.get(name).map(TypeId)
    }

    pub fn type_name(&self, ty: TypeId) -> &str {
        self.types.name(ty.0)
    }

    pub fn num_types(&self) -> usize {
        self.types.len()
    }

    /// Declares `name/arity` with the given position types. Redeclaring an
    /// identical signature returns the existing id.
    pub fn declare_predicate(&mut self, name: &str, arg_types: &[&str]) -> Result<PredId> {
        if arg_types.is_empty() {
            return Err(Error::Schema(format!("predicate `{name}` must have arity >= 1")));
        }
        let types: Vec<TypeId> = arg_types.iter().map(|t| self.declare_type(t)).collect();
        if let Some(&id) = self.pred_index.get(name) {
            if self.predicates[id.index()].arg_types == types {
                return Ok(id);
            }
            return Err(Error::Schema(format!("predicate `{name}` redeclared with a different signature")));
        }
        let id = PredId(self.predicates.len() as u32);
        self.predicates.push(PredicateSignature { name: name.to_string(), arg_types: types });
        self.pred_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn predicate(&self, name: &str) -> Option<PredId> {
        self.pred_index.get(name).copied()
    }

    pub fn signature(&self, pred: PredId) -> &PredicateSignature {
        &self.predicates[pred.index()]
    }

    pub fn predicate_name(&self, pred: PredId) -> &str {
        &self.predicates[pred.index()].name
    }

    pub fn predicates(&self) -> impl Iterator<Item = (PredId, &PredicateSignature)> {
        self.predicates.iter().enumerate().map(|(i, s)| (PredId(i as u32), s))
    }

    pub fn num_predicates(&self) -> usize {
        self.predicates.len()
    }

    /// Interns a constant of type `ty`. A constant carries exactly one type;
    /// re-interning it under another type is an error.
    pub fn constant(&mut self, name: &str, ty: TypeId) -> Result<ConstId> {
        if let Some(id) = self.constants.get(name) {
            let existing = self.constant_types[id as usize];
            if existing != ty {
                return Err(Error::Type(format!(
                    "constant `{name}` has type `{}`, used as `{}`",
                    self.type_name(existing),
                    self.type_name(ty)
                )));
            }
            return Ok(ConstId(id));
        }
        let id = ConstId(self.constants.intern(name));
        self.constant_types.push(ty);
        self.constants_by_type[ty.index()].push(id);
        Ok(id)
    }

    pub fn constant_id(&self, name: &str) -> Option<ConstId> {
        self.constants.get(name).map(ConstId)
    }

    pub fn constant_name(&self, c: ConstId) -> &str {
        self.constants.name(c.0)
    }

    pub fn constant_type(&self, c: ConstId) -> TypeId {
        self.constant_types[c.index()]
    }

    pub fn num_constants(&self) -> usize {
        self.constants.len()
    }

    /// Constants of one type in interning order.
    pub fn constants_of_type(&self, ty: TypeId) -> &[ConstId] {
        self.constants_by_type.get(ty.index()).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Resolves `pred(args...)` from text, interning constants with the
    /// position types of the predicate.
    pub fn ground(&mut self, pred: &str, args: &[&str]) -> Result<super::GroundAtom> {
        let id = self.predicate(pred).ok_or_else(|| Error::UnknownPredicate(pred.to_string()))?;
        let sig = self.signature(id).clone();
        if sig.arity() != args.len() {
            return Err(Error::Arity { expected: sig.arity(), predicate: sig.name, found: args.len() });
        }
        let args = args.iter().zip(&sig.arg_types).map(|(a, &ty)| self.constant(a, ty)).collect::<Result<Vec<_>>>()?;
        Ok(super::GroundAtom { pred: id, args })
    }

    /// Checks arity and constant types of a ground atom.
    pub fn check_ground(&self, atom: &super::GroundAtom) -> Result<()> {
        let sig = self
            .predicates
            .get(atom.pred.index())
            .ok_or_else(|| Error::UnknownPredicate(format!("#{}", atom.pred.0)))?;
        if sig.arity() != atom.args.len() {
            return Err(Error::Arity { predicate: sig.name.clone(), expected: sig.arity(), found: atom.args.len() });
        }
        for (pos, (&c, &ty)) in atom.args.iter().zip(&sig.arg_types).enumerate() {
            if c.index() >= self.constant_types.len() {
                return Err(Error::Type(format!("unknown constant #{}", c.0)));
            }
            if self.constant_types[c.index()] != ty {
                return Err(Error::Type(format!(
                    "`{}` at position {} of `{}` expects `{}`, got `{}`",
                    self.constant_name(c),
                    pos + 1,
                    sig.name,
                    self.type_name(ty),
                    self.type_name(self.constant_type(c))
                )));
            }
        }
        Ok(())
    }

    /// Wraps a ground atom for display with textual names.
    pub fn show_ground<'a>(&'a self, atom: &'a super::GroundAtom) -> impl fmt::Display + 'a {
        ShowGround { schema: self, atom }
    }
}

struct ShowGround<'a> {
    schema: &'a Schema,
    atom: &'a super::GroundAtom,
}

impl fmt::Display for ShowGround<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.schema.predicate_name(self.atom.pred))?;
        for (i, c) in self.atom.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(self.schema.constant_name(*c))?;
        }
        f.write_str(")")
    }
}
