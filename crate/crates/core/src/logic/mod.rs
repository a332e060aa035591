//! First-order representation and conjunctive query evaluation.
//!
//! Predicates, types and constants are interned to dense integer ids; the
//! textual names live in the [`Schema`]. Conjunctions contain positive
//! literals only, so satisfiability is monotone in the fact set.

mod atom;
mod query;
mod schema;
mod store;
mod substitution;

pub use atom::{write_var_name, Atom, Conjunction, GroundAtom, ShowAtom, Term};
pub use query::{count_groundings, match_atom, satisfies};
pub use schema::{ConstId, Interner, PredId, PredicateSignature, Schema, TypeId, UNIVERSAL_TYPE};
pub use store::FactStore;
pub use substitution::{Substitution, VarId};
