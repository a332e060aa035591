use alloc::format;
use alloc::vec::Vec;

use crate::logic::{PredId, Schema};
use crate::{Error, Result};

/// Per-position language bias.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArgMode {
    /// `+`: reuse an in-scope variable of the position's type.
    Input,
    /// `-`: introduce a fresh variable.
    Output,
    /// `#`: place a constant observed in the store.
    Constant,
}

impl ArgMode {
    pub fn symbol(self) -> char {
        match self {
            ArgMode::Input => '+',
            ArgMode::Output => '-',
            ArgMode::Constant => '#',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeDeclaration {
    pub pred: PredId,
    pub modes: Vec<ArgMode>,
    /// How often the predicate may occur along one root-to-leaf path.
    pub max_occurrences: usize,
}

/// Target predicate plus the refinement modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Language {
    pub target: PredId,
    pub modes: Vec<ModeDeclaration>,
}

impl Language {
    pub fn new(target: PredId, modes: Vec<ModeDeclaration>) -> Self {
        Self { target, modes }
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        if self.target.index() >= schema.num_predicates() {
            return Err(Error::Schema(format!("unknown target predicate #{}", self.target.0)));
        }
        if self.modes.is_empty() {
            return Err(Error::Schema("no mode declarations".into()));
        }
        for m in &self.modes {
            if m.pred.index() >= schema.num_predicates() {
                return Err(Error::Schema(format!("unknown mode predicate #{}", m.pred.0)));
            }
            let sig = schema.signature(m.pred);
            if sig.arity() != m.modes.len() {
                return Err(Error::Arity { predicate: sig.name.clone(), expected: sig.arity(), found: m.modes.len() });
            }
            if m.max_occurrences == 0 {
                return Err(Error::Schema(format!("mode for `{}` allows zero occurrences", sig.name)));
            }
        }
        Ok(())
    }
}
