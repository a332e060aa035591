//! Datasets and the bandit replay environment.

mod environment;
mod synthetic;

pub use environment::{make_environment, BanditEnvironment, FactDelta, LoggedInteraction, LoggingPolicy};
pub use synthetic::{generate_synthetic, SyntheticDomain, SyntheticParams, SyntheticRule};

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::logic::{ConstId, FactStore, GroundAtom, PredId, TypeId};
use crate::tilde::Language;
use crate::{Error, Result};

/// One context with its set of correct labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    /// Target arguments other than the label position, in order.
    pub context: Vec<ConstId>,
    pub labels: BTreeSet<ConstId>,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub store: FactStore,
    pub language: Language,
    /// Zero-based argument of the target that holds the label (the arm).
    pub label_position: usize,
    pub examples: Vec<Example>,
}

impl Dataset {
    /// Validates the examples, dropping those without a correct label.
    /// Returns the dataset and the number of dropped examples.
    pub fn new(
        name: impl Into<String>,
        store: FactStore,
        language: Language,
        label_position: usize,
        examples: Vec<Example>,
    ) -> Result<(Self, usize)> {
        let schema = store.schema();
        language.validate(schema)?;
        let sig = schema.signature(language.target);
        if label_position >= sig.arity() {
            return Err(Error::Schema(format!(
                "label position {} outside `{}`/{}",
                label_position + 1,
                sig.name,
                sig.arity()
            )));
        }
        let label_type = sig.arg_types[label_position];
        let context_types: Vec<TypeId> =
            sig.arg_types.iter().enumerate().filter(|(i, _)| *i != label_position).map(|(_, &t)| t).collect();
        let before = examples.len();
        let mut kept = Vec::with_capacity(before);
        for ex in examples {
            if ex.context.len() != context_types.len() {
                return Err(Error::Arity {
                    predicate: sig.name.clone(),
                    expected: sig.arity(),
                    found: ex.context.len() + 1,
                });
            }
            for (&c, &ty) in ex.context.iter().zip(&context_types) {
                if schema.constant_type(c) != ty {
                    return Err(Error::Type(format!(
                        "context constant `{}` is not of type `{}`",
                        schema.constant_name(c),
                        schema.type_name(ty)
                    )));
                }
            }
            if let Some(&bad) = ex.labels.iter().find(|&&l| schema.constant_type(l) != label_type) {
                return Err(Error::Type(format!(
                    "label `{}` is not of type `{}`",
                    schema.constant_name(bad),
                    schema.type_name(label_type)
                )));
            }
            if !ex.labels.is_empty() {
                kept.push(ex);
            }
        }
        let dropped = before - kept.len();
        if dropped > 0 {
            log::warn!("dropped {dropped} examples without a correct label");
        }
        if kept.is_empty() {
            return Err(Error::NoExamples);
        }
        let ds = Dataset { name: name.into(), store, language, label_position, examples: kept };
        Ok((ds, dropped))
    }

    pub fn target(&self) -> PredId {
        self.language.target
    }

    pub fn label_type(&self) -> TypeId {
        self.store.schema().signature(self.target()).arg_types[self.label_position]
    }

    /// Every constant of the label type, sorted by name.
    pub fn arms(&self) -> Vec<ConstId> {
        let schema = self.store.schema();
        let mut arms = schema.constants_of_type(self.label_type()).to_vec();
        arms.sort_by(|a, b| schema.constant_name(*a).cmp(schema.constant_name(*b)));
        arms
    }

    /// The target atom for `context` with `label` at the label position.
    pub fn query(&self, context: &[ConstId], label: ConstId) -> GroundAtom {
        build_query(self.target(), self.label_position, context, label)
    }
}

pub(crate) fn build_query(target: PredId, label_position: usize, context: &[ConstId], label: ConstId) -> GroundAtom {
    let mut args = Vec::with_capacity(context.len() + 1);
    args.extend_from_slice(&context[..label_position]);
    args.push(label);
    args.extend_from_slice(&context[label_position..]);
    GroundAtom::new(target, args)
}
