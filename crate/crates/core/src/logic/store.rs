use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{ConstId, GroundAtom, PredId, Schema, TypeId};
use crate::Result;

/// Indexed set of ground atoms: the background knowledge.
///
/// Facts are addressed by insertion index. Two indexes back retrieval: all
/// facts of a predicate, and all facts of a predicate with a given constant
/// at a given position. The revision counter increases on every mutation
/// that adds at least one new fact, so a `&FactStore` plus its revision is a
/// consistent snapshot.
#[derive(Clone, Debug)]
pub struct FactStore {
    schema: Schema,
    facts: Vec<GroundAtom>,
    lookup: BTreeMap<GroundAtom, u32>,
    by_pred: Vec<Vec<u32>>,
    by_arg: BTreeMap<(PredId, u32, ConstId), Vec<u32>>,
    occurrences: Vec<u32>,
    revision: u64,
}

impl FactStore {
    pub fn new(schema: Schema) -> Self {
        Self {
            schema,
            facts: Vec::new(),
            lookup: BTreeMap::new(),
            by_pred: Vec::new(),
            by_arg: BTreeMap::new(),
            occurrences: Vec::new(),
            revision: 0,
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// Mutable schema access for interning constants and declaring
    /// predicates. Existing facts stay valid: ids are never reassigned.
    pub fn schema_mut(&mut self) -> &mut Schema {
        &mut self.schema
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn contains(&self, fact: &GroundAtom) -> bool {
        self.lookup.contains_key(fact)
    }

    /// Inserts facts after validating all of them against the schema.
    ///
    /// Nothing is inserted if any fact is invalid. Returns the number of
    /// facts that were new; the revision is bumped only when that is > 0.
    pub fn add_facts<I>(&mut self, facts: I) -> Result<usize>
    where
        I: IntoIterator<Item = GroundAtom>,
    {
        let facts: Vec<GroundAtom> = facts.into_iter().collect();
        for f in &facts {
            self.schema.check_ground(f)?;
        }
        let mut added = 0;
        for f in facts {
            if self.insert_unchecked(f) {
                added += 1;
            }
        }
        if added > 0 {
            self.revision += 1;
        }
        Ok(added)
    }

    pub fn add_fact(&mut self, fact: GroundAtom) -> Result<bool> {
        Ok(self.add_facts(core::iter::once(fact))? == 1)
    }

    fn insert_unchecked(&mut self, fact: GroundAtom) -> bool {
        if self.lookup.contains_key(&fact) {
            return false;
        }
        let id = self.facts.len() as u32;
        let p = fact.pred.index();
        if self.by_pred.len() <= p {
            self.by_pred.resize(p + 1, Vec::new());
        }
        self.by_pred[p].push(id);
        for (pos, &c) in fact.args.iter().enumerate() {
            self.by_arg.entry((fact.pred, pos as u32, c)).or_default().push(id);
            if self.occurrences.len() <= c.index() {
                self.occurrences.resize(c.index() + 1, 0);
            }
            self.occurrences[c.index()] += 1;
        }
        self.lookup.insert(fact.clone(), id);
        self.facts.push(fact);
        true
    }

    pub fn fact(&self, id: u32) -> &GroundAtom {
        &self.facts[id as usize]
    }

    pub fn facts(&self) -> &[GroundAtom] {
        &self.facts
    }

    /// Ids of all facts of `pred`, in insertion order.
    pub fn facts_of(&self, pred: PredId) -> &[u32] {
        self.by_pred.get(pred.index()).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Ids of facts of `pred` with `c` at argument position `pos`.
    pub fn facts_with(&self, pred: PredId, pos: usize, c: ConstId) -> &[u32] {
        self.by_arg.get(&(pred, pos as u32, c)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// How many stored facts mention `c`, counting each position.
    pub fn occurrences(&self, c: ConstId) -> u32 {
        self.occurrences.get(c.index()).copied().unwrap_or(0)
    }

    /// Up to `limit` constants of type `ty` that occur in facts, most
    /// frequent first, ties by interning order.
    pub fn frequent_constants(&self, ty: TypeId, limit: usize) -> Vec<ConstId> {
        let mut cs: Vec<ConstId> =
            self.schema.constants_of_type(ty).iter().copied().filter(|&c| self.occurrences(c) > 0).collect();
        cs.sort_by(|a, b| self.occurrences(*b).cmp(&self.occurrences(*a)).then(a.cmp(b)));
        cs.truncate(limit);
        cs
    }
}
