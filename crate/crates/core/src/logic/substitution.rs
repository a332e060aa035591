use alloc::vec::Vec;

use super::ConstId;
use crate::{Error, Result};

/// Logical variable. Ids are dense per conjunction; trees use `0..arity`
/// for the target query's arguments.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Finite map from variables to constants. Bindings are never overwritten.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    // No trailing `None`, so derived equality is map equality.
    slots: Vec<Option<ConstId>>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds variables `0..args.len()` to `args` in order.
    pub fn from_args(args: &[ConstId]) -> Self {
        Self { slots: args.iter().map(|&c| Some(c)).collect() }
    }

    pub fn get(&self, v: VarId) -> Option<ConstId> {
        self.slots.get(v.index()).copied().flatten()
    }

    pub fn is_bound(&self, v: VarId) -> bool {
        self.get(v).is_some()
    }

    /// Adds `v ↦ c`. Rebinding to the same constant is a no-op; rebinding to a
    /// different one fails and leaves the substitution unchanged.
    pub fn bind(&mut self, v: VarId, c: ConstId) -> Result<()> {
        match self.get(v) {
            Some(old) if old == c => Ok(()),
            Some(_) => Err(Error::Rebind(v.0)),
            None => {
                if self.slots.len() <= v.index() {
                    self.slots.resize(v.index() + 1, None);
                }
                self.slots[v.index()] = Some(c);
                Ok(())
            }
        }
    }

    /// Number of bound variables.
    pub fn len(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, ConstId)> + '_ {
        self.slots.iter().enumerate().filter_map(|(i, s)| s.map(|c| (VarId(i as u32), c)))
    }

    /// True when every binding of `other` is also present in `self`.
    pub fn extends(&self, other: &Substitution) -> bool {
        other.iter().all(|(v, c)| self.get(v) == Some(c))
    }

    pub(crate) fn slots(&self) -> &[Option<ConstId>] {
        &self.slots
    }

    #[cfg(test)]
    pub(crate) fn from_slots(mut slots: Vec<Option<ConstId>>) -> Self {
        while matches!(slots.last(), Some(None)) {
            slots.pop();
        }
        Self { slots }
    }
}

impl FromIterator<(VarId, ConstId)> for Substitution {
    /// Later pairs for an already-bound variable are ignored.
    fn from_iter<I: IntoIterator<Item = (VarId, ConstId)>>(iter: I) -> Self {
        let mut s = Substitution::new();
        for (v, c) in iter {
            if !s.is_bound(v) {
                let _ = s.bind(v, c);
            }
        }
        s
    }
}
