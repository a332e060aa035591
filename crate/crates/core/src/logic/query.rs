use alloc::vec;
use alloc::vec::Vec;

use super::{Atom, ConstId, FactStore, GroundAtom, Substitution, Term};

const UNBOUND: u32 = u32::MAX;

/// All extensions of `theta` under which `atom` equals some stored fact.
///
/// Each stored fact yields at most one extension, and distinct facts yield
/// distinct extensions, so the stream is duplicate-free.
pub fn match_atom<'a>(
    atom: &'a Atom,
    theta: &'a Substitution,
    store: &'a FactStore,
) -> impl Iterator<Item = Substitution> + 'a {
    let applied = atom.apply(theta);
    let candidates = candidate_facts(store, &applied, |_| None);
    candidates.iter().filter_map(move |&id| {
        let fact = store.fact(id);
        let mut out = theta.clone();
        for (t, &c) in applied.args.iter().zip(&fact.args) {
            match *t {
                Term::Const(k) if k != c => return None,
                Term::Const(_) => {}
                Term::Var(v) => out.bind(v, c).ok()?,
            }
        }
        Some(out)
    })
}

/// Existential satisfaction: is there an extension of `theta` grounding every
/// literal of `conj` to a stored fact? The empty conjunction is satisfied.
pub fn satisfies(conj: &[Atom], theta: &Substitution, store: &FactStore) -> bool {
    let mut join = Join::new(conj, theta, store);
    join.run(&mut |_| false)
}

/// Number of distinct extensions of `theta`, restricted to the variables of
/// `conj`, that ground every literal to a stored fact.
pub fn count_groundings(conj: &[Atom], theta: &Substitution, store: &FactStore) -> u64 {
    let mut join = Join::new(conj, theta, store);
    let mut n = 0u64;
    join.run(&mut |_| {
        n += 1;
        true
    });
    n
}

/// Smallest index list covering the facts that could match `atom`, using
/// constants in the atom or bindings reported by `bound`.
fn candidate_facts<'s>(store: &'s FactStore, atom: &Atom, bound: impl Fn(u32) -> Option<ConstId>) -> &'s [u32] {
    let mut best: Option<&'s [u32]> = None;
    for (pos, t) in atom.args.iter().enumerate() {
        let c = match *t {
            Term::Const(c) => Some(c),
            Term::Var(v) => bound(v.0),
        };
        if let Some(c) = c {
            let list = store.facts_with(atom.pred, pos, c);
            if best.is_none_or(|b| list.len() < b.len()) {
                best = Some(list);
                if list.is_empty() {
                    break;
                }
            }
        }
    }
    best.unwrap_or_else(|| store.facts_of(atom.pred))
}

/// Backtracking nested-loop join. At every level the pending literal with
/// the fewest candidate facts is expanded next.
struct Join<'a> {
    store: &'a FactStore,
    lits: &'a [Atom],
    done: Vec<bool>,
    binds: Vec<u32>,
    trail: Vec<u32>,
}

impl<'a> Join<'a> {
    fn new(lits: &'a [Atom], theta: &Substitution, store: &'a FactStore) -> Self {
        let max_var = lits.iter().flat_map(Atom::vars).map(|v| v.index() + 1).max().unwrap_or(0);
        let slots = theta.slots();
        let mut binds = vec![UNBOUND; max_var.max(slots.len())];
        for (i, s) in slots.iter().enumerate() {
            if let Some(c) = s {
                binds[i] = c.0;
            }
        }
        Self { store, lits, done: vec![false; lits.len()], binds, trail: Vec::new() }
    }

    /// Enumerates solutions until `visit` returns false. Returns true when
    /// stopped early.
    fn run(&mut self, visit: &mut dyn FnMut(&[u32]) -> bool) -> bool {
        self.search(self.lits.len(), visit)
    }

    fn bound(&self, v: u32) -> Option<ConstId> {
        match self.binds[v as usize] {
            UNBOUND => None,
            c => Some(ConstId(c)),
        }
    }

    fn search(&mut self, remaining: usize, visit: &mut dyn FnMut(&[u32]) -> bool) -> bool {
        if remaining == 0 {
            return !visit(&self.binds);
        }
        let store = self.store;
        let mut pick = usize::MAX;
        let mut cands: &'a [u32] = &[];
        for (i, lit) in self.lits.iter().enumerate() {
            if self.done[i] {
                continue;
            }
            let c = candidate_facts(store, lit, |v| self.bound(v));
            if pick == usize::MAX || c.len() < cands.len() {
                pick = i;
                cands = c;
                if c.is_empty() {
                    return false;
                }
            }
        }
        let lit = &self.lits[pick];
        self.done[pick] = true;
        for &id in cands {
            let mark = self.trail.len();
            if self.unify(lit, store.fact(id)) && self.search(remaining - 1, visit) {
                self.undo(mark);
                self.done[pick] = false;
                return true;
            }
            self.undo(mark);
        }
        self.done[pick] = false;
        false
    }

    fn unify(&mut self, lit: &Atom, fact: &GroundAtom) -> bool {
        for (t, &c) in lit.args.iter().zip(&fact.args) {
            match *t {
                Term::Const(k) => {
                    if k != c {
                        return false;
                    }
                }
                Term::Var(v) => {
                    let slot = &mut self.binds[v.index()];
                    if *slot == UNBOUND {
                        *slot = c.0;
                        self.trail.push(v.0);
                    } else if *slot != c.0 {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            self.binds[v as usize] = UNBOUND;
        }
    }
}
