use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::{ArgMode, Language, ModeDeclaration, TreeParams};
use crate::logic::{Atom, FactStore, Term, TypeId, VarId};

/// Candidate tests that may extend `path` at a node.
///
/// `path` is the accumulated true-branch conjunction; variables
/// `0..arity(target)` are the query's arguments. A candidate has between one
/// and `max_literals_per_test` literals, and every literal after the first
/// consumes a variable introduced by its predecessor, so multi-literal tests
/// only arise to link fresh variables. Literals already on the path are
/// skipped, as are predicates at their occurrence cap.
///
/// The result is sorted by literal count, then by predicate name and argument
/// pattern; this order is the learner's tie-break.
pub fn refinements(path: &[Atom], lang: &Language, store: &FactStore, params: &TreeParams) -> Vec<Vec<Atom>> {
    let schema = store.schema();
    let mut scope: BTreeMap<VarId, TypeId> = BTreeMap::new();
    for (i, &ty) in schema.signature(lang.target).arg_types.iter().enumerate() {
        scope.insert(VarId(i as u32), ty);
    }
    for lit in path {
        for (t, &ty) in lit.args.iter().zip(&schema.signature(lit.pred).arg_types) {
            if let Term::Var(v) = *t {
                scope.entry(v).or_insert(ty);
            }
        }
    }
    let next = scope.keys().next_back().map_or(0, |v| v.0 + 1);

    let mut out = Vec::new();
    let mut current = Vec::new();
    extend(path, lang, store, params, &scope, next, None, &mut current, &mut out);

    let mut keyed: Vec<(usize, Vec<(String, Vec<ArgKey>)>, Vec<Atom>)> =
        out.into_iter().map(|c: Vec<Atom>| (c.len(), sort_key(store, &c), c)).collect();
    keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    keyed.into_iter().map(|(_, _, c)| c).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum ArgKey {
    Var(u32),
    Const(String),
}

fn sort_key(store: &FactStore, cand: &[Atom]) -> Vec<(String, Vec<ArgKey>)> {
    let schema = store.schema();
    cand.iter()
        .map(|lit| {
            let args = lit
                .args
                .iter()
                .map(|t| match *t {
                    Term::Var(v) => ArgKey::Var(v.0),
                    Term::Const(c) => ArgKey::Const(schema.constant_name(c).into()),
                })
                .collect();
            (schema.predicate_name(lit.pred).into(), args)
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn extend(
    path: &[Atom],
    lang: &Language,
    store: &FactStore,
    params: &TreeParams,
    scope: &BTreeMap<VarId, TypeId>,
    next: u32,
    must_use: Option<&[VarId]>,
    current: &mut Vec<Atom>,
    out: &mut Vec<Vec<Atom>>,
) {
    if current.len() >= params.max_literals_per_test {
        return;
    }
    for mode in &lang.modes {
        let used = path.iter().chain(current.iter()).filter(|l| l.pred == mode.pred).count();
        if used >= mode.max_occurrences {
            continue;
        }
        for (lit, fresh) in literals_for(mode, store, params, scope, next) {
            if let Some(req) = must_use {
                let links = lit
                    .args
                    .iter()
                    .zip(&mode.modes)
                    .any(|(t, m)| *m == ArgMode::Input && matches!(t, Term::Var(v) if req.contains(v)));
                if !links {
                    continue;
                }
            }
            if path.contains(&lit) || current.contains(&lit) {
                continue;
            }
            let types = &store.schema().signature(mode.pred).arg_types;
            current.push(lit);
            out.push(current.clone());
            if !fresh.is_empty() {
                let mut inner = scope.clone();
                let lit = current.last().unwrap();
                for (t, &ty) in lit.args.iter().zip(types) {
                    if let Term::Var(v) = *t {
                        inner.entry(v).or_insert(ty);
                    }
                }
                let next_inner = next + fresh.len() as u32;
                extend(path, lang, store, params, &inner, next_inner, Some(&fresh), current, out);
            }
            current.pop();
        }
    }
}

/// Every literal a mode admits in `scope`, with the fresh variables each one
/// introduces (numbered from `next`).
fn literals_for(
    mode: &ModeDeclaration,
    store: &FactStore,
    params: &TreeParams,
    scope: &BTreeMap<VarId, TypeId>,
    next: u32,
) -> Vec<(Atom, Vec<VarId>)> {
    let sig = store.schema().signature(mode.pred);
    let mut options: Vec<Vec<Term>> = Vec::with_capacity(sig.arity());
    let mut fresh_id = next;
    for (&m, &ty) in mode.modes.iter().zip(&sig.arg_types) {
        let opts: Vec<Term> = match m {
            ArgMode::Input => scope.iter().filter(|(_, &t)| t == ty).map(|(&v, _)| Term::Var(v)).collect(),
            ArgMode::Output => {
                let v = VarId(fresh_id);
                fresh_id += 1;
                alloc::vec![Term::Var(v)]
            }
            ArgMode::Constant => store
                .frequent_constants(ty, params.candidate_constants_per_position)
                .into_iter()
                .map(Term::Const)
                .collect(),
        };
        if opts.is_empty() {
            return Vec::new();
        }
        options.push(opts);
    }
    let fresh: Vec<VarId> = (next..fresh_id).map(VarId).collect();
    let mut out = Vec::new();
    let mut args = Vec::with_capacity(options.len());
    product(&options, &mut args, &mut |args| {
        out.push((Atom::new(mode.pred, args.to_vec()), fresh.clone()));
    });
    out
}

fn product(options: &[Vec<Term>], prefix: &mut Vec<Term>, emit: &mut dyn FnMut(&[Term])) {
    if prefix.len() == options.len() {
        emit(prefix);
        return;
    }
    for &t in &options[prefix.len()] {
        prefix.push(t);
        product(options, prefix, emit);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::tiny_domain;
    use alloc::string::ToString;

    fn show(store: &FactStore, c: &[Atom]) -> String {
        c.iter().map(|a| a.show(store.schema()).to_string()).collect::<Vec<_>>().join(", ")
    }

    #[test]
    fn root_refinements_respect_modes() {
        let dom = tiny_domain(30, 0);
        let ds = &dom.dataset;
        let cands = refinements(&[], &ds.language, &ds.store, &TreeParams::default());
        let shown: Vec<String> = cands.iter().map(|c| show(&ds.store, c)).collect();
        assert!(shown.contains(&"goodmovie(B)".to_string()));
        assert!(shown.contains(&"friends(A,C), liked(C,B)".to_string()));
        assert!(shown.contains(&"liked(C,B)".to_string()));
        assert!(shown.iter().all(|s| !s.starts_with("friends(C") && !s.starts_with("friends(B")));
        for w in cands.windows(2) {
            assert!(w[0].len() <= w[1].len());
        }
    }

    #[test]
    fn literal_cap_limits_conjunction_size() {
        let dom = tiny_domain(30, 0);
        let ds = &dom.dataset;
        let params = TreeParams { max_literals_per_test: 1, ..TreeParams::default() };
        assert!(refinements(&[], &ds.language, &ds.store, &params).iter().all(|c| c.len() == 1));
    }

    #[test]
    fn path_literals_are_not_repeated() {
        let dom = tiny_domain(30, 0);
        let ds = &dom.dataset;
        let path = [dom.rule[0].clone()];
        let cands = refinements(&path, &ds.language, &ds.store, &TreeParams::default());
        assert!(cands.iter().all(|c| !c.contains(&path[0])));
    }
}
