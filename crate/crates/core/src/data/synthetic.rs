use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng;

use super::{Dataset, Example};
use crate::logic::{satisfies, Atom, Conjunction, ConstId, FactStore, GroundAtom, Schema, Substitution, Term, VarId};
use crate::tilde::{ArgMode, Language, ModeDeclaration};
use crate::Result;

/// Ground-truth rule of the synthetic movie domain. Both rules are stated
/// over the target `willclick(A, B)` with `A` the user and `B` the movie.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum SyntheticRule {
    /// `goodmovie(B) ∧ friends(A,C) ∧ liked(C,B)`: needs a join through a
    /// friend, so it is not linear in a user's own binary features.
    Relational,
    /// `likesgenre(A,C) ∧ genre(B,C)`: for a fixed movie this is a single
    /// binary feature of the user.
    Propositional,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticParams {
    pub n_users: usize,
    pub n_movies: usize,
    pub n_genres: usize,
    pub n_age_groups: usize,
    pub friends_per_user: usize,
    pub likes_per_user: usize,
    /// Filler `watched/2` facts are added until the store holds this many
    /// facts (if reachable). 0 disables filler.
    pub target_facts: usize,
    pub rule: SyntheticRule,
    /// Probability of flipping each (user, movie) label.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            n_users: 1000,
            n_movies: 10,
            n_genres: 5,
            n_age_groups: 5,
            friends_per_user: 3,
            likes_per_user: 2,
            target_facts: 0,
            rule: SyntheticRule::Relational,
            noise: 0.0,
            seed: 0,
        }
    }
}

pub struct SyntheticDomain {
    pub dataset: Dataset,
    /// The generating rule as a conjunction over `A` (user) and `B` (movie).
    pub rule: Conjunction,
    pub rule_text: String,
}

/// Generates a movie-recommendation domain whose label sets follow a known
/// conjunctive rule, optionally with label noise.
///
/// The upper half of the movies (by index) are the good movies.
pub fn generate_synthetic(params: &SyntheticParams) -> Result<SyntheticDomain> {
    let p = params;
    if p.n_users < 2 || p.n_movies < 2 || p.n_genres == 0 || p.n_age_groups == 0 {
        return Err(crate::Error::Config("synthetic domain too small".into()));
    }
    if !(0.0..0.5).contains(&p.noise) {
        return Err(crate::Error::Config("noise must lie in [0, 0.5)".into()));
    }
    let mut schema = Schema::new();
    let willclick = schema.declare_predicate("willclick", &["user", "movie"])?;
    let goodmovie = schema.declare_predicate("goodmovie", &["movie"])?;
    let friends = schema.declare_predicate("friends", &["user", "user"])?;
    let liked = schema.declare_predicate("liked", &["user", "movie"])?;
    let watched = schema.declare_predicate("watched", &["user", "movie"])?;
    let genre = schema.declare_predicate("genre", &["movie", "genre"])?;
    let likesgenre = schema.declare_predicate("likesgenre", &["user", "genre"])?;
    let agegroup = schema.declare_predicate("agegroup", &["user", "age"])?;
    let similar = schema.declare_predicate("similar", &["movie", "movie"])?;
    let t = |s: &Schema, n| s.type_id(n).unwrap();
    let (tu, tm, tg, ta) = (t(&schema, "user"), t(&schema, "movie"), t(&schema, "genre"), t(&schema, "age"));
    let width = |n: usize| format!("{}", n.saturating_sub(1)).len();
    let intern = |s: &mut Schema, prefix: &str, n: usize, ty| -> Result<Vec<ConstId>> {
        let w = width(n);
        (0..n).map(|i| s.constant(&format!("{prefix}{i:0w$}"), ty)).collect()
    };
    let movies = intern(&mut schema, "m", p.n_movies, tm)?;
    let genres = intern(&mut schema, "g", p.n_genres, tg)?;
    let ages = intern(&mut schema, "a", p.n_age_groups, ta)?;
    let users = intern(&mut schema, "u", p.n_users, tu)?;

    let mut rng = crate::seeded_rng(p.seed);
    let mut facts: Vec<GroundAtom> = Vec::new();
    let g = |pred, args: &[ConstId]| GroundAtom::new(pred, args.to_vec());
    let good: Vec<ConstId> = movies[p.n_movies / 2..].to_vec();
    for &m in &good {
        facts.push(g(goodmovie, &[m]));
    }
    for (i, &m) in movies.iter().enumerate() {
        facts.push(g(genre, &[m, genres[i % p.n_genres]]));
        facts.push(g(similar, &[m, movies[(i + 1) % p.n_movies]]));
    }
    for &u in &users {
        facts.push(g(agegroup, &[u, ages[rng.gen_range(0..p.n_age_groups)]]));
        facts.push(g(likesgenre, &[u, genres[rng.gen_range(0..p.n_genres)]]));
    }
    for (i, &u) in users.iter().enumerate() {
        let k = p.friends_per_user.min(p.n_users - 1);
        let picks: Vec<usize> =
            sample(&mut rng, p.n_users - 1, k).into_iter().map(|j| if j >= i { j + 1 } else { j }).collect();
        for &j in &picks {
            facts.push(g(friends, &[u, users[j]]));
        }
    }
    for &u in &users {
        let k = p.likes_per_user.min(p.n_movies);
        for m in sample(&mut rng, p.n_movies, k) {
            facts.push(g(liked, &[u, movies[m]]));
        }
    }

    let mut store = FactStore::new(schema);
    store.add_facts(facts)?;
    if p.target_facts > store.len() {
        let room = p.n_users * p.n_movies;
        let mut watched_n = 0;
        while store.len() < p.target_facts && watched_n < room {
            let u = users[rng.gen_range(0..p.n_users)];
            let m = movies[rng.gen_range(0..p.n_movies)];
            if store.add_fact(g(watched, &[u, m]))? {
                watched_n += 1;
            }
        }
    }

    let v = |i| Term::Var(VarId(i));
    let (rule, rule_text) = match p.rule {
        SyntheticRule::Relational => (
            vec![
                Atom::new(goodmovie, vec![v(1)]),
                Atom::new(friends, vec![v(0), v(2)]),
                Atom::new(liked, vec![v(2), v(1)]),
            ],
            "willclick(A,B) :- goodmovie(B), friends(A,C), liked(C,B).",
        ),
        SyntheticRule::Propositional => (
            vec![Atom::new(likesgenre, vec![v(0), v(2)]), Atom::new(genre, vec![v(1), v(2)])],
            "willclick(A,B) :- likesgenre(A,C), genre(B,C).",
        ),
    };
    let mut examples = Vec::with_capacity(p.n_users);
    for &u in &users {
        let mut labels = BTreeSet::new();
        for &m in &movies {
            let mut holds = satisfies(&rule, &Substitution::from_args(&[u, m]), &store);
            if p.noise > 0.0 && rng.gen::<f64>() < p.noise {
                holds = !holds;
            }
            if holds {
                labels.insert(m);
            }
        }
        examples.push(Example { context: vec![u], labels });
    }

    let mode = |pred, modes: &[ArgMode]| ModeDeclaration { pred, modes: modes.to_vec(), max_occurrences: 2 };
    use ArgMode::{Constant as C, Input as I, Output as O};
    let language = Language::new(
        willclick,
        vec![
            mode(goodmovie, &[I]),
            mode(friends, &[I, O]),
            mode(liked, &[I, I]),
            mode(liked, &[O, I]),
            mode(watched, &[I, I]),
            mode(genre, &[I, O]),
            mode(genre, &[I, C]),
            mode(likesgenre, &[I, I]),
            mode(likesgenre, &[I, C]),
            mode(agegroup, &[I, C]),
            mode(similar, &[I, O]),
        ],
    );
    let name = match p.rule {
        SyntheticRule::Relational => "synthetic-movie",
        SyntheticRule::Propositional => "synthetic-movie-propositional",
    };
    let (dataset, _) = Dataset::new(name, store, language, 1, examples)?;
    Ok(SyntheticDomain { dataset, rule: Conjunction::new(rule), rule_text: rule_text.into() })
}
