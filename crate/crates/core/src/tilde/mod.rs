//! Relational regression trees.
//!
//! Trees are grown top-down. Each inner node holds a conjunction of new
//! literals; a query goes to the true branch when the conjunction of every
//! ancestor test on its true path plus this node's test is satisfiable under
//! the query's bindings. False branches add nothing to the path. Exactly one
//! leaf is reached per query.

mod learn;
mod modes;
mod refine;
mod split;
mod tree;

pub use learn::{learn_tree, LeafEstimator, LogitLeaf, MeanLeaf, RegressionExample, TreeParams};
pub use modes::{ArgMode, Language, ModeDeclaration};
pub use refine::refinements;
pub use split::{score_split, weighted_sse, SplitScore};
pub use tree::{Leaf, Node, RelationalTree, Split};
