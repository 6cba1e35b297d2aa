//! Rewrite categories: finitely presented 2-categories read as typed
//! string-rewriting systems.
//!
//! The crate checks confluence modulo equations, equality of parallel
//! derivations, and terminal-object claims for rewrite categories, with
//! built-in presentations for monads, composite monads and adjunctions.

pub mod cli;
pub mod confluence;
pub mod equivalence;
pub mod rewrite;
pub mod sig;
pub mod terminality;

use serde::Serialize;

/// Search bounds shared by the engines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    /// Extra length allowed for intermediate strings over the inputs.
    pub length_slack: usize,
    /// Maximum steps explored by derivation search.
    pub max_depth: usize,
    /// Node limit for congruence-closure search.
    pub node_limit: usize,
    /// Equation applications along one search branch.
    pub equation_depth: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            length_slack: 4,
            max_depth: 24,
            node_limit: 20_000,
            equation_depth: 8,
        }
    }
}

impl Budget {
    /// Multiplies the congruence-closure limits by `k`.
    pub fn scaled(self, k: usize) -> Budget {
        Budget {
            node_limit: self.node_limit * k,
            equation_depth: self.equation_depth * k,
            ..self
        }
    }
}
