//! Exact full-traversal CFR and its regret/strategy update variants.

mod policy;
mod rules;
mod solver;

pub use policy::TabularPolicy;
pub use rules::{
    discount, discounted_plus, regret_matching, regret_matching_argmax, regret_matching_argmax_into,
    regret_matching_into, RegretUpdateRule, Variant,
};
pub use solver::{normalize_row, run_cfr, CfrRun, TabularSolver};
