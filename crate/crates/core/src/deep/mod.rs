//! Neural CFR: cumulative advantages fitted by bootstrapping from the
//! previous iteration's network, with an optional history value baseline.

mod config;
mod solver;

pub use config::{eval_schedule, DeepVariant, DiscountKind, Hyperparameters, RunConfig};
pub use solver::{
    run, strategy_from_outputs, successor_value, DeepRun, DeepSolver, LogRow, NetworkPolicy, RunLog,
};
