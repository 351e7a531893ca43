//! Borg-style ε-dominance evolutionary optimizer.

pub mod archive;
pub mod borg;
pub mod dtlz;
pub mod operators;
pub mod store;

pub use archive::{eps_dominates, merge_archives, Archive, Dominance, InsertOutcome, Solution};
pub use borg::{random_search, run, Evaluation, MoeaConfig, Problem, RunResult};
pub use operators::{select_operator, vary, Bounds, Operator, OperatorParams};
