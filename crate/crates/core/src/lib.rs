//! Rank-based secretary problem with cardinal payoffs and a cost of choice.
//!
//! Items with i.i.d. uniform values arrive one at a time; only relative ranks
//! are observed and exactly one item must be taken. Accepting item `t` pays
//! its value minus a cost that fades as a random fear time passes. The crate
//! computes the optimal threshold rule and its value by backward induction on
//! the chain of candidate times, the limiting threshold fraction and value as
//! `N` grows, and checks both against Monte Carlo and exhaustive enumeration.

pub mod asymptotics;
pub mod chain;
pub mod cli;
pub mod error;
pub mod model;
pub mod numeric;
pub mod report;
pub mod simulator;
pub mod solver;

pub use error::{Error, Result};
pub use model::{relative_rank_sequence, Cost, Problem, ProblemSpec, RankSequence, Variant};
pub use numeric::{NumericMode, Scalar};
pub use solver::{exact_solve, ola_threshold, solve, verify_monotone_case, SolveResult, ThresholdRule};
