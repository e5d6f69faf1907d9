//! Stochastic lot-type design for pre-packed supply, and the statistics used
//! to judge whether a supply strategy matches size demand.
//!
//! * [`model`], [`lotgen`]: sizes, lot-types, instances, plans.
//! * [`recourse`]: random demand and the markdown recourse.
//! * [`solver`]: exact branch-and-bound, greedy heuristic, brute-force oracle.
//! * [`evaluation`]: 50%-day, normalized sales rates, NSRD, top/flop dogs, TDD.
//! * [`stats`]: Wilcoxon rank-sum test.
//! * [`io`]: file formats, the sales simulator and the strategy comparison.

pub mod cli;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod lotgen;
pub mod model;
pub mod money;
pub mod recourse;
pub mod solver;
pub mod stats;

pub use error::{Error, Result};
pub use money::Money;
