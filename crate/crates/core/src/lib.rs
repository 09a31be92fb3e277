//! Utility design for distributed covering games.
//!
//! Distribution rules and their price of anarchy ([`rules`]), covering
//! problems and equilibria ([`game`]), best-response and cardinality-learning
//! dynamics ([`dynamics`]), exhaustive small-instance checks ([`oracle`]) and
//! the data-caching experiment ([`bench`]).

pub mod bench;
pub mod cli;
pub mod dynamics;
pub mod game;
pub mod oracle;
pub mod par;
pub mod rational;
pub mod report;
pub mod rules;

pub use game::{Allocation, CoveringProblem};
pub use rational::Rational;
pub use rules::DistributionRule;
