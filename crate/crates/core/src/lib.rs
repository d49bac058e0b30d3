//! Exact envy-free rent division with a maximin (leximin-refined) pricing
//! rule, plus tools for studying coordinated misreporting.
//!
//! The mechanism has two stages: a welfare-maximizing assignment
//! ([`matching`]) followed by the envy-free price vector that maximizes the
//! minimum utility ([`pricing`]). All arithmetic is exact ([`Rational`]).

pub mod error;
pub mod fm;
pub mod lp;
pub mod manipulation;
pub mod matching;
pub mod mechanism;
pub mod model;
pub mod pricing;
pub mod rational;
pub mod scenario;

#[cfg(test)]
mod testdata;

pub use error::{Error, Result, ValidationError};
pub use mechanism::Mechanism;
pub use model::{Assignment, Instance, Outcome, PriceVector, ValuationMatrix};
pub use rational::{MoneyRounding, Rational};
