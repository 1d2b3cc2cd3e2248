//! Exact solver for absorbing Markov chains.
//!
//! Two independent routes compute the fundamental matrix `N` (expected
//! visits to each transient state) and the absorption matrix `B`
//! (probability of ending in each absorbing state):
//!
//! * [`engine`]: Engel's chip-firing abacus, which reads the answers off
//!   integer chip counts accumulated over one cycle from the critical
//!   loading;
//! * [`oracle`]: `N = (I - Q)^-1` and `B = N R` by exact rational
//!   elimination.
//!
//! [`harness`] and [`verify`] check the recurrence properties that make the
//! abacus correct, and [`simulate`] gives a seeded Monte Carlo cross-check.
//!
//! ```
//! use abacus_core::{chain, engine, fixtures, oracle};
//!
//! let spec = chain::parse_chain(fixtures::DRIFT_WALK).unwrap();
//! let chips = chain::integerize(&spec).unwrap();
//! let abacus = engine::solve_all(&chips, engine::DEFAULT_BUDGET).unwrap();
//! let exact = oracle::matrix_solve(&spec).unwrap();
//! assert_eq!(abacus, exact);
//! assert_eq!(abacus.n[(0, 0)].to_string(), "9/7");
//! ```

pub mod arith;
pub mod chain;
pub mod corpus;
pub mod engine;
pub mod fixtures;
pub mod harness;
pub mod matrix;
pub mod oracle;
pub mod rng;
pub mod simulate;
pub mod verify;

#[cfg(test)]
mod testutil;

pub use arith::{BigInteger, Rational};
pub use chain::{ChainError, ChainSpec, IntegerChain};
pub use engine::{ChipConfig, EngineError, ResultMatrices, RunStats};
pub use matrix::RationalMatrix;
