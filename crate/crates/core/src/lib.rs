//! Bayesian best-response opponent modeling for three-player Kuhn poker.
//!
//! The crate contains an exact game engine ([`game`]), behavioral strategies
//! and the robust equilibrium agents ([`strategy`]), exact best responses
//! ([`best_response`]), sampled Dirichlet priors with exact posterior updates
//! ([`bayes`]), the modeling agent itself ([`agent`]) and a duplicate-match
//! tournament harness ([`harness`]).

pub mod agent;
pub mod bayes;
pub mod best_response;
pub mod error;
pub mod game;
pub mod harness;
pub mod strategy;

pub use error::{Error, Result};
