//! Deposit-based voting with pivotal transfers: the settlement mechanism,
//! the player model, property checks and a scenario harness.

pub mod agents;
pub mod cli;
pub mod error;
pub mod mechanism;
pub mod sim;
pub mod verification;

pub use error::{Error, Result};
