//! Generative Gibbs sampling with physical context.

pub mod config;
pub mod context;
pub mod doublewell;
pub mod error;
pub mod estimators;
pub mod gibbs;
pub mod numeric;
pub mod phi4;
pub mod prior;
pub mod replica;
pub mod rng;
pub mod runner;
pub mod schedule;
pub mod split_gibbs;

pub use error::{Error, Result};
