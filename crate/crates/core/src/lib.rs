//! Character-level language models built on multiplicative recurrent cells.
//!
//! The crate is layered bottom-up: [`tensor`] (matrices, a reverse-mode
//! tape, gradient checking), [`cells`] (nine recurrent cell kinds),
//! [`model`] (the language model, BPC, sampling), [`data`] (corpora,
//! vocabularies, batching), [`train`] (Adam, epochs, checkpoints, budget
//! solver) and [`config`]/[`cli`] for reproducible runs.

pub mod cells;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod model;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
