//! File formats, subprocess evaluation and the `bbhpo` command-line tool
//! on top of [`bbhpo_core`].

pub mod cachefile;
pub mod cli;
pub mod config;
mod error;
pub mod export;
pub mod harness;
pub mod historyfile;
pub mod num;
pub mod scores;

pub use bbhpo_core as core;
pub use error::{Error, Result};
