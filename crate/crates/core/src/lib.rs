//! Steiner triple systems with subsystem-preserving doubling and embedding.
//! Every construction can be re-checked by exhaustive subsystem enumeration.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the command
//! line live in the `sts` crate.
#![no_std]

extern crate alloc;

pub mod algebra;
pub mod doubling;
pub mod embedding;
pub mod error;
pub mod generators;
mod rng;
pub mod subsystems;
pub mod system;

pub use error::{Error, Result};
pub use system::{Block, LeaveGraph, PartialSts, Point};
