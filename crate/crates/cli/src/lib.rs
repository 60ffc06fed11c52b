//! Experiment harness: instance sources, protocol and mechanism batteries, sweeps and
//! batch verifiers, plus the argument parser of the `simulbid` binary.

pub mod battery;
pub mod cli;
pub mod error;
pub mod source;
pub mod verify;

pub use error::{HarnessError, Result};
