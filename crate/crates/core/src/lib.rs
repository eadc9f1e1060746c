//! Quantitative synthesis for finite-state concurrent partial programs.
//!
//! A partial program leaves some control locations nondeterministic. This
//! crate composes it with a scheduler and a weighted performance automaton
//! into an imperfect-information game, enumerates memoryless resolutions of
//! the nondeterminism with sound pruning, and evaluates every surviving
//! resolution exactly (rational arithmetic) under a limit-average objective
//! with safety (race freedom, deadlock freedom).
//!
//! The crate is `no_std` and only needs `alloc`. Parsing, file formats,
//! parallel evaluation and the command line live in the `qsynth` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod abstraction;
pub mod gallery;
pub mod game;
pub mod model;
pub mod num;
pub mod perf;
pub mod solve;
pub mod strategy;
pub mod synthesis;

pub use num::{ExtValue, Q};
