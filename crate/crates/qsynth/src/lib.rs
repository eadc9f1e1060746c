//! File formats, parallel evaluation, reports and the command line for the
//! `qsynth-core` synthesizer.

pub mod bench;
pub mod cli;
pub mod dimacs;
pub mod frontend;
pub mod parallel;
pub mod report;
