//! Text formats for partial programs, performance automata and schedulers.

mod automaton;
mod lexer;
mod program;
mod scheduler;

use std::fmt;
use std::path::{Path, PathBuf};

use qsynth_core::game::GameGraph;
use qsynth_core::model::{Diagnostic, PartialProgram};
use qsynth_core::perf::{PerfError, SchedError};
use qsynth_core::synthesis::resolved_program;
use thiserror::Error;

pub use automaton::{emit_performance_automaton, parse_performance_automaton};
pub use program::{emit_program, parse_partial_program};
pub use scheduler::{emit_scheduler, parse_scheduler};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl SyntaxError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        SyntaxError {
            line,
            col,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("invalid program: {}", join(.0))]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Perf(#[from] PerfError),
    #[error(transparent)]
    Sched(#[from] SchedError),
    #[error("strategy does not match the game: {0}")]
    StrategyMismatch(String),
}

fn join(ds: &[Diagnostic]) -> String {
    ds.iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceKind {
    Program,
    Perf,
    Sched,
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceKind::Program => "program",
            SourceKind::Perf => "performance automaton",
            SourceKind::Sched => "scheduler",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SourceFile {
    pub path: PathBuf,
    pub text: String,
    pub kind: SourceKind,
}

impl SourceFile {
    pub fn read(path: &Path, kind: SourceKind) -> std::io::Result<Self> {
        Ok(SourceFile {
            path: path.to_path_buf(),
            text: std::fs::read_to_string(path)?,
            kind,
        })
    }
}

/// Prints the program that `strategy` selects out of `p`; `g` must be the
/// game built from `p`. Re-parsing the output gives a choice-free program.
pub fn emit_resolved_program(
    p: &PartialProgram,
    g: &GameGraph,
    strategy: &[u32],
) -> Result<String, FrontendError> {
    if strategy.len() != g.observations.len() {
        return Err(FrontendError::StrategyMismatch(format!(
            "{} actions given for {} observations",
            strategy.len(),
            g.observations.len()
        )));
    }
    for (o, &a) in g.observations.iter().zip(strategy) {
        let n = o.actions.len().max(1);
        if a as usize >= n {
            return Err(FrontendError::StrategyMismatch(format!(
                "observation {} has no action {a}",
                o.name
            )));
        }
        if o.thread >= p.threads.len() || o.location >= p.threads[o.thread].locations.len() {
            return Err(FrontendError::StrategyMismatch(format!(
                "observation {} is not in the program",
                o.name
            )));
        }
    }
    Ok(emit_program(&resolved_program(p, g, strategy)))
}
