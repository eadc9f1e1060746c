//! Performance automata.
//!
//! ```text
//! state q0, q1;
//! edge q0 --l/1--> q0;
//! edge q0 --cs/1/2--> q1;
//! ```
//!
//! The first declared state is initial; `bot` is the "nothing tracked"
//! symbol, which defaults to a free self-loop wherever it is missing.
//! An empty file is the one-state automaton that charges nothing.

use std::fmt::Write as _;

use num_traits::One;
use qsynth_core::perf::PerformanceAutomaton;
use qsynth_core::Q;

use super::lexer::Cursor;
use super::{FrontendError, SyntaxError};

pub fn parse_performance_automaton(src: &str) -> Result<PerformanceAutomaton, FrontendError> {
    let mut c = Cursor::new(src)?;
    let mut states: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    while !c.at_eof() {
        if c.accept_kw("state") {
            for s in c.names(";")? {
                if states.contains(&s) {
                    return Err(c.error(format!("state `{s}` declared twice")).into());
                }
                states.push(s);
            }
            c.expect_sym(";")?;
        } else if c.accept_kw("edge") {
            let at = c.here();
            let from = c.ident()?;
            c.expect_sym("--")?;
            let symbol = c.ident()?;
            c.expect_sym("/")?;
            let cost = c.rational()?;
            c.expect_sym("-->")?;
            let to = c.ident()?;
            c.expect_sym(";")?;
            edges.push((at, from, symbol, cost, to));
        } else {
            return Err(c
                .error(format!("expected `state` or `edge`, found {}", c.peek()))
                .into());
        }
    }
    if states.is_empty() {
        if let Some(((line, col), ..)) = edges.first() {
            return Err(SyntaxError::new(
                *line,
                *col,
                "edges given before any `state` declaration",
            )
            .into());
        }
        return Ok(PerformanceAutomaton::trivial());
    }
    let mut a = PerformanceAutomaton::new(states, 0);
    for (_, from, symbol, cost, to) in edges {
        a.add_edge(&from, &symbol, &to, cost)?;
    }
    a.check_total()?;
    Ok(a)
}

pub fn emit_performance_automaton(a: &PerformanceAutomaton) -> String {
    let mut out = String::new();
    let states = a.states();
    // The initial state must be declared first.
    let mut order = vec![a.initial()];
    order.extend((0..states.len()).filter(|&s| s != a.initial()));
    let names: Vec<&str> = order.iter().map(|&s| states[s].as_str()).collect();
    let _ = writeln!(out, "state {};", names.join(", "));
    for (from, sym, to, cost) in a.edges() {
        let _ = writeln!(
            out,
            "edge {} --{}/{}--> {};",
            states[from],
            a.symbols()[sym],
            rational(&cost),
            states[to]
        );
    }
    out
}

pub(crate) fn rational(v: &Q) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}
