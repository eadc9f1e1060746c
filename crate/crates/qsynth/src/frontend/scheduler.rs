//! Schedulers.
//!
//! ```text
//! uniform;            // one memory state, equal weights
//! nondet;             // one memory state, any active thread
//!
//! memory s0, s1;      // or an explicit finite-memory scheduler
//! state s0 { pick A : 1/3; pick B : 2/3; }
//! state s1 { pick A : 1/2; pick B : 1/2; }
//! next(s0, A) = s1;
//! ```
//!
//! Weights are exact and must sum to exactly 1. Memory updates that are
//! not given keep the current memory state.

use std::fmt::Write as _;

use qsynth_core::perf::{Policy, Scheduler};
use qsynth_core::Q;

use super::automaton::rational;
use super::lexer::Cursor;
use super::{FrontendError, SyntaxError};

pub fn parse_scheduler(src: &str, threads: &[String]) -> Result<Scheduler, FrontendError> {
    let mut c = Cursor::new(src)?;
    let n = threads.len();
    if c.accept_kw("uniform") {
        c.expect_sym(";")?;
        expect_end(&c)?;
        return Ok(Scheduler::uniform(n));
    }
    if c.accept_kw("nondet") {
        c.expect_sym(";")?;
        expect_end(&c)?;
        return Ok(Scheduler::nondeterministic(n));
    }
    c.expect_kw("memory")?;
    let memory = c.names(";")?;
    c.expect_sym(";")?;
    if memory.is_empty() {
        return Err(c.error("no memory states").into());
    }
    let thread_index = |c: &Cursor, name: &str| {
        threads
            .iter()
            .position(|t| t == name)
            .ok_or_else(|| c.error(format!("unknown thread `{name}`")))
    };
    let memory_index = |c: &Cursor, name: &str| {
        memory
            .iter()
            .position(|m| m == name)
            .ok_or_else(|| c.error(format!("unknown memory state `{name}`")))
    };
    let mut policies: Vec<Option<Policy>> = vec![None; memory.len()];
    let mut next: Vec<Vec<usize>> = (0..memory.len()).map(|m| vec![m; n]).collect();
    while !c.at_eof() {
        if c.accept_kw("state") {
            let name = c.ident()?;
            let m = memory_index(&c, &name)?;
            if policies[m].is_some() {
                return Err(c
                    .error(format!("policy for `{}` given twice", memory[m]))
                    .into());
            }
            c.expect_sym("{")?;
            if c.accept_kw("nondet") {
                c.expect_sym(";")?;
                c.expect_sym("}")?;
                policies[m] = Some(Policy::Nondet);
                continue;
            }
            let mut weights: Vec<Option<Q>> = vec![None; n];
            while !c.accept_sym("}") {
                c.expect_kw("pick")?;
                let name = c.ident()?;
                let t = thread_index(&c, &name)?;
                c.expect_sym(":")?;
                let w = c.rational()?;
                c.expect_sym(";")?;
                if weights[t].replace(w).is_some() {
                    return Err(c
                        .error(format!("thread `{}` picked twice", threads[t]))
                        .into());
                }
            }
            let zero = Q::from_integer(0.into());
            policies[m] = Some(Policy::Weights(
                weights
                    .into_iter()
                    .map(|w| w.unwrap_or_else(|| zero.clone()))
                    .collect(),
            ));
        } else if c.accept_kw("next") {
            c.expect_sym("(")?;
            let name = c.ident()?;
            let m = memory_index(&c, &name)?;
            c.expect_sym(",")?;
            let name = c.ident()?;
            let t = thread_index(&c, &name)?;
            c.expect_sym(")")?;
            c.expect_sym("=")?;
            let name = c.ident()?;
            let to = memory_index(&c, &name)?;
            c.expect_sym(";")?;
            next[m][t] = to;
        } else {
            return Err(c
                .error(format!("expected `state` or `next`, found {}", c.peek()))
                .into());
        }
    }
    let policies = policies
        .into_iter()
        .enumerate()
        .map(|(m, p)| {
            p.ok_or_else(|| {
                SyntaxError::new(1, 1, format!("memory state `{}` has no policy", memory[m]))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Scheduler::new(memory, 0, policies, next, n)?)
}

fn expect_end(c: &Cursor) -> Result<(), SyntaxError> {
    if c.at_eof() {
        Ok(())
    } else {
        Err(c.error(format!("unexpected {} after the scheduler", c.peek())))
    }
}

/// Prints a scheduler in the explicit `memory`/`state`/`next` form.
pub fn emit_scheduler(s: &Scheduler, threads: &[String]) -> String {
    let mut out = String::new();
    let memory = s.memory();
    // Memory state 0 of the parsed form is the initial one.
    let mut order = vec![s.initial()];
    order.extend((0..memory.len()).filter(|&m| m != s.initial()));
    let names: Vec<&str> = order.iter().map(|&m| memory[m].as_str()).collect();
    let _ = writeln!(out, "memory {};", names.join(", "));
    for &m in &order {
        match s.policy(m) {
            Policy::Nondet => {
                let _ = writeln!(out, "state {} {{ nondet; }}", memory[m]);
            }
            Policy::Weights(w) => {
                let _ = write!(out, "state {} {{", memory[m]);
                for (t, p) in w.iter().enumerate() {
                    let _ = write!(out, " pick {} : {};", threads[t], rational(p));
                }
                out.push_str(" }\n");
            }
        }
    }
    for &m in &order {
        for (t, name) in threads.iter().enumerate() {
            let to = s.next(m, t);
            if to != m {
                let _ = writeln!(out, "next({}, {name}) = {};", memory[m], memory[to]);
            }
        }
    }
    out
}
