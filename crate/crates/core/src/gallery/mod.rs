//! Generators for the benchmark instances: a reduction gadget from 3-SAT
//! and four small concurrent programs with tunable cost models.
//!
//! Values are costs, so lower is better. Interleaving semantics runs one
//! thread at a time; to let concurrency pay off, the generated performance
//! automata charge nothing for a step that directly follows the same kind
//! of step by another thread (a context switch in between), standing in for
//! two cores working in parallel.

pub mod cache;
pub mod optimistic;
pub mod prodcons;
pub mod sat;
pub mod worksharing;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;

use crate::game::Checks;
use crate::model::PartialProgram;
use crate::num::Q;
use crate::perf::{PerformanceAutomaton, Scheduler, CONTEXT_SWITCH};

pub use sat::{sat_gadget, Cnf, GadgetObjective};

/// A generated partial program with its scheduler, cost model and the
/// safety checks it is meant to be synthesized under.
#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub program: PartialProgram,
    pub scheduler: Scheduler,
    pub perf: PerformanceAutomaton,
    pub checks: Checks,
}

/// Two cores: `overlapped[t]` is thread `t`'s overlappable step and costs
/// `cost`, except directly after a step of another thread's symbol, when
/// the pair counts as running in parallel and the second step is free.
/// Context switches and steps without a symbol keep the pending step; every
/// symbol in `others` is charged its cost and drops it.
pub fn overlap_automaton<S: AsRef<str>>(
    overlapped: &[S],
    cost: Q,
    others: &[(&str, Q)],
) -> PerformanceAutomaton {
    let mut names = vec!["idle".to_string()];
    names.extend(overlapped.iter().map(|s| format!("after_{}", s.as_ref())));
    let mut a = PerformanceAutomaton::new(names.clone(), 0);
    let zero = Q::from_integer(0.into());
    for (j, sym) in overlapped.iter().enumerate() {
        let sym = sym.as_ref();
        let pending = &names[j + 1];
        a.add_edge("idle", sym, pending, cost.clone())
            .expect("states exist");
        for (i, from) in names[1..].iter().enumerate() {
            if i == j {
                a.add_edge(from, sym, pending, cost.clone())
                    .expect("states exist");
            } else {
                a.add_edge(from, sym, "idle", zero.clone())
                    .expect("states exist");
            }
        }
    }
    for from in &names {
        a.add_edge(from, CONTEXT_SWITCH, from, zero.clone())
            .expect("states exist");
        for (s, c) in others {
            a.add_edge(from, s, "idle", c.clone())
                .expect("states exist");
        }
    }
    a
}

/// Every catalogued instance at its default size, for sweeping tests.
pub fn catalogue() -> vec::Vec<Instance> {
    vec![
        prodcons::producer_consumer(&prodcons::Params::default()),
        optimistic::optimistic(&optimistic::Params::default()),
        worksharing::work_sharing(&worksharing::Params::default()),
        cache::cache_example(&cache::Params::default()),
    ]
}
