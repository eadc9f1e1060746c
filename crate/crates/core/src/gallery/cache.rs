//! Pessimistic variant of the optimistic loop: take the lock, then do a
//! chosen number of read/work/write rounds on the shared data before
//! releasing. The cost model is a cache per memory line; a context switch
//! evicts every line and the release flushes them.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::Instance;
use crate::game::Checks;
use crate::model::build::*;
use crate::model::{AbstractionDirective, Domain, Guard, PartialProgram, VarDecl};
use crate::num::{q, Q};
use crate::perf::{PerformanceAutomaton, Scheduler, CONTEXT_SWITCH};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Params {
    pub n_min: i64,
    pub n_max: i64,
    pub lines: usize,
    pub cached_cost: Q,
    pub uncached_cost: Q,
    pub lock_cost: Q,
    pub threads: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            n_min: 1,
            n_max: 5,
            lines: 2,
            cached_cost: q(1),
            uncached_cost: q(10),
            lock_cost: q(1),
            threads: 2,
        }
    }
}

impl Params {
    pub fn fixed(&self, n: i64) -> Self {
        Params {
            n_min: n,
            n_max: n,
            ..self.clone()
        }
    }
}

/// One memory line: reads and writes cost `cached` when the line is
/// cached and `uncached` otherwise (after which it is cached); a context
/// switch or a flush leaves it uncached.
pub fn line_automaton(line: usize, cached: &Q, uncached: &Q) -> PerformanceAutomaton {
    let mut a = PerformanceAutomaton::new(["uncached", "cached"].map(String::from).to_vec(), 0);
    let zero = q(0);
    for op in ["READ", "WRITE"] {
        let sym = format!("{op}{line}");
        a.add_edge("uncached", &sym, "cached", uncached.clone())
            .expect("states exist");
        a.add_edge("cached", &sym, "cached", cached.clone())
            .expect("states exist");
    }
    for sym in [CONTEXT_SWITCH, "flush"] {
        a.add_edge("uncached", sym, "uncached", zero.clone())
            .expect("states exist");
        a.add_edge("cached", sym, "uncached", zero.clone())
            .expect("states exist");
    }
    a
}

pub fn cache_automaton(p: &Params) -> PerformanceAutomaton {
    let mut parts: Vec<PerformanceAutomaton> = (0..p.lines)
        .map(|l| line_automaton(l, &p.cached_cost, &p.uncached_cost))
        .collect();
    parts.push(PerformanceAutomaton::single_state(&[(
        "lock",
        p.lock_cost.clone(),
    )]));
    PerformanceAutomaton::product(&parts).expect("deterministic parts")
}

pub fn cache_example(p: &Params) -> Instance {
    assert!(1 <= p.n_min && p.n_min <= p.n_max && p.lines >= 1);
    let globals = [
        VarDecl::new("data", Domain::BOOL, 0),
        VarDecl::new("lock", Domain::BOOL, 0),
    ];
    let mut threads = Vec::new();
    for t in 0..p.threads {
        let mut b = ThreadBuilder::new(format!("T{t}"), &globals);
        b.local("n", 0, p.n_max, 0)
            .local("i", 0, p.n_max, 0)
            .local("tmp", 0, 1, 0)
            .lock("lock");
        for n in p.n_min..=p.n_max {
            b.trans(
                "choose",
                "acquire",
                Guard::True,
                assign([("n", cst(n)), ("i", cst(0))]),
                None,
            );
        }
        b.trans(
            "acquire",
            "loop",
            is("lock", 0),
            assign([("lock", cst(1))]),
            Some("lock"),
        );
        // A round reads every line of the shared data, then writes every line.
        let steps: Vec<String> = (0..p.lines)
            .map(|l| format!("READ{l}"))
            .chain((0..p.lines).map(|l| format!("WRITE{l}")))
            .collect();
        let last = steps.len() - 1;
        for (k, sym) in steps.iter().enumerate() {
            let from = if k == 0 {
                "loop".to_string()
            } else {
                format!("s{k}")
            };
            let to = if k == last {
                "loop".to_string()
            } else {
                format!("s{}", k + 1)
            };
            let op = if k == 0 {
                assign([("tmp", var("data"))])
            } else if k == last {
                assign([
                    ("data", sub(cst(1), var("tmp"))),
                    ("i", add(var("i"), cst(1))),
                ])
            } else {
                assign::<&str>([])
            };
            b.trans(&from, &to, lt(var("i"), var("n")), op, Some(sym));
        }
        b.trans(
            "loop",
            "release",
            ge(var("i"), var("n")),
            assign::<&str>([]),
            Some("flush"),
        );
        b.trans(
            "release",
            "choose",
            Guard::True,
            assign([("lock", cst(0))]),
            Some("lock"),
        );
        threads.push(b.build());
    }
    let mut program = PartialProgram::new(threads);
    program.abstractions.push(AbstractionDirective::Data(
        ["data", "tmp"].map(|s| s.to_string()).to_vec(),
    ));
    Instance {
        name: format!("cache-{}-{}", p.n_min, p.n_max),
        program,
        scheduler: Scheduler::uniform(p.threads),
        perf: cache_automaton(p),
        checks: Checks::ALL,
    }
}
