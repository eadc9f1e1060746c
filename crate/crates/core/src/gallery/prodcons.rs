//! Producers and consumers sharing a buffer of cells. At the lock site each
//! thread may take the global lock or the lock of the cell it works on, per
//! cell. Cell locking needs one extra atomic step to publish the cell's
//! fill flag; global locking publishes for free under the lock.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::{overlap_automaton, Instance};
use crate::game::{Checks, GameGraph};
use crate::model::build::*;
use crate::model::{AbstractionDirective, Domain, PartialProgram, VarDecl};
use crate::num::{q, Q};
use crate::perf::Scheduler;
use crate::strategy::Strategy;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Params {
    pub producers: usize,
    pub consumers: usize,
    pub cells: usize,
    pub lock_cost: Q,
    pub copy_cost: Q,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            producers: 1,
            consumers: 1,
            cells: 2,
            lock_cost: q(1),
            copy_cost: q(100),
        }
    }
}

/// The strategy locking globally (`fine == false`) or per cell everywhere.
pub fn granularity(g: &GameGraph, program: &PartialProgram, fine: bool) -> Strategy {
    let mut s = vec![0; g.observations.len()];
    for o in g.choice_order() {
        let info = &g.observations[o as usize];
        let thread = &program.threads[info.thread];
        let takes_global = |tr: &usize| {
            thread.transitions[*tr]
                .op
                .assigns
                .iter()
                .any(|a| a.target == "g")
        };
        let pick = info
            .actions
            .iter()
            .position(|a| a.transitions.iter().all(|tr| takes_global(tr) != fine));
        s[o as usize] = pick.expect("pure granularity action") as u32;
    }
    s
}

pub fn producer_consumer(p: &Params) -> Instance {
    assert!(p.producers + p.consumers >= 1 && p.cells >= 1);
    let n = p.cells as i64;
    let mut globals = vec![VarDecl::new("g", Domain::BOOL, 0)];
    for k in 0..p.cells {
        globals.push(VarDecl::new(format!("c{k}"), Domain::BOOL, 0));
        globals.push(VarDecl::new(format!("full{k}"), Domain::BOOL, 0));
        globals.push(VarDecl::new(format!("d{k}"), Domain::BOOL, 0));
    }
    let mut threads = Vec::new();
    let mut copies = Vec::new();
    let roles = (0..p.producers)
        .map(|i| (true, i))
        .chain((0..p.consumers).map(|i| (false, i)));
    for (producer, idx) in roles {
        let name = if producer {
            format!("P{idx}")
        } else {
            format!("C{idx}")
        };
        let mine = if producer { "pd" } else { "cd" };
        let copy = format!("m_{name}");
        let mut t = ThreadBuilder::new(name, &globals);
        t.local("i", 0, n - 1, 0)
            .local("fine", 0, 1, 0)
            .local(mine, 0, 1, 0)
            .lock("g");
        for k in 0..p.cells {
            t.lock(&format!("c{k}"));
        }
        let want = if producer { 0 } else { 1 };
        t.loc("acq");
        for k in 0..p.cells {
            let ready = |lock: &str| {
                all([
                    is("i", k as i64),
                    is(lock, 0),
                    is(&format!("full{k}"), want),
                ])
            };
            t.trans(
                "acq",
                "copy",
                ready("g"),
                assign([("g", cst(1)), ("fine", cst(0))]),
                Some("l"),
            );
            let cell = format!("c{k}");
            t.trans(
                "acq",
                "copy",
                ready(&cell),
                assign([(cell.clone(), cst(1)), ("fine".into(), cst(1))]),
                Some("l"),
            );
        }
        for k in 0..p.cells {
            let here = is("i", k as i64);
            let op = if producer {
                assign([
                    (format!("d{k}"), var("pd")),
                    ("pd".into(), sub(cst(1), var("pd"))),
                ])
            } else {
                assign([("cd".to_string(), var(&format!("d{k}")))])
            };
            t.trans("copy", "publish", here.clone(), op, Some(&copy));
            let flag = assign([(format!("full{k}"), cst(1 - want))]);
            t.trans(
                "publish",
                "release",
                all([here.clone(), is("fine", 0)]),
                flag.clone(),
                None,
            );
            t.trans(
                "publish",
                "release",
                all([here.clone(), is("fine", 1)]),
                flag,
                Some("l"),
            );
            let next = ("i".to_string(), cst((k as i64 + 1) % n));
            t.trans(
                "release",
                "acq",
                all([here.clone(), is("fine", 0)]),
                assign([("g".to_string(), cst(0)), next.clone()]),
                Some("l"),
            );
            t.trans(
                "release",
                "acq",
                all([here, is("fine", 1)]),
                assign([(format!("c{k}"), cst(0)), next]),
                Some("l"),
            );
        }
        threads.push(t.build());
        copies.push(copy);
    }
    let mut program = PartialProgram::new(threads);
    let mut data: Vec<String> = (0..p.cells).map(|k| format!("d{k}")).collect();
    data.push("pd".into());
    data.push("cd".into());
    program.abstractions.push(AbstractionDirective::Data(data));
    let n_threads = p.producers + p.consumers;
    let perf = overlap_automaton(&copies, p.copy_cost.clone(), &[("l", p.lock_cost.clone())]);
    Instance {
        name: format!("prodcons-{}-{}-{}", p.producers, p.consumers, p.cells),
        program,
        scheduler: Scheduler::uniform(n_threads),
        perf,
        checks: Checks::ALL,
    }
}
