//! Work sharing: a main thread chooses how many of the statically present
//! workers to activate, splits the array evenly between them, paying an
//! initialization cost per activation, and waits for all of them.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{overlap_automaton, Instance};
use crate::game::Checks;
use crate::model::build::*;
use crate::model::{Domain, Guard, PartialProgram, VarDecl};
use crate::num::{q, Q};
use crate::perf::Scheduler;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Params {
    pub workers_min: usize,
    pub workers_max: usize,
    pub init_cost: Q,
    pub work_cost: Q,
    pub array_len: i64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            workers_min: 1,
            workers_max: 3,
            init_cost: q(4),
            work_cost: q(10),
            array_len: 6,
        }
    }
}

impl Params {
    pub fn fixed(&self, k: usize) -> Self {
        Params {
            workers_min: k,
            workers_max: k,
            ..self.clone()
        }
    }
}

/// Items given to worker `w` out of `len` split `k` ways.
fn share(len: i64, k: usize, w: usize) -> i64 {
    let k = k as i64;
    let w = w as i64;
    len / k + i64::from(w < len % k)
}

pub fn work_sharing(p: &Params) -> Instance {
    assert!(1 <= p.workers_min && p.workers_min <= p.workers_max && p.array_len >= 1);
    let m = p.workers_max;
    let mut globals = Vec::new();
    for w in 0..m {
        globals.push(VarDecl::new(
            format!("todo{w}"),
            Domain::new(0, p.array_len),
            0,
        ));
    }
    let mut main = ThreadBuilder::new("main", &globals);
    main.local("k", 0, m as i64, 0).local("s", 0, m as i64, 0);
    for k in p.workers_min..=m {
        main.trans(
            "choose",
            "spawn",
            Guard::True,
            assign([("k", cst(k as i64)), ("s", cst(0))]),
            None,
        );
    }
    for k in p.workers_min..=m {
        for w in 0..k {
            let g = all([is("k", k as i64), is("s", w as i64)]);
            let op = assign([
                (format!("todo{w}"), cst(share(p.array_len, k, w))),
                ("s".into(), cst(w as i64 + 1)),
            ]);
            main.trans("spawn", "spawn", g, op, Some("init"));
        }
    }
    let idle = all((0..m).map(|w| is(&format!("todo{w}"), 0)));
    main.trans(
        "spawn",
        "join",
        eq(var("s"), var("k")),
        assign::<&str>([]),
        None,
    );
    main.trans("join", "choose", idle, assign::<&str>([]), None);
    let mut threads = vec![main.build()];
    for w in 0..m {
        let mut t = ThreadBuilder::new(format!("W{w}"), &globals);
        let todo = format!("todo{w}");
        t.trans(
            "run",
            "run",
            gt(var(&todo), cst(0)),
            assign([(todo.clone(), sub(var(&todo), cst(1)))]),
            Some(&format!("w{w}")),
        );
        threads.push(t.build());
    }
    let work: Vec<String> = (0..m).map(|w| format!("w{w}")).collect();
    let perf = overlap_automaton(&work, p.work_cost.clone(), &[("init", p.init_cost.clone())]);
    Instance {
        name: format!("worksharing-{}-{}", p.workers_min, p.workers_max),
        program: PartialProgram::new(threads),
        scheduler: Scheduler::uniform(m + 1),
        perf,
        checks: Checks::ALL,
    }
}
