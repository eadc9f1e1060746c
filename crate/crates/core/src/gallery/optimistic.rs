//! Optimistic concurrency: each thread copies the shared data and its
//! version, works on the copy for a chosen number of operations, then
//! commits under the lock if the version is unchanged and retries
//! otherwise.
//!
//! Useful work costs nothing; the cost model charges the lock operations
//! and the work thrown away by a stale version (or a failed try-lock). Few
//! operations per commit pay the locking often, many operations lose more
//! work to conflicts.
//!
//! Under a time-slicing scheduler a conflict needs a preemption inside the
//! optimistic window, so conflicts grow with the window and the defaults
//! have their cheapest point strictly between the smallest and the largest
//! choice.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::Instance;
use crate::game::Checks;
use crate::model::build::*;
use crate::model::{AbstractionDirective, Domain, Guard, PartialProgram, VarDecl};
use crate::num::{q, ratio, Q};
use crate::perf::{PerformanceAutomaton, Scheduler};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Params {
    /// Smallest and largest number of operations the resolver may pick.
    pub n_min: i64,
    pub n_max: i64,
    pub work_cost: Q,
    pub lock_cost: Q,
    /// Steps taken by one operation.
    pub work_len: i64,
    /// Versions are counted modulo this.
    pub versions: i64,
    pub threads: usize,
    /// Preemption probability of a time-slicing scheduler; `None` picks a
    /// thread uniformly at every step.
    pub switch: Option<Q>,
    /// Commit with a try-lock that gives up (and throws the work away) when
    /// the lock is taken; otherwise wait for the lock.
    pub try_lock: bool,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            n_min: 1,
            n_max: 5,
            work_cost: q(20),
            lock_cost: q(1),
            work_len: 1,
            versions: 2,
            threads: 2,
            switch: Some(ratio(1, 300)),
            try_lock: false,
        }
    }
}

impl Params {
    /// The same model with the choice fixed to `n` operations.
    pub fn fixed(&self, n: i64) -> Self {
        Params {
            n_min: n,
            n_max: n,
            ..self.clone()
        }
    }
}

fn waste(n: i64) -> String {
    format!("waste{n}")
}

pub fn optimistic(p: &Params) -> Instance {
    assert!(1 <= p.n_min && p.n_min <= p.n_max && p.work_len >= 1 && p.versions >= 2);
    let globals = [
        VarDecl::new("gver", Domain::new(0, p.versions - 1), 0),
        VarDecl::new("gdata", Domain::BOOL, 0),
        VarDecl::new("lock", Domain::BOOL, 0),
    ];
    let steps = p.n_max * p.work_len;
    let mut threads = Vec::new();
    for t in 0..p.threads {
        let mut b = ThreadBuilder::new(format!("T{t}"), &globals);
        b.local("lver", 0, p.versions - 1, 0)
            .local("ldata", 0, 1, 0)
            .local("n", 0, p.n_max, 0)
            .local("i", 0, steps, 0)
            .lock("lock");
        b.trans(
            "read",
            "choose",
            Guard::True,
            assign([("lver", var("gver")), ("ldata", var("gdata"))]),
            None,
        );
        for n in p.n_min..=p.n_max {
            b.trans(
                "choose",
                "work",
                Guard::True,
                assign([("n", cst(n)), ("i", cst(0))]),
                None,
            );
        }
        let limit = mul(var("n"), cst(p.work_len));
        b.trans(
            "work",
            "work",
            lt(var("i"), limit.clone()),
            assign([("i", add(var("i"), cst(1)))]),
            None,
        );
        b.trans(
            "work",
            "try",
            ge(var("i"), limit),
            assign([("ldata", sub(cst(1), var("ldata")))]),
            None,
        );
        b.trans(
            "try",
            "check",
            is("lock", 0),
            assign([("lock", cst(1))]),
            Some("lock"),
        );
        for n in p.n_min..=p.n_max {
            let sym = waste(n);
            if p.try_lock {
                b.trans(
                    "try",
                    "read",
                    all([is("lock", 1), is("n", n)]),
                    assign::<&str>([]),
                    Some(&sym),
                );
            }
            b.trans(
                "check",
                "unlock",
                all([ne(var("gver"), var("lver")), is("n", n)]),
                assign::<&str>([]),
                Some(&sym),
            );
        }
        let bump = modulo(add(var("lver"), cst(1)), cst(p.versions));
        b.trans(
            "check",
            "unlock",
            eq(var("gver"), var("lver")),
            assign([("gdata", var("ldata")), ("gver", bump)]),
            None,
        );
        b.trans(
            "unlock",
            "read",
            Guard::True,
            assign([("lock", cst(0))]),
            Some("lock"),
        );
        threads.push(b.build());
    }
    let mut program = PartialProgram::new(threads);
    program.abstractions.push(AbstractionDirective::Data(
        ["gdata", "ldata"].map(String::from).to_vec(),
    ));
    let mut costs: Vec<(String, Q)> = alloc::vec![("lock".into(), p.lock_cost.clone())];
    for n in p.n_min..=p.n_max {
        costs.push((waste(n), &p.work_cost * q(n * p.work_len)));
    }
    let refs: Vec<(&str, Q)> = costs.iter().map(|(s, c)| (s.as_str(), c.clone())).collect();
    Instance {
        name: format!("optimistic-{}-{}", p.n_min, p.n_max),
        program,
        scheduler: match &p.switch {
            Some(s) => {
                Scheduler::time_slice(p.threads, s.clone()).expect("switch probability in (0, 1)")
            }
            None => Scheduler::uniform(p.threads),
        },
        perf: PerformanceAutomaton::single_state(&refs),
        // The unlocked snapshot read races with commits by design.
        checks: Checks {
            race: false,
            deadlock: true,
        },
    }
}
