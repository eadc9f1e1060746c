use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::model::build::*;
use crate::model::{Domain, Guard, Operation, VarDecl};
use crate::num::{q, ratio};
use crate::strategy::complete_tree;

fn costs() -> PerformanceAutomaton {
    PerformanceAutomaton::single_state(&[("cheap", q(1)), ("dear", q(5))])
}

/// One thread choosing between a cheap and an expensive way back.
fn fork() -> PartialProgram {
    let mut t = ThreadBuilder::new("T", &[]);
    t.trans("a", "a", Guard::True, Operation::default(), Some("dear"));
    t.trans("a", "a", Guard::True, Operation::default(), Some("cheap"));
    PartialProgram::new(vec![t.build()])
}

fn racy(both_write: bool) -> PartialProgram {
    let globals = [VarDecl::new("x", Domain::new(0, 1), 0)];
    let mut a = ThreadBuilder::new("A", &globals);
    a.trans(
        "s",
        "s",
        Guard::True,
        assign([("x", cst(1))]),
        Some("cheap"),
    );
    let mut b = ThreadBuilder::new("B", &globals);
    if both_write {
        b.trans(
            "s",
            "s",
            Guard::True,
            assign([("x", cst(0))]),
            Some("cheap"),
        );
    } else {
        b.trans("s", "s", Guard::True, Operation::default(), Some("cheap"));
    }
    PartialProgram::new(vec![a.build(), b.build()])
}

#[test]
fn loop_value_and_race() {
    let sched = Scheduler::uniform(2);
    let opts = Options::default();
    assert_eq!(
        value_of_program(&racy(false), &sched, &costs(), &opts).unwrap(),
        ExtValue::Finite(ratio(1, 2))
    );
    assert_eq!(
        value_of_program(&racy(true), &sched, &costs(), &opts).unwrap(),
        ExtValue::Infinite
    );
    let off = Options {
        checks: Checks::NONE,
        ..opts
    };
    assert!(value_of_program(&racy(true), &sched, &costs(), &off)
        .unwrap()
        .is_finite());
}

#[test]
fn value_of_program_rejects_choices() {
    let err = value_of_program(
        &fork(),
        &Scheduler::uniform(1),
        &costs(),
        &Options::default(),
    )
    .unwrap_err();
    assert!(matches!(err, SynthError::NotChoiceFree(_)));
}

#[test]
fn resolve_picks_cheap_branch() {
    let sched = Scheduler::uniform(1);
    let out = resolve(&fork(), &sched, &costs(), &Options::default()).unwrap();
    let Outcome::Optimal {
        value,
        program,
        report,
        ..
    } = out
    else {
        panic!("expected a program")
    };
    assert_eq!(value, ExtValue::Finite(ratio(1, 2)));
    assert_eq!(report.candidates.len(), 2);
    let program = program.unwrap();
    assert!(program.is_choice_free());
    assert_eq!(program.threads[0].transitions.len(), 1);
    assert_eq!(
        value_of_program(&program, &sched, &costs(), &Options::default()).unwrap(),
        value
    );
    let bound = ratio(1, 2);
    assert!(decide(&fork(), &sched, &costs(), &Options::default(), &bound).unwrap());
    assert!(!decide(&fork(), &sched, &costs(), &Options::default(), &ratio(1, 3)).unwrap());
}

#[test]
fn ties_go_to_smallest_strategy() {
    let mut t = ThreadBuilder::new("T", &[]);
    t.trans("a", "a", Guard::True, Operation::default(), Some("cheap"));
    t.trans("a", "a", Guard::True, Operation::default(), Some("cheap"));
    let p = PartialProgram::new(vec![t.build()]);
    let out = resolve(&p, &Scheduler::uniform(1), &costs(), &Options::default()).unwrap();
    let Outcome::Optimal { strategy, .. } = out else {
        panic!()
    };
    assert!(strategy.iter().all(|&a| a == 0));
}

#[test]
fn no_safe_program_when_every_choice_races() {
    let globals = [VarDecl::new("x", Domain::new(0, 1), 0)];
    let mut a = ThreadBuilder::new("A", &globals);
    a.trans(
        "s",
        "s",
        Guard::True,
        assign([("x", cst(1))]),
        Some("cheap"),
    );
    a.trans("s", "s", Guard::True, assign([("x", cst(0))]), Some("dear"));
    let p = PartialProgram::new(vec![a.build(), racy(true).threads[1].clone()]);
    let sched = Scheduler::uniform(2);
    let out = resolve(&p, &sched, &costs(), &Options::default()).unwrap();
    assert!(matches!(out, Outcome::NoSafeProgram { .. }));
    assert!(!decide(&p, &sched, &costs(), &Options::default(), &q(1000)).unwrap());
}

/// Two threads sharing a counter under a lock, each with a choice of
/// whether to take the lock; unlocked increments race.
fn lock_choice() -> PartialProgram {
    let globals = [
        VarDecl::new("c", Domain::new(0, 1), 0),
        VarDecl::new("g", Domain::BOOL, 0),
    ];
    let mut threads = Vec::new();
    for name in ["P", "Q"] {
        let mut t = ThreadBuilder::new(name, &globals);
        t.lock("g");
        t.trans(
            "s",
            "crit",
            is("g", 0),
            assign([("g", cst(1))]),
            Some("dear"),
        );
        t.trans("s", "fast", Guard::True, Operation::default(), None);
        t.trans(
            "crit",
            "rel",
            Guard::True,
            assign([("c", sub(cst(1), var("c")))]),
            Some("cheap"),
        );
        t.trans("rel", "s", Guard::True, assign([("g", cst(0))]), None);
        t.trans(
            "fast",
            "s",
            Guard::True,
            assign([("c", sub(cst(1), var("c")))]),
            Some("cheap"),
        );
        threads.push(t.build());
    }
    PartialProgram::new(threads)
}

#[test]
fn resolve_matches_exhaustive_oracle_and_pruning() {
    let p = lock_choice();
    let sched = Scheduler::uniform(2);
    let perf = costs();
    let opts = Options::default();
    let game = label_safety(
        build_game(&p, &sched, &perf, &opts.build_options()).unwrap(),
        opts.checks,
    );
    let tree = complete_tree(&game);
    // Oracle: value of every emitted program, minimized.
    let mut best = ExtValue::Infinite;
    let mut leaves = vec![tree.root()];
    let mut all = Vec::new();
    while let Some(n) = leaves.pop() {
        if tree.is_leaf(&n) {
            all.push(tree.complete(&n));
        } else {
            leaves.extend(tree.children(&n));
        }
    }
    assert_eq!(all.len() as u128, tree.leaf_count());
    for s in &all {
        let prog = resolved_program(&p, &game, s);
        assert!(prog.is_choice_free());
        best = best.min(value_of_program(&prog, &sched, &perf, &opts).unwrap());
    }
    let pruned = resolve(&p, &sched, &perf, &opts).unwrap();
    let full = resolve(
        &p,
        &sched,
        &perf,
        &Options {
            prune: false,
            ..opts
        },
    )
    .unwrap();
    assert_eq!(pruned.value(), best);
    assert!(best.is_finite());
    match (&pruned, &full) {
        (Outcome::Optimal { strategy: a, .. }, Outcome::Optimal { strategy: b, .. }) => {
            assert_eq!(a, b)
        }
        _ => panic!("both runs should find a program"),
    }
    assert!(pruned.report().candidates.len() <= full.report().candidates.len());
    let minimized = resolve(
        &p,
        &sched,
        &perf,
        &Options {
            minimize: true,
            ..opts
        },
    )
    .unwrap();
    assert_eq!(minimized.value(), best);
}
