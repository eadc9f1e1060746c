use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::model::build::*;
use crate::model::{Domain, Guard, Operation, PartialProgram, VarDecl};
use crate::num::{q, ratio, ExtValue};
use crate::perf::{PerformanceAutomaton, Scheduler};
use crate::solve::solve_value;

fn value(g: &GameGraph, strategy: &[u32]) -> ExtValue {
    solve_value(&fix_strategy(g, strategy).mdp)
}

fn zeros(g: &GameGraph) -> Vec<u32> {
    vec![0; g.observations.len()]
}

fn one_step(cost: i64) -> (PartialProgram, Scheduler, PerformanceAutomaton) {
    let mut t = ThreadBuilder::new("T", &[]);
    t.trans("a", "b", Guard::True, Operation::default(), Some("w"));
    let p = PartialProgram::new(vec![t.build()]);
    (
        p,
        Scheduler::uniform(1),
        PerformanceAutomaton::single_state(&[("w", q(cost))]),
    )
}

#[test]
fn single_transition_game_has_two_states() {
    let (p, s, w) = one_step(4);
    let g = build_game(&p, &s, &w, &BuildOptions::default()).unwrap();
    assert_eq!(g.len(), 2);
    assert!(matches!(g.nodes[0], GameNode::Env(_)));
    match &g.nodes[1] {
        GameNode::Thread(t) => assert_eq!(
            t.moves,
            vec![Some(Move {
                target: 0,
                weight: q(4)
            })]
        ),
        other => panic!("expected a resolver state, got {other:?}"),
    }
    // Run edges: schedule (0), step (4), then back to the start.
    assert_eq!(value(&g, &zeros(&g)), ExtValue::Finite(q(2)));
}

#[test]
fn redirect_keeps_finite_run_average() {
    // Straight line of three costed steps: 3, 0, 6 with zero-cost scheduling edges.
    let mut t = ThreadBuilder::new("T", &[]);
    t.trans("a", "b", Guard::True, Operation::default(), Some("x"));
    t.trans("b", "c", Guard::True, Operation::default(), None);
    t.trans("c", "d", Guard::True, Operation::default(), Some("y"));
    let p = PartialProgram::new(vec![t.build()]);
    let w = PerformanceAutomaton::single_state(&[("x", q(3)), ("y", q(6))]);
    let g = build_game(&p, &Scheduler::uniform(1), &w, &BuildOptions::default()).unwrap();
    assert_eq!(value(&g, &zeros(&g)), ExtValue::Finite(ratio(9, 6)));
}

fn counter_threads() -> PartialProgram {
    let globals = [VarDecl::new("x", Domain::new(0, 3), 0)];
    let mut a = ThreadBuilder::new("A", &globals);
    a.trans(
        "s",
        "s",
        lt(var("x"), cst(3)),
        assign([("x", add(var("x"), cst(1)))]),
        Some("inc"),
    );
    a.trans("s", "s", is("x", 3), assign([("x", cst(0))]), None);
    let mut b = ThreadBuilder::new("B", &globals);
    b.trans("s", "t", Guard::True, Operation::default(), None);
    b.trans("t", "s", Guard::True, Operation::default(), None);
    PartialProgram::new(vec![a.build(), b.build()])
}

#[test]
fn choice_free_program_has_single_actions() {
    let p = counter_threads();
    let w = PerformanceAutomaton::single_state(&[("inc", q(1))]);
    let g = build_game(&p, &Scheduler::uniform(2), &w, &BuildOptions::default()).unwrap();
    for node in &g.nodes {
        if let GameNode::Thread(t) = node {
            assert_eq!(t.moves.len(), 1);
        }
    }
    assert!(g.choice_order().is_empty());
    let fixed = fix_strategy(&g, &zeros(&g));
    assert!(fixed.mdp.is_markov_chain());
    assert_eq!(fixed.mdp.validate(), Ok(()));
}

fn racy(write_b: Guard) -> PartialProgram {
    let globals = [VarDecl::new("g", Domain::new(0, 1), 0)];
    let mut a = ThreadBuilder::new("A", &globals);
    a.trans(
        "s",
        "s",
        Guard::True,
        assign([("g", add(var("g"), cst(0)))]),
        None,
    );
    let mut b = ThreadBuilder::new("B", &globals);
    b.trans("s", "s", write_b, assign([("g", cst(1))]), None);
    PartialProgram::new(vec![a.build(), b.build()])
}

#[test]
fn unsynchronized_writes_race() {
    let p = racy(Guard::True);
    let g = build_game(
        &p,
        &Scheduler::uniform(2),
        &PerformanceAutomaton::trivial(),
        &BuildOptions::default(),
    )
    .unwrap();
    assert_eq!(value(&g, &zeros(&g)), ExtValue::Finite(q(0)));
    let checked = label_safety(
        g,
        Checks {
            race: true,
            deadlock: false,
        },
    );
    assert_eq!(value(&checked, &zeros(&checked)), ExtValue::Infinite);
}

#[test]
fn concurrent_reads_do_not_race() {
    let globals = [
        VarDecl::new("g", Domain::new(0, 1), 0),
        VarDecl::new("h", Domain::new(0, 1), 0),
    ];
    let mut a = ThreadBuilder::new("A", &globals);
    a.trans("s", "s", is("g", 0), Operation::default(), None);
    let mut b = ThreadBuilder::new("B", &globals);
    b.trans("s", "s", Guard::True, assign([("h", var("g"))]), None);
    let p = PartialProgram::new(vec![a.build(), b.build()]);
    let g = build_game(
        &p,
        &Scheduler::uniform(2),
        &PerformanceAutomaton::trivial(),
        &BuildOptions::default(),
    )
    .unwrap();
    let checked = label_safety(g, Checks::ALL);
    assert_eq!(value(&checked, &zeros(&checked)), ExtValue::Finite(q(0)));
}

fn ab_ba() -> PartialProgram {
    let globals = [
        VarDecl::new("a", Domain::BOOL, 0),
        VarDecl::new("b", Domain::BOOL, 0),
    ];
    let thread = |name: &str, first: &'static str, second: &'static str| {
        let mut t = ThreadBuilder::new(name, &globals);
        t.lock("a").lock("b");
        t.trans(
            "l0",
            "l1",
            is(first, 0),
            assign([(first, cst(1))]),
            Some("l"),
        );
        t.trans(
            "l1",
            "l2",
            is(second, 0),
            assign([(second, cst(1))]),
            Some("l"),
        );
        t.trans(
            "l2",
            "l3",
            Guard::True,
            assign([(second, cst(0))]),
            Some("l"),
        );
        t.trans(
            "l3",
            "l4",
            Guard::True,
            assign([(first, cst(0))]),
            Some("l"),
        );
        t.build()
    };
    PartialProgram::new(vec![thread("T1", "a", "b"), thread("T2", "b", "a")])
}

/// Independent interleaving search over (pc1, pc2, a, b) for a state where
/// some thread is unfinished and none can move.
fn ab_ba_deadlock_reachable() -> bool {
    // Per pc: (lock index tested == 0 and set to 1) or (lock released).
    let step = |pc: usize, locks: [u8; 2], order: [usize; 2]| -> Option<(usize, [u8; 2])> {
        let mut l = locks;
        match pc {
            0 | 1 => {
                let k = order[pc];
                if l[k] == 0 {
                    l[k] = 1;
                    Some((pc + 1, l))
                } else {
                    None
                }
            }
            2 => {
                l[order[1]] = 0;
                Some((3, l))
            }
            3 => {
                l[order[0]] = 0;
                Some((4, l))
            }
            _ => None,
        }
    };
    let orders = [[0usize, 1], [1, 0]];
    let mut seen = alloc::collections::BTreeSet::new();
    let mut stack = vec![([0usize, 0usize], [0u8, 0u8])];
    while let Some((pcs, locks)) = stack.pop() {
        if !seen.insert((pcs, locks)) {
            continue;
        }
        let mut moved = false;
        for t in 0..2 {
            if let Some((pc, l)) = step(pcs[t], locks, orders[t]) {
                moved = true;
                let mut next = pcs;
                next[t] = pc;
                if next == [4, 4] {
                    continue;
                }
                stack.push((next, l));
            }
        }
        if !moved && pcs != [4, 4] {
            return true;
        }
    }
    false
}

#[test]
fn ab_ba_deadlocks() {
    assert!(ab_ba_deadlock_reachable());
    let p = ab_ba();
    let w = PerformanceAutomaton::single_state(&[("l", q(1))]);
    let g = build_game(&p, &Scheduler::uniform(2), &w, &BuildOptions::default()).unwrap();
    let unchecked = value(&g, &zeros(&g));
    assert!(unchecked.is_finite());
    let checked = label_safety(
        g,
        Checks {
            race: false,
            deadlock: true,
        },
    );
    assert_eq!(value(&checked, &zeros(&checked)), ExtValue::Infinite);
}

#[test]
fn waits_for_recorded_for_held_lock() {
    let p = ab_ba();
    let g = build_game(
        &p,
        &Scheduler::nondeterministic(2),
        &PerformanceAutomaton::single_state(&[("l", q(1))]),
        &BuildOptions::default(),
    )
    .unwrap();
    let found = g.nodes.iter().any(|n| match n {
        GameNode::Env(EnvNode {
            choice: EnvChoice::Schedule { slots, .. },
            ..
        }) => slots
            .iter()
            .all(|s| s.views.first().is_some_and(|v| v.waits_for.is_some())),
        _ => false,
    });
    assert!(found);
}

#[test]
fn inputs_become_environment_actions() {
    let globals = [VarDecl::new("x", Domain::new(0, 2), 0)];
    let mut t = ThreadBuilder::new("T", &globals);
    t.input("i", 0, 2);
    t.trans("s", "s", Guard::True, assign([("x", var("i"))]), Some("c"));
    let p = PartialProgram::new(vec![t.build()]);
    let w = PerformanceAutomaton::single_state(&[("c", q(1))]);
    let g = build_game(&p, &Scheduler::uniform(1), &w, &BuildOptions::default()).unwrap();
    let fixed = fix_strategy(&g, &zeros(&g));
    assert!(!fixed.mdp.is_markov_chain());
    assert_eq!(fixed.mdp.validate(), Ok(()));
    assert_eq!(solve_value(&fixed.mdp), ExtValue::Finite(ratio(1, 2)));
}

#[test]
fn state_cap_enforced() {
    let p = counter_threads();
    let w = PerformanceAutomaton::single_state(&[("inc", q(1))]);
    let opts = BuildOptions {
        state_cap: 3,
        ..BuildOptions::default()
    };
    assert_eq!(
        build_game(&p, &Scheduler::uniform(2), &w, &opts).unwrap_err(),
        GameError::StateCap(3)
    );
}

#[test]
fn unknown_symbol_rejected() {
    let (p, s, _) = one_step(1);
    let err = build_game(
        &p,
        &s,
        &PerformanceAutomaton::trivial(),
        &BuildOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, GameError::UnknownSymbol { .. }));
}

#[test]
fn context_switch_charged_between_threads() {
    let mut a = ThreadBuilder::new("A", &[]);
    a.trans("s", "s", Guard::True, Operation::default(), None);
    let mut b = ThreadBuilder::new("B", &[]);
    b.trans("s", "s", Guard::True, Operation::default(), None);
    let p = PartialProgram::new(vec![a.build(), b.build()]);
    let w = PerformanceAutomaton::single_state(&[("cs", q(4))]);
    let g = build_game(&p, &Scheduler::uniform(2), &w, &BuildOptions::default()).unwrap();
    // Long run: a switch happens with probability 1/2 per step, each step is
    // two edges, so the average is 4 * 1/2 / 2.
    assert_eq!(value(&g, &zeros(&g)), ExtValue::Finite(q(1)));
    let nd = build_game(
        &p,
        &Scheduler::nondeterministic(2),
        &w,
        &BuildOptions::default(),
    )
    .unwrap();
    assert_eq!(value(&nd, &zeros(&nd)), ExtValue::Finite(q(2)));
}

#[test]
fn dot_mentions_every_state() {
    let (p, s, w) = one_step(1);
    let g = build_game(&p, &s, &w, &BuildOptions::default()).unwrap();
    let dot = g.to_dot();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("s0") && dot.contains("s1"));
}
