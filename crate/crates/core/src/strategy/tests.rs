use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::game::{build_game, label_safety, BuildOptions, Checks};
use crate::model::build::*;
use crate::model::{guards_overlap, Domain, Guard, Operation, PartialProgram, VarDecl};
use crate::num::q;
use crate::perf::{PerformanceAutomaton, Scheduler};

fn branching(guards: Vec<Guard>) -> crate::model::Thread {
    let globals = [VarDecl::new("x", Domain::new(0, 2), 0)];
    let mut t = ThreadBuilder::new("T", &globals);
    for (i, g) in guards.into_iter().enumerate() {
        let to = alloc::format!("b{i}");
        t.trans("s", &to, g, Operation::default(), None);
        t.trans(&to, "s", Guard::True, Operation::default(), None);
    }
    t.build()
}

/// Maximal guard-disjoint subsets by sweeping every subset.
fn maximal_subsets_oracle(t: &crate::model::Thread, q: usize) -> Vec<Vec<usize>> {
    let out = t.outgoing(q);
    let n = out.len();
    let ok = |mask: u32| {
        (0..n).all(|i| {
            (i + 1..n).all(|j| {
                mask & (1 << i) == 0
                    || mask & (1 << j) == 0
                    || !guards_overlap(
                        t,
                        &t.transitions[out[i]].guard,
                        &t.transitions[out[j]].guard,
                    )
            })
        })
    };
    let mut res = Vec::new();
    for mask in 1u32..(1 << n) {
        if ok(mask) && (0..n).all(|k| mask & (1 << k) != 0 || !ok(mask | (1 << k))) {
            res.push(
                (0..n)
                    .filter(|&k| mask & (1 << k) != 0)
                    .map(|k| out[k])
                    .collect(),
            );
        }
    }
    res.sort();
    res
}

#[test]
fn disjoint_guards_form_one_action() {
    let t = branching(vec![is("x", 0), is("x", 1)]);
    assert_eq!(enumerate_actions(&t, 0, false), vec![vec![0, 2]]);
}

#[test]
fn overlapping_guards_give_singletons() {
    let t = branching(vec![Guard::True, Guard::True]);
    assert_eq!(enumerate_actions(&t, 0, false), vec![vec![0], vec![2]]);
}

#[test]
fn mixed_guards_match_subset_oracle() {
    let t = branching(vec![Guard::True, is("x", 0), is("x", 1)]);
    let got = enumerate_actions(&t, 0, false);
    assert_eq!(got, vec![vec![0], vec![2, 4]]);
    assert_eq!(got, maximal_subsets_oracle(&t, 0));
    let all = enumerate_actions(&t, 0, true);
    assert_eq!(all, vec![vec![0], vec![2], vec![2, 4], vec![4]]);
}

#[test]
fn random_guard_sets_match_oracle() {
    let pool = [
        Guard::True,
        is("x", 0),
        is("x", 1),
        is("x", 2),
        lt(var("x"), cst(2)),
        gt(var("x"), cst(0)),
    ];
    for mask in 1u32..(1 << pool.len()) {
        let guards: Vec<Guard> = (0..pool.len())
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| pool[i].clone())
            .collect();
        let t = branching(guards);
        assert_eq!(
            enumerate_actions(&t, 0, false),
            maximal_subsets_oracle(&t, 0)
        );
    }
}

/// Two threads, each choosing between two overlapping branches; choosing
/// branch 1 in thread A writes a global that thread B writes too.
fn two_choices(unsafe_branch: bool) -> PartialProgram {
    let globals = [VarDecl::new("g", Domain::BOOL, 0)];
    let mut a = ThreadBuilder::new("A", &globals);
    a.trans("s", "p", Guard::True, Operation::default(), Some("c"));
    let write = if unsafe_branch {
        assign([("g", cst(1))])
    } else {
        Operation::default()
    };
    a.trans("s", "r", Guard::True, write, None);
    a.trans("p", "s", Guard::True, Operation::default(), None);
    a.trans("r", "s", Guard::True, Operation::default(), None);
    let mut b = ThreadBuilder::new("B", &globals);
    b.trans("s", "p", Guard::True, Operation::default(), Some("c"));
    b.trans("s", "r", Guard::True, assign([("g", cst(0))]), None);
    b.trans("p", "s", Guard::True, Operation::default(), None);
    b.trans("r", "s", Guard::True, Operation::default(), None);
    PartialProgram::new(vec![a.build(), b.build()])
}

fn game(p: &PartialProgram, checks: Checks) -> crate::game::GameGraph {
    let w = PerformanceAutomaton::single_state(&[("c", q(1))]);
    label_safety(
        build_game(p, &Scheduler::uniform(2), &w, &BuildOptions::default()).unwrap(),
        checks,
    )
}

#[test]
fn tree_leaves_are_product_of_action_counts() {
    let g = game(&two_choices(true), Checks::NONE);
    let tree = complete_tree(&g);
    assert_eq!(tree.order().len(), 2);
    assert_eq!(tree.leaf_count(), 4);
    let root = tree.root();
    let kids = tree.children(&root);
    assert_eq!(kids.len(), 2);
    assert!(kids.iter().all(|k| tree.children(k).len() == 2));
}

#[test]
fn choice_free_tree_is_single_leaf() {
    let mut t = ThreadBuilder::new("T", &[]);
    t.trans("s", "s", Guard::True, Operation::default(), None);
    let p = PartialProgram::new(vec![t.build()]);
    let g = build_game(
        &p,
        &Scheduler::uniform(1),
        &PerformanceAutomaton::trivial(),
        &BuildOptions::default(),
    )
    .unwrap();
    let e = strategy_elimination(&g, true);
    assert_eq!(e.candidates, vec![vec![0]]);
}

#[test]
fn racy_branch_is_pruned_wholesale() {
    let g = game(
        &two_choices(true),
        Checks {
            race: true,
            deadlock: false,
        },
    );
    let order = complete_tree(&g).order().to_vec();
    // Both threads writing g: A's second action with B's second action.
    let mut sigma = vec![None; g.observations.len()];
    assert_eq!(partial_check(&g, &sigma), CheckResult::Unknown);
    sigma[order[0] as usize] = Some(1);
    sigma[order[1] as usize] = Some(1);
    assert_eq!(partial_check(&g, &sigma), CheckResult::ProvablyUnsafe);
    let pruned = strategy_elimination(&g, true);
    let all = strategy_elimination(&g, false);
    assert_eq!(all.candidates.len(), 4);
    assert!(pruned.candidates.len() <= 4);
    for c in &all.candidates {
        let v = crate::solve::solve_value(&crate::game::fix_strategy(&g, c).mdp);
        if v.is_finite() {
            assert!(pruned.candidates.contains(c));
        }
    }
}

#[test]
fn safe_choices_are_all_kept() {
    let g = game(&two_choices(false), Checks::ALL);
    let e = strategy_elimination(&g, true);
    assert_eq!(e.candidates.len(), 4);
    assert_eq!(e.pruned_leaves, 0);
}

#[test]
fn opposite_lock_orders_warned() {
    let globals = [
        VarDecl::new("a", Domain::BOOL, 0),
        VarDecl::new("b", Domain::BOOL, 0),
    ];
    let thread = |name: &str, first: &'static str, second: &'static str| {
        let mut t = ThreadBuilder::new(name, &globals);
        t.lock("a").lock("b");
        t.trans("l0", "l1", is(first, 0), assign([(first, cst(1))]), None);
        t.trans("l1", "l2", is(second, 0), assign([(second, cst(1))]), None);
        t.trans(
            "l2",
            "l3",
            Guard::True,
            assign([(second, cst(0)), (first, cst(0))]),
            None,
        );
        t.build()
    };
    let p = PartialProgram::new(vec![thread("T1", "a", "b"), thread("T2", "b", "a")]);
    let g = build_game(
        &p,
        &Scheduler::uniform(2),
        &PerformanceAutomaton::trivial(),
        &BuildOptions::default(),
    )
    .unwrap();
    let w = lock_order_warnings(&p, &g, &vec![None; g.observations.len()]);
    assert_eq!(w.len(), 1);
}
