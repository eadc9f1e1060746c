//! A game in which the resolver has a safe memoryless strategy exactly when
//! a 3-CNF formula is satisfiable. The environment picks a clause; the
//! resolver then walks its literals, seeing only the variable of each, and
//! loses once it has falsified all of them.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::game::{
    ActionInfo, Checks, EnvChoice, EnvNode, GameGraph, GameNode, Move, ObservationInfo, StateId,
    ThreadNode,
};
use crate::num::Q;
use crate::perf::SchedulerMode;
use crate::solve::Branch;

/// Formula in conjunctive normal form; literal `k` is variable `k`
/// (1-based), `-k` its negation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf {
    pub vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl Cnf {
    pub fn new(vars: usize, clauses: Vec<Vec<i32>>) -> Self {
        Cnf { vars, clauses }
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter()
                .any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0))
        })
    }

    /// First satisfying assignment in counting order, by enumeration.
    pub fn brute_force(&self) -> Option<Vec<bool>> {
        assert!(self.vars <= 24, "enumeration limited to 24 variables");
        (0u32..1 << self.vars)
            .map(|bits| {
                (0..self.vars)
                    .map(|i| bits >> i & 1 == 1)
                    .collect::<Vec<bool>>()
            })
            .find(|a| self.eval(a))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GadgetObjective {
    /// Reaching the losing state is unsafe.
    Safety,
    /// The losing state loops with weight 1, everything else weighs 0.
    LimAvg,
}

/// Observation 0 covers the two environment states; observation `k` covers
/// every position holding variable `k`. Action 0 is "false", 1 is "true".
/// States: the start, one per literal position, then the losing state.
pub fn sat_gadget(cnf: &Cnf, objective: GadgetObjective) -> GameGraph {
    let zero = Q::zero();
    let mut first: Vec<usize> = Vec::with_capacity(cnf.clauses.len());
    let mut n = 1;
    for c in &cnf.clauses {
        assert!(!c.is_empty(), "empty clause");
        first.push(n);
        n += c.len();
    }
    let bad = n as StateId;
    let mut nodes = Vec::with_capacity(n + 1);
    nodes.push(GameNode::Env(EnvNode {
        bad: false,
        choice: EnvChoice::Explicit(
            first
                .iter()
                .map(|&s| vec![Branch::dirac(s, zero.clone())])
                .collect(),
        ),
    }));
    let mut depth: Vec<Option<u32>> = vec![None; cnf.vars + 1];
    for (ci, c) in cnf.clauses.iter().enumerate() {
        for (j, &lit) in c.iter().enumerate() {
            let k = lit.unsigned_abs() as usize;
            assert!((1..=cnf.vars).contains(&k), "literal {lit} out of range");
            let d = j as u32 + 1;
            depth[k] = Some(depth[k].map_or(d, |e| e.min(d)));
            let onward = if j + 1 < c.len() {
                (first[ci] + j + 1) as StateId
            } else {
                bad
            };
            // The literal is satisfied by "true" when positive.
            let (on_false, on_true) = if lit > 0 { (onward, 0) } else { (0, onward) };
            nodes.push(GameNode::Thread(ThreadNode {
                obs: k as u32,
                moves: vec![
                    Some(Move {
                        target: on_false,
                        weight: zero.clone(),
                    }),
                    Some(Move {
                        target: on_true,
                        weight: zero.clone(),
                    }),
                ],
            }));
        }
    }
    let (is_bad, w) = match objective {
        GadgetObjective::Safety => (true, Q::zero()),
        GadgetObjective::LimAvg => (false, Q::one()),
    };
    nodes.push(GameNode::Env(EnvNode {
        bad: is_bad,
        choice: EnvChoice::Explicit(vec![vec![Branch::dirac(bad as usize, w)]]),
    }));
    let action = |name: &str| ActionInfo {
        name: name.to_string(),
        transitions: Vec::new(),
    };
    let mut observations = vec![ObservationInfo {
        name: "env".to_string(),
        thread: 0,
        location: 0,
        actions: vec![action("-")],
        depth: Some(0),
    }];
    for (k, d) in depth.iter().enumerate().skip(1) {
        observations.push(ObservationInfo {
            name: format!("x{k}"),
            thread: 0,
            location: k,
            actions: vec![action("false"), action("true")],
            depth: *d,
        });
    }
    GameGraph {
        mode: SchedulerMode::Nondeterministic,
        initial: 0,
        nodes,
        observations,
        thread_names: vec!["resolver".to_string()],
        checks: Checks::NONE,
        program: None,
    }
}

/// Assignment read off a strategy of the gadget.
pub fn assignment_of(strategy: &[u32], vars: usize) -> Vec<bool> {
    (1..=vars).map(|k| strategy[k] == 1).collect()
}
