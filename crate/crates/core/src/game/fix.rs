//! Fixing a resolver strategy turns the game into an MDP (probabilistic
//! scheduler) or a weighted transition system (nondeterministic scheduler).

use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use num_traits::Zero;

use super::{EnvChoice, GameGraph, GameNode, StateId};
use crate::num::Q;
use crate::perf::SchedulerMode;
use crate::solve::{Branch, Mdp, MdpAction, MdpState};

/// Label of the single action of a bad (absorbing) state.
pub const BAD_LABEL: u64 = u64::MAX;
/// Label of the zero-cost move back to the initial state from a state where
/// nothing can run and deadlocks are not checked.
pub const RESTART_LABEL: u64 = u64::MAX - 1;

/// The system obtained by fixing a strategy, restricted to reachable
/// states; `origin[i]` is the game state behind MDP state `i`.
#[derive(Clone, Debug)]
pub struct FixedGame {
    pub mdp: Mdp,
    pub origin: Vec<StateId>,
}

/// Keeps, in every resolver state, only the move of the strategy's action
/// at its observation (`strategy[obs]`), and resolves the environment's
/// scheduling against it. Bad states become absorbing.
pub fn fix_strategy(g: &GameGraph, strategy: &[u32]) -> FixedGame {
    assert_eq!(
        strategy.len(),
        g.observations.len(),
        "strategy must cover every observation"
    );
    let partial: Vec<Option<u32>> = strategy.iter().map(|&a| Some(a)).collect();
    let mut local: HashMap<StateId, usize> = HashMap::new();
    let mut origin: Vec<StateId> = vec![g.initial];
    local.insert(g.initial, 0);
    let mut states: Vec<MdpState> = Vec::new();
    let mut i = 0;
    while i < origin.len() {
        let s = origin[i];
        let mut id = |t: StateId, origin: &mut Vec<StateId>| -> usize {
            *local.entry(t).or_insert_with(|| {
                origin.push(t);
                origin.len() - 1
            })
        };
        let state = match &g.nodes[s as usize] {
            GameNode::Thread(node) => {
                let a = strategy[node.obs as usize] as usize;
                let branch = match node.moves.get(a).and_then(|m| m.as_ref()) {
                    Some(m) => Branch::dirac(id(m.target, &mut origin), m.weight.clone()),
                    None => Branch::dirac(id(g.initial, &mut origin), Q::zero()),
                };
                MdpState {
                    bad: false,
                    actions: vec![MdpAction {
                        label: 0,
                        branches: vec![branch],
                    }],
                }
            }
            GameNode::Env(env) if env.bad => bad_state(i),
            GameNode::Env(env) => match &env.choice {
                EnvChoice::Explicit(actions) => MdpState {
                    bad: false,
                    actions: actions
                        .iter()
                        .enumerate()
                        .map(|(label, bs)| MdpAction {
                            label: label as u64,
                            branches: bs
                                .iter()
                                .map(|b| {
                                    Branch::new(
                                        id(b.target as StateId, &mut origin),
                                        b.prob.clone(),
                                        b.weight.clone(),
                                    )
                                })
                                .collect(),
                        })
                        .collect(),
                },
                EnvChoice::Schedule { slots, .. } => {
                    let verdict = g.verdict(slots, &partial);
                    if verdict.bad {
                        bad_state(i)
                    } else if verdict.active.is_empty() {
                        MdpState {
                            bad: false,
                            actions: vec![MdpAction {
                                label: RESTART_LABEL,
                                branches: vec![Branch::dirac(
                                    id(g.initial, &mut origin),
                                    Q::zero(),
                                )],
                            }],
                        }
                    } else {
                        let mut actions = Vec::new();
                        match g.mode {
                            SchedulerMode::Nondeterministic => {
                                for &(si, a) in &verdict.active {
                                    let slot = &slots[si];
                                    for &o in &slot.views[a as usize].live {
                                        let (input, target) = slot.options[o as usize];
                                        actions.push(MdpAction {
                                            label: ((slot.thread as u64) << 32) | input as u64,
                                            branches: vec![Branch::dirac(
                                                id(target, &mut origin),
                                                Q::zero(),
                                            )],
                                        });
                                    }
                                }
                            }
                            SchedulerMode::Probabilistic => {
                                let total: Q = verdict
                                    .active
                                    .iter()
                                    .map(|&(si, _)| {
                                        slots[si].weight.clone().expect("probabilistic weight")
                                    })
                                    .sum();
                                // Environment picks one live input per active thread.
                                let lists: Vec<&[u32]> = verdict
                                    .active
                                    .iter()
                                    .map(|&(si, a)| slots[si].views[a as usize].live.as_slice())
                                    .collect();
                                let mut pick = vec![0usize; lists.len()];
                                loop {
                                    let mut label = 0u64;
                                    let mut branches = Vec::with_capacity(lists.len());
                                    for (k, &(si, _)) in verdict.active.iter().enumerate() {
                                        let slot = &slots[si];
                                        let (input, target) =
                                            slot.options[lists[k][pick[k]] as usize];
                                        label = label.wrapping_mul(1_000_003).wrapping_add(
                                            ((slot.thread as u64) << 32) | input as u64,
                                        );
                                        let w = slot.weight.as_ref().expect("probabilistic weight");
                                        branches.push(Branch::new(
                                            id(target, &mut origin),
                                            w / &total,
                                            Q::zero(),
                                        ));
                                    }
                                    actions.push(MdpAction { label, branches });
                                    let mut k = 0;
                                    loop {
                                        if k == lists.len() {
                                            break;
                                        }
                                        pick[k] += 1;
                                        if pick[k] < lists[k].len() {
                                            break;
                                        }
                                        pick[k] = 0;
                                        k += 1;
                                    }
                                    if k == lists.len() {
                                        break;
                                    }
                                }
                            }
                        }
                        MdpState {
                            bad: false,
                            actions,
                        }
                    }
                }
            },
        };
        states.push(state);
        i += 1;
    }
    FixedGame {
        mdp: Mdp { initial: 0, states },
        origin,
    }
}

fn bad_state(me: usize) -> MdpState {
    MdpState {
        bad: true,
        actions: vec![MdpAction {
            label: BAD_LABEL,
            branches: vec![Branch::dirac(me, Q::zero())],
        }],
    }
}
