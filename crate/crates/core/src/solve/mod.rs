//! Exact evaluation of systems with a fixed resolver strategy: weighted
//! transition systems (nondeterministic), Markov chains and MDPs, under the
//! limit-average objective where reaching a bad state costs ∞.

mod chain;
mod karp;
pub mod linear;
mod policy;
mod renewal;
pub mod scc;

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::num::{ExtValue, Q};

pub use chain::{gaussian_stationary, mc_value, stationary_forward_prop, MAX_BACK_SOURCES};
pub use karp::{max_mean_cycle, KARP_LIMIT};
pub use policy::mdp_strategy_improvement;
pub use renewal::{
    multimodular_average, stationary_average, stationary_average_exact, EXACT_LIMIT,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub target: usize,
    /// Strictly positive; only the support of a distribution is listed.
    pub prob: Q,
    pub weight: Q,
}

impl Branch {
    pub fn new(target: usize, prob: Q, weight: Q) -> Self {
        Branch {
            target,
            prob,
            weight,
        }
    }

    pub fn dirac(target: usize, weight: Q) -> Self {
        Branch {
            target,
            prob: Q::one(),
            weight,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdpAction {
    pub label: u64,
    pub branches: Vec<Branch>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdpState {
    /// Bad states are absorbing; whatever leaves them costs ∞.
    pub bad: bool,
    pub actions: Vec<MdpAction>,
}

/// A Markov decision process where the environment picks actions to
/// maximize the long-run average cost. A Markov chain has one action per
/// state; a weighted transition system only has Dirac actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mdp {
    pub initial: usize,
    pub states: Vec<MdpState>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MdpError {
    NoActions(usize),
    BadDistribution(usize, usize),
    TargetOutOfRange(usize),
}

impl Mdp {
    /// One action per state, given as `(target, probability, weight)` rows.
    pub fn markov_chain(initial: usize, rows: Vec<Vec<(usize, Q, Q)>>) -> Self {
        let states = rows
            .into_iter()
            .map(|row| MdpState {
                bad: false,
                actions: vec![MdpAction {
                    label: 0,
                    branches: row
                        .into_iter()
                        .map(|(t, p, w)| Branch::new(t, p, w))
                        .collect(),
                }],
            })
            .collect();
        Mdp { initial, states }
    }

    /// Nondeterministic successors `(target, weight)`, one Dirac action each.
    pub fn weighted_ts(initial: usize, edges: Vec<Vec<(usize, Q)>>) -> Self {
        let states = edges
            .into_iter()
            .map(|row| MdpState {
                bad: false,
                actions: row
                    .into_iter()
                    .enumerate()
                    .map(|(i, (t, w))| MdpAction {
                        label: i as u64,
                        branches: vec![Branch::dirac(t, w)],
                    })
                    .collect(),
            })
            .collect();
        Mdp { initial, states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn validate(&self) -> Result<(), MdpError> {
        let n = self.states.len();
        if self.initial >= n {
            return Err(MdpError::TargetOutOfRange(self.initial));
        }
        for (s, st) in self.states.iter().enumerate() {
            if st.actions.is_empty() {
                return Err(MdpError::NoActions(s));
            }
            for (a, act) in st.actions.iter().enumerate() {
                let mut total = Q::zero();
                for b in &act.branches {
                    if b.target >= n {
                        return Err(MdpError::TargetOutOfRange(b.target));
                    }
                    if !b.prob.is_positive() {
                        return Err(MdpError::BadDistribution(s, a));
                    }
                    total += &b.prob;
                }
                if !total.is_one() {
                    return Err(MdpError::BadDistribution(s, a));
                }
            }
        }
        Ok(())
    }

    pub fn is_markov_chain(&self) -> bool {
        self.states.iter().all(|s| s.actions.len() == 1)
    }

    pub fn is_deterministic(&self) -> bool {
        self.states
            .iter()
            .all(|s| s.actions.iter().all(|a| a.branches.len() == 1))
    }

    /// Successor graph over all actions and branches.
    pub fn graph(&self) -> scc::Graph {
        let lists: Vec<Vec<usize>> = self
            .states
            .iter()
            .map(|s| {
                let mut l: Vec<usize> = s
                    .actions
                    .iter()
                    .flat_map(|a| a.branches.iter().map(|b| b.target))
                    .collect();
                l.sort_unstable();
                l.dedup();
                l
            })
            .collect();
        scc::Graph::from_lists(&lists)
    }

    pub fn reachable(&self) -> Vec<bool> {
        scc::reachable(&self.graph(), self.initial)
    }
}

/// Whether some resolution of the nondeterminism reaches a bad state along
/// a positive-probability path.
pub fn unsafe_reachable(m: &Mdp) -> bool {
    let reach = m.reachable();
    m.states.iter().zip(&reach).any(|(s, &r)| r && s.bad)
}

/// Value of a fixed-strategy system, dispatched on its shape.
pub fn solve_value(m: &Mdp) -> ExtValue {
    if unsafe_reachable(m) {
        return ExtValue::Infinite;
    }
    if m.is_markov_chain() {
        mc_value(m)
    } else if m.is_deterministic() {
        max_mean_cycle(m)
    } else {
        mdp_strategy_improvement(m).0
    }
}

/// Restriction of `m` to the states reachable from its initial state.
/// Returns the local system and, for each local state, its original index.
pub(crate) fn restrict_reachable(m: &Mdp) -> (Mdp, Vec<usize>) {
    let reach = m.reachable();
    let mut local = vec![usize::MAX; m.states.len()];
    let mut origin = Vec::new();
    for (s, &r) in reach.iter().enumerate() {
        if r {
            local[s] = origin.len();
            origin.push(s);
        }
    }
    let states = origin
        .iter()
        .map(|&s| {
            let st = &m.states[s];
            MdpState {
                bad: st.bad,
                actions: st
                    .actions
                    .iter()
                    .map(|a| MdpAction {
                        label: a.label,
                        branches: a
                            .branches
                            .iter()
                            .map(|b| Branch::new(local[b.target], b.prob.clone(), b.weight.clone()))
                            .collect(),
                    })
                    .collect(),
            }
        })
        .collect();
    (
        Mdp {
            initial: local[m.initial],
            states,
        },
        origin,
    )
}
