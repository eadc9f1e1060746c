//! Multichain policy iteration for the maximizing environment of an MDP.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use super::chain::{chain_of, gain_bias};
use super::{restrict_reachable, unsafe_reachable, Mdp};
use crate::num::{ExtValue, Q};

/// Optimal long-run average cost from the initial state against a
/// maximizing environment, with an optimal memoryless policy (one action
/// index per state; unreachable states get 0).
///
/// Each round evaluates the current policy exactly (gain and bias), then
/// switches states to actions that strictly improve the gain; only when no
/// gain improvement exists are bias improvements among gain-optimal actions
/// applied. The current action is kept on ties.
pub fn mdp_strategy_improvement(m: &Mdp) -> (ExtValue, Vec<usize>) {
    let mut full_policy = vec![0usize; m.states.len()];
    if unsafe_reachable(m) {
        return (ExtValue::Infinite, full_policy);
    }
    let (local, origin) = restrict_reachable(m);
    let n = local.states.len();
    let mut policy = vec![0usize; n];
    loop {
        let chain = chain_of(&local, &policy);
        let (gain, bias) = gain_bias(&chain, true);
        let mut changed = false;
        for s in 0..n {
            let acts = &local.states[s].actions;
            if acts.len() < 2 {
                continue;
            }
            let expected_gain = |a: usize| {
                acts[a]
                    .branches
                    .iter()
                    .fold(Q::zero(), |acc, b| acc + &b.prob * &gain[b.target])
            };
            let mut best = policy[s];
            let mut best_val = expected_gain(best);
            for a in 0..acts.len() {
                let v = expected_gain(a);
                if v > best_val {
                    best = a;
                    best_val = v;
                }
            }
            if best != policy[s] {
                policy[s] = best;
                changed = true;
            }
        }
        if changed {
            continue;
        }
        for s in 0..n {
            let acts = &local.states[s].actions;
            if acts.len() < 2 {
                continue;
            }
            let expected_gain = |a: usize| {
                acts[a]
                    .branches
                    .iter()
                    .fold(Q::zero(), |acc, b| acc + &b.prob * &gain[b.target])
            };
            let expected_bias = |a: usize| {
                acts[a].branches.iter().fold(Q::zero(), |acc, b| {
                    acc + &b.prob * (&b.weight + &bias[b.target])
                })
            };
            let mut best = policy[s];
            let mut best_val = expected_bias(best);
            for a in 0..acts.len() {
                if expected_gain(a) != gain[s] {
                    continue;
                }
                let v = expected_bias(a);
                if v > best_val {
                    best = a;
                    best_val = v;
                }
            }
            if best != policy[s] {
                policy[s] = best;
                changed = true;
            }
        }
        if !changed {
            for (i, &s) in origin.iter().enumerate() {
                full_policy[s] = policy[i];
            }
            return (ExtValue::Finite(gain[local.initial].clone()), full_policy);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{q, ratio};
    use crate::solve::Branch;
    use crate::solve::{mc_value, MdpAction, MdpState};

    #[test]
    fn single_action_matches_chain() {
        let m = Mdp::markov_chain(0, vec![vec![(1, q(1), q(3))], vec![(0, q(1), q(8))]]);
        assert_eq!(mdp_strategy_improvement(&m).0, mc_value(&m));
    }

    #[test]
    fn maximizer_picks_costlier_loop() {
        let m = Mdp::weighted_ts(0, vec![vec![(0, q(1)), (0, q(3))]]);
        let (v, p) = mdp_strategy_improvement(&m);
        assert_eq!(v, ExtValue::Finite(q(3)));
        assert_eq!(p, vec![1]);
    }

    #[test]
    fn multichain_choice_between_classes() {
        // State 0 chooses: go to an absorbing loop of cost 2, or a coin flip
        // between loops of cost 1 and 5 (expected 3).
        let m = Mdp {
            initial: 0,
            states: vec![
                MdpState {
                    bad: false,
                    actions: vec![
                        MdpAction {
                            label: 0,
                            branches: vec![Branch::dirac(1, q(0))],
                        },
                        MdpAction {
                            label: 1,
                            branches: vec![
                                Branch::new(2, ratio(1, 2), q(0)),
                                Branch::new(3, ratio(1, 2), q(0)),
                            ],
                        },
                    ],
                },
                MdpState {
                    bad: false,
                    actions: vec![MdpAction {
                        label: 0,
                        branches: vec![Branch::dirac(1, q(2))],
                    }],
                },
                MdpState {
                    bad: false,
                    actions: vec![MdpAction {
                        label: 0,
                        branches: vec![Branch::dirac(2, q(1))],
                    }],
                },
                MdpState {
                    bad: false,
                    actions: vec![MdpAction {
                        label: 0,
                        branches: vec![Branch::dirac(3, q(5))],
                    }],
                },
            ],
        };
        assert_eq!(mdp_strategy_improvement(&m).0, ExtValue::Finite(q(3)));
    }

    fn random_mdp(rng: &mut impl rand::Rng) -> Mdp {
        let n = rng.gen_range(1..=6);
        let states = (0..n)
            .map(|_| MdpState {
                bad: false,
                actions: (0..rng.gen_range(1..=2))
                    .map(|label| {
                        let k = rng.gen_range(1..=3);
                        let mut parts: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=4)).collect();
                        let total: i64 = parts.iter().sum();
                        MdpAction {
                            label,
                            branches: parts
                                .drain(..)
                                .map(|p| {
                                    Branch::new(
                                        rng.gen_range(0..n),
                                        ratio(p, total),
                                        q(rng.gen_range(0..=9)),
                                    )
                                })
                                .collect(),
                        }
                    })
                    .collect(),
            })
            .collect();
        Mdp { initial: 0, states }
    }

    fn brute_force(m: &Mdp) -> ExtValue {
        let n = m.states.len();
        let mut policy = vec![0usize; n];
        let mut best = ExtValue::zero();
        loop {
            let fixed = Mdp {
                initial: m.initial,
                states: m
                    .states
                    .iter()
                    .zip(&policy)
                    .map(|(s, &a)| MdpState {
                        bad: s.bad,
                        actions: vec![s.actions[a].clone()],
                    })
                    .collect(),
            };
            best = best.max(mc_value(&fixed));
            let mut i = 0;
            loop {
                if i == n {
                    return best;
                }
                policy[i] += 1;
                if policy[i] < m.states[i].actions.len() {
                    break;
                }
                policy[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn matches_policy_enumeration() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let m = random_mdp(&mut rng);
            assert_eq!(mdp_strategy_improvement(&m).0, brute_force(&m), "{m:?}");
        }
    }
}
