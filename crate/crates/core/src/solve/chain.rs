//! Markov chains: stationary distributions, gains and biases.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use super::linear::{solve_dense, solve_sparse};
use super::renewal::stationary_average;
use super::scc::{tarjan, Graph};
use super::{restrict_reachable, unsafe_reachable, Mdp};
use crate::num::{ExtValue, Q};

/// Above this many back-edge sources the forward propagation falls back to
/// plain elimination.
pub const MAX_BACK_SOURCES: usize = 64;

/// Stationary distribution of an irreducible chain given as sparse rows of
/// `(successor, probability)`. Fixes the first state's weight, solves the
/// remaining balance equations, then normalizes.
pub fn gaussian_stationary(rows: &[Vec<(usize, Q)>]) -> Vec<Q> {
    let n = rows.len();
    if n == 1 {
        return vec![Q::one()];
    }
    // Unknowns: π_1..π_{n-1} (column j-1); equation j: π_j - Σ_{i≥1} P_ij π_i = P_0j.
    let mut eqs: Vec<Vec<(usize, Q)>> = (1..n).map(|j| vec![(j - 1, Q::one())]).collect();
    let mut rhs = vec![Q::zero(); n - 1];
    for (i, row) in rows.iter().enumerate() {
        for (j, p) in row {
            if *j == 0 {
                continue;
            }
            if i == 0 {
                rhs[j - 1] += p;
            } else {
                eqs[j - 1].push((i - 1, -p.clone()));
            }
        }
    }
    let sol =
        solve_sparse(n - 1, eqs, rhs).expect("irreducible chain has a stationary distribution");
    let total: Q = sol.iter().fold(Q::one(), |acc, v| acc + v);
    let mut pi = Vec::with_capacity(n);
    pi.push(Q::one() / &total);
    pi.extend(sol.into_iter().map(|v| v / &total));
    pi
}

/// Stationary distribution of an irreducible chain by forward propagation.
///
/// A depth-first search from state 0 classifies edges; removing back edges
/// leaves a DAG. Each state's weight becomes a linear form in the weights of
/// the back-edge sources, computed in topological order, and the small
/// residual system on those sources is solved densely.
pub fn stationary_forward_prop(rows: &[Vec<(usize, Q)>]) -> Vec<Q> {
    let n = rows.len();
    if n == 1 {
        return vec![Q::one()];
    }
    let (post, back) = dfs_classify(rows);
    let mut sources: Vec<usize> = Vec::new();
    let mut source_idx = vec![usize::MAX; n];
    for (u, row) in rows.iter().enumerate() {
        for (e, _) in row.iter().enumerate() {
            if back[u][e] && source_idx[u] == usize::MAX {
                source_idx[u] = sources.len();
                sources.push(u);
            }
        }
    }
    let k = sources.len();
    if k == 0 || k > MAX_BACK_SOURCES || post.len() != n {
        return gaussian_stationary(rows);
    }
    let mut incoming: Vec<Vec<(usize, Q, bool)>> = vec![Vec::new(); n];
    for (u, row) in rows.iter().enumerate() {
        for (e, (v, p)) in row.iter().enumerate() {
            incoming[*v].push((u, p.clone(), back[u][e]));
        }
    }
    let mut forms: Vec<Vec<Q>> = vec![Vec::new(); n];
    for &v in post.iter().rev() {
        let mut f = vec![Q::zero(); k];
        for (u, p, is_back) in &incoming[v] {
            if *is_back {
                f[source_idx[*u]] += p;
            } else {
                for (acc, x) in f.iter_mut().zip(&forms[*u]) {
                    if !x.is_zero() {
                        *acc += p * x;
                    }
                }
            }
        }
        forms[v] = f;
    }
    // Residual: form(source_b) = x_b for all but the last source; the last
    // equation is replaced by normalization.
    let mut m: Vec<Vec<Q>> = Vec::with_capacity(k);
    for (b, &s) in sources.iter().enumerate().take(k - 1) {
        let mut row = forms[s].clone();
        row[b] -= Q::one();
        row.push(Q::zero());
        m.push(row);
    }
    let mut norm = vec![Q::zero(); k + 1];
    for f in &forms {
        for (acc, x) in norm.iter_mut().zip(f) {
            *acc += x;
        }
    }
    norm[k] = Q::one();
    m.push(norm);
    let x = match solve_dense(m) {
        Some(x) => x,
        None => return gaussian_stationary(rows),
    };
    forms
        .iter()
        .map(|f| f.iter().zip(&x).fold(Q::zero(), |acc, (a, b)| acc + a * b))
        .collect()
}

/// Iterative DFS from state 0: postorder of visited states and, per edge,
/// whether it closes a cycle (targets a state on the current DFS stack).
fn dfs_classify(rows: &[Vec<(usize, Q)>]) -> (Vec<usize>, Vec<Vec<bool>>) {
    let n = rows.len();
    let mut back: Vec<Vec<bool>> = rows.iter().map(|r| vec![false; r.len()]).collect();
    let mut state = vec![0u8; n]; // 0 unseen, 1 on stack, 2 done
    let mut post = Vec::with_capacity(n);
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    state[0] = 1;
    while let Some(top) = stack.last_mut() {
        let (u, e) = *top;
        if e < rows[u].len() {
            top.1 += 1;
            let v = rows[u][e].0;
            match state[v] {
                0 => {
                    state[v] = 1;
                    stack.push((v, 0));
                }
                1 => back[u][e] = true,
                _ => {}
            }
        } else {
            state[u] = 2;
            post.push(u);
            stack.pop();
        }
    }
    (post, back)
}

/// Transition rows and one-step expected rewards of a chain.
pub(crate) struct Chain {
    pub rows: Vec<Vec<(usize, Q)>>,
    pub reward: Vec<Q>,
}

/// Gain of every state and, when requested, its bias normalized so that
/// the stationary average of the bias over each recurrent class is zero.
pub(crate) fn gain_bias(chain: &Chain, with_bias: bool) -> (Vec<Q>, Vec<Q>) {
    let n = chain.rows.len();
    let lists: Vec<Vec<usize>> = chain
        .rows
        .iter()
        .map(|r| r.iter().map(|e| e.0).collect())
        .collect();
    let g = Graph::from_lists(&lists);
    let comps = tarjan(&g);
    let mut gain = vec![Q::zero(); n];
    let mut bias = vec![Q::zero(); n];
    let mut local = vec![usize::MAX; n];
    for (c, comp) in comps.comps.iter().enumerate() {
        for (i, &s) in comp.iter().enumerate() {
            local[s] = i;
        }
        if comps.is_bottom(&g, c) {
            let rows: Vec<Vec<(usize, Q)>> = comp
                .iter()
                .map(|&s| {
                    chain.rows[s]
                        .iter()
                        .map(|(t, p)| (local[*t], p.clone()))
                        .collect()
                })
                .collect();
            let rewards: Vec<Q> = comp.iter().map(|&s| chain.reward[s].clone()).collect();
            let avg = stationary_average(&rows, &rewards);
            for &s in comp {
                gain[s] = avg.clone();
            }
            if with_bias && comp.len() > 1 {
                let pi = stationary_forward_prop(&rows);
                // h_s - Σ p h_t = r_s - g with h fixed to 0 at the first state.
                let m = comp.len() - 1;
                let mut eqs = Vec::with_capacity(m);
                let mut rhs = Vec::with_capacity(m);
                for &s in &comp[1..] {
                    let mut row = vec![(local[s] - 1, Q::one())];
                    for (t, p) in &chain.rows[s] {
                        if local[*t] != 0 {
                            row.push((local[*t] - 1, -p.clone()));
                        }
                    }
                    eqs.push(row);
                    rhs.push(&chain.reward[s] - &avg);
                }
                let h = solve_sparse(m, eqs, rhs).expect("recurrent bias system is nonsingular");
                let shift = h
                    .iter()
                    .zip(&pi[1..])
                    .fold(Q::zero(), |acc, (x, p)| acc + x * p);
                bias[comp[0]] = -shift.clone();
                for (i, &s) in comp[1..].iter().enumerate() {
                    bias[s] = &h[i] - &shift;
                }
            }
        } else {
            solve_transient(chain, comp, &local, &mut gain, |_| Q::zero());
            if with_bias {
                let gain = &gain;
                solve_transient(chain, comp, &local, &mut bias, |s| {
                    &chain.reward[s] - &gain[s]
                });
            }
        }
    }
    (gain, bias)
}

/// Solves `x_s - Σ_{t∈C} p x_t = extra(s) + Σ_{t∉C} p x_t` over component `C`,
/// whose successors outside `C` already hold their values in `x`.
fn solve_transient(
    chain: &Chain,
    comp: &[usize],
    local: &[usize],
    x: &mut [Q],
    extra: impl Fn(usize) -> Q,
) {
    let in_comp = |t: usize| local[t] < comp.len() && comp[local[t]] == t;
    if comp.len() == 1 && !chain.rows[comp[0]].iter().any(|(t, _)| *t == comp[0]) {
        let s = comp[0];
        let mut v = extra(s);
        for (t, p) in &chain.rows[s] {
            v += p * &x[*t];
        }
        x[s] = v;
        return;
    }
    let m = comp.len();
    let mut eqs = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for &s in comp {
        let mut row = vec![(local[s], Q::one())];
        let mut b = extra(s);
        for (t, p) in &chain.rows[s] {
            if in_comp(*t) {
                row.push((local[*t], -p.clone()));
            } else {
                b += p * &x[*t];
            }
        }
        eqs.push(row);
        rhs.push(b);
    }
    let sol = solve_sparse(m, eqs, rhs).expect("transient system is nonsingular");
    for (i, &s) in comp.iter().enumerate() {
        x[s] = sol[i].clone();
    }
}

pub(crate) fn chain_of(m: &Mdp, policy: &[usize]) -> Chain {
    let mut rows = Vec::with_capacity(m.states.len());
    let mut reward = Vec::with_capacity(m.states.len());
    for (s, st) in m.states.iter().enumerate() {
        let a = &st.actions[policy[s]];
        rows.push(
            a.branches
                .iter()
                .map(|b| (b.target, b.prob.clone()))
                .collect(),
        );
        reward.push(
            a.branches
                .iter()
                .fold(Q::zero(), |acc, b| acc + &b.prob * &b.weight),
        );
    }
    Chain { rows, reward }
}

/// Long-run average cost of a Markov chain from its initial state: the
/// absorption-weighted mix of the recurrent classes' stationary averages.
pub fn mc_value(m: &Mdp) -> ExtValue {
    assert!(m.is_markov_chain(), "mc_value expects one action per state");
    if unsafe_reachable(m) {
        return ExtValue::Infinite;
    }
    let (local, _) = restrict_reachable(m);
    let chain = chain_of(&local, &vec![0; local.states.len()]);
    let (gain, _) = gain_bias(&chain, false);
    ExtValue::Finite(gain[local.initial].clone())
}
