//! Maximum mean cycle (Karp) for weighted transition systems.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use super::scc::{tarjan, Graph};
use super::{mdp_strategy_improvement, restrict_reachable, unsafe_reachable, Mdp};
use crate::num::{ExtValue, Q};

/// Components larger than this are solved by strategy improvement instead.
pub const KARP_LIMIT: usize = 4096;

const NEG: i128 = i128::MIN;

/// Largest mean weight over cycles reachable from the initial state; every
/// branch of every action counts as a nondeterministic edge.
pub fn max_mean_cycle(m: &Mdp) -> ExtValue {
    if unsafe_reachable(m) {
        return ExtValue::Infinite;
    }
    let (local, _) = restrict_reachable(m);
    match karp_all(&local) {
        Some(v) => ExtValue::Finite(v),
        None => {
            let as_ts = Mdp::weighted_ts(
                local.initial,
                local
                    .states
                    .iter()
                    .map(|s| {
                        s.actions
                            .iter()
                            .flat_map(|a| a.branches.iter().map(|b| (b.target, b.weight.clone())))
                            .collect()
                    })
                    .collect(),
            );
            mdp_strategy_improvement(&as_ts).0
        }
    }
}

fn karp_all(m: &Mdp) -> Option<Q> {
    let mut edges: Vec<(usize, usize, Q)> = Vec::new();
    for (s, st) in m.states.iter().enumerate() {
        for a in &st.actions {
            for b in &a.branches {
                edges.push((s, b.target, b.weight.clone()));
            }
        }
    }
    let scale = edges
        .iter()
        .fold(BigInt::one(), |acc, e| acc.lcm(e.2.denom()));
    let mut int_edges: Vec<(usize, usize, i128)> = Vec::with_capacity(edges.len());
    for (u, v, w) in &edges {
        let scaled = w.numer() * (&scale / w.denom());
        int_edges.push((*u, *v, scaled.to_i128()?));
    }
    let mut lists = vec![Vec::new(); m.states.len()];
    for (u, v, _) in &int_edges {
        lists[*u].push(*v);
    }
    let g = Graph::from_lists(&lists);
    let comps = tarjan(&g);
    let mut best: Option<(i128, i128)> = None;
    let mut local = vec![0usize; m.states.len()];
    for (c, comp) in comps.comps.iter().enumerate() {
        if !comps.is_cyclic(&g, c) {
            continue;
        }
        if comp.len() > KARP_LIMIT {
            return None;
        }
        for (i, &s) in comp.iter().enumerate() {
            local[s] = i;
        }
        let inner: Vec<(usize, usize, i128)> = int_edges
            .iter()
            .filter(|(u, v, _)| comps.comp_of[*u] == c && comps.comp_of[*v] == c)
            .map(|(u, v, w)| (local[*u], local[*v], *w))
            .collect();
        let mean = karp_component(comp.len(), &inner)?;
        best = Some(match best {
            None => mean,
            Some(b) => {
                if frac_lt(b, mean)? {
                    mean
                } else {
                    b
                }
            }
        });
    }
    let (num, den) = best.expect("every state has a successor, so some cycle is reachable");
    Some(Q::new(BigInt::from(num), BigInt::from(den) * scale))
}

/// `a/b < c/d` for positive denominators, or `None` on overflow.
fn frac_lt((a, b): (i128, i128), (c, d): (i128, i128)) -> Option<bool> {
    Some(a.checked_mul(d)? < c.checked_mul(b)?)
}

fn step(prev: &[i128], edges: &[(usize, usize, i128)]) -> Option<Vec<i128>> {
    let mut next = vec![NEG; prev.len()];
    for &(u, v, w) in edges {
        if prev[u] != NEG {
            let cand = prev[u].checked_add(w)?;
            if cand > next[v] {
                next[v] = cand;
            }
        }
    }
    Some(next)
}

/// Karp's characterization on a strongly connected component, in two
/// passes with O(n) memory: the first computes walk weights of length n,
/// the second recomputes shorter lengths while tracking the minimum ratio.
fn karp_component(n: usize, edges: &[(usize, usize, i128)]) -> Option<(i128, i128)> {
    let mut d = vec![NEG; n];
    d[0] = 0;
    for _ in 0..n {
        d = step(&d, edges)?;
    }
    let dn = d;
    let mut ratio: Vec<Option<(i128, i128)>> = vec![None; n];
    let mut dk = vec![NEG; n];
    dk[0] = 0;
    for k in 0..n {
        for v in 0..n {
            if dn[v] == NEG || dk[v] == NEG {
                continue;
            }
            let cand = (dn[v].checked_sub(dk[v])?, (n - k) as i128);
            ratio[v] = Some(match ratio[v] {
                None => cand,
                Some(r) => {
                    if frac_lt(cand, r)? {
                        cand
                    } else {
                        r
                    }
                }
            });
        }
        if k + 1 < n {
            dk = step(&dk, edges)?;
        }
    }
    let mut best: Option<(i128, i128)> = None;
    for r in ratio.into_iter().flatten() {
        best = Some(match best {
            None => r,
            Some(b) => {
                if frac_lt(b, r)? {
                    r
                } else {
                    b
                }
            }
        });
    }
    let (num, den) = best?;
    let gcd = num.gcd(&den).max(1);
    Some((num / gcd, den / gcd))
}
