//! Memoryless resolver strategies, strategy trees and enumeration with
//! sound pruning of partial strategies.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::game::{EnvChoice, GameGraph, GameNode, ObsId, StateId};
use crate::model::{guards_overlap, CompiledProgram, PartialProgram, Thread};

/// Action index per observation. Observations without a choice use 0.
pub type Strategy = Vec<u32>;
/// Action index per observation, `None` where not yet decided.
pub type PartialStrategy = Vec<Option<u32>>;

/// The resolver's actions at location `q`: nonempty sets of outgoing
/// transitions (indices into `thread.transitions`) whose guards are
/// pairwise disjoint. By default only maximal sets are returned. Each set
/// is sorted and the list is in lexicographic order.
pub fn enumerate_actions(thread: &Thread, q: usize, all_subsets: bool) -> Vec<Vec<usize>> {
    let outgoing = thread.outgoing(q);
    let n = outgoing.len();
    let mut compatible = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let ok = !guards_overlap(
                thread,
                &thread.transitions[outgoing[i]].guard,
                &thread.transitions[outgoing[j]].guard,
            );
            compatible[i][j] = ok;
            compatible[j][i] = ok;
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    if all_subsets {
        let mut cur = Vec::new();
        all_cliques(&compatible, 0, &mut cur, &mut out);
    } else {
        let p: Vec<usize> = (0..n).collect();
        bron_kerbosch(&compatible, &mut Vec::new(), p, Vec::new(), &mut out);
    }
    let mut sets: Vec<Vec<usize>> = out
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|i| outgoing[i]).collect();
            v.sort_unstable();
            v
        })
        .collect();
    sets.sort();
    sets.dedup();
    sets
}

fn all_cliques(adj: &[Vec<bool>], from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    for v in from..adj.len() {
        if cur.iter().all(|&u| adj[u][v]) {
            cur.push(v);
            out.push(cur.clone());
            all_cliques(adj, v + 1, cur, out);
            cur.pop();
        }
    }
}

fn bron_kerbosch(
    adj: &[Vec<bool>],
    r: &mut Vec<usize>,
    p: Vec<usize>,
    x: Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() {
        if x.is_empty() {
            out.push(r.clone());
        }
        return;
    }
    let pivot = p
        .iter()
        .chain(&x)
        .copied()
        .max_by_key(|&u| p.iter().filter(|&&v| adj[u][v]).count())
        .unwrap();
    let mut p = p;
    let mut x = x;
    let candidates: Vec<usize> = p.iter().copied().filter(|&v| !adj[pivot][v]).collect();
    for v in candidates {
        r.push(v);
        let np = p.iter().copied().filter(|&u| adj[v][u]).collect();
        let nx = x.iter().copied().filter(|&u| adj[v][u]).collect();
        bron_kerbosch(adj, r, np, nx, out);
        r.pop();
        p.retain(|&u| u != v);
        x.push(v);
    }
}

/// Lazily expanded tree of partial strategies: level `d` fixes the `d`-th
/// observation of the game's choice order.
#[derive(Clone, Debug)]
pub struct StrategyTree<'g> {
    game: &'g GameGraph,
    order: Vec<ObsId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub depth: usize,
    pub strategy: PartialStrategy,
}

pub fn complete_tree(game: &GameGraph) -> StrategyTree<'_> {
    StrategyTree {
        game,
        order: game.choice_order(),
    }
}

impl<'g> StrategyTree<'g> {
    pub fn order(&self) -> &[ObsId] {
        &self.order
    }

    pub fn root(&self) -> TreeNode {
        TreeNode {
            depth: 0,
            strategy: vec![None; self.game.observations.len()],
        }
    }

    pub fn is_leaf(&self, node: &TreeNode) -> bool {
        node.depth == self.order.len()
    }

    pub fn children(&self, node: &TreeNode) -> Vec<TreeNode> {
        if self.is_leaf(node) {
            return Vec::new();
        }
        let obs = self.order[node.depth];
        (0..self.game.observations[obs as usize].actions.len() as u32)
            .map(|a| {
                let mut s = node.strategy.clone();
                s[obs as usize] = Some(a);
                TreeNode {
                    depth: node.depth + 1,
                    strategy: s,
                }
            })
            .collect()
    }

    /// Number of leaves below a node (saturating).
    pub fn leaves_below(&self, node: &TreeNode) -> u128 {
        self.order[node.depth..].iter().fold(1u128, |acc, &o| {
            acc.saturating_mul(self.game.observations[o as usize].actions.len() as u128)
        })
    }

    pub fn leaf_count(&self) -> u128 {
        self.leaves_below(&self.root())
    }

    /// The complete strategy of a leaf.
    pub fn complete(&self, node: &TreeNode) -> Strategy {
        node.strategy.iter().map(|a| a.unwrap_or(0)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckResult {
    ProvablyUnsafe,
    Unknown,
}

/// Explores the states reachable when resolver states use only decided
/// actions (states whose observation is undecided are not expanded). A bad
/// state found this way is reachable under every extension of `strategy`.
pub fn partial_check(g: &GameGraph, strategy: &[Option<u32>]) -> CheckResult {
    let mut seen = vec![false; g.nodes.len()];
    let mut stack: Vec<StateId> = vec![g.initial];
    seen[g.initial as usize] = true;
    let mut push = |t: StateId, stack: &mut Vec<StateId>| {
        if !seen[t as usize] {
            seen[t as usize] = true;
            stack.push(t);
        }
    };
    while let Some(s) = stack.pop() {
        match &g.nodes[s as usize] {
            GameNode::Thread(node) => {
                if let Some(a) = g.resolved(node.obs, strategy) {
                    if let Some(Some(m)) = node.moves.get(a as usize) {
                        push(m.target, &mut stack);
                    }
                }
            }
            GameNode::Env(env) => {
                if env.bad {
                    return CheckResult::ProvablyUnsafe;
                }
                match &env.choice {
                    EnvChoice::Explicit(actions) => {
                        for b in actions.iter().flatten() {
                            push(b.target as StateId, &mut stack);
                        }
                    }
                    EnvChoice::Schedule { slots, .. } => {
                        let v = g.verdict(slots, strategy);
                        if v.bad {
                            return CheckResult::ProvablyUnsafe;
                        }
                        for &(si, a) in &v.active {
                            let slot = &slots[si];
                            for &o in &slot.views[a as usize].live {
                                push(slot.options[o as usize].1, &mut stack);
                            }
                        }
                    }
                }
            }
        }
    }
    CheckResult::Unknown
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Elimination {
    /// Surviving complete strategies, in tree order.
    pub candidates: Vec<Strategy>,
    pub checks_run: usize,
    pub pruned_subtrees: usize,
    pub pruned_leaves: u128,
}

/// Walks the strategy tree depth-first, dropping every subtree whose root
/// is provably unsafe; leaves that survive are the candidates. Every safe
/// strategy survives. Leaves themselves are not checked here since each
/// candidate gets an exact safety check when evaluated.
pub fn strategy_elimination(g: &GameGraph, prune: bool) -> Elimination {
    let tree = complete_tree(g);
    let mut out = Elimination::default();
    let mut stack = vec![tree.root()];
    while let Some(node) = stack.pop() {
        if tree.is_leaf(&node) {
            out.candidates.push(tree.complete(&node));
            continue;
        }
        if prune {
            out.checks_run += 1;
            if partial_check(g, &node.strategy) == CheckResult::ProvablyUnsafe {
                out.pruned_subtrees += 1;
                out.pruned_leaves = out.pruned_leaves.saturating_add(tree.leaves_below(&node));
                continue;
            }
        }
        let mut children = tree.children(&node);
        children.reverse();
        stack.extend(children);
    }
    out
}

/// Lock-order diagnostic: threads that, using only decided actions, can
/// acquire locks in orders forming a cycle. This is reported, never used to
/// prune, since other synchronization can make such orders harmless.
pub fn lock_order_warnings(
    p: &PartialProgram,
    g: &GameGraph,
    strategy: &[Option<u32>],
) -> Vec<String> {
    let Ok(cp) = CompiledProgram::new(p) else {
        return Vec::new();
    };
    let mut order: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (ti, thread) in cp.threads.iter().enumerate() {
        let obs_at = |loc: usize| {
            g.observations
                .iter()
                .position(|o| o.thread == ti && o.location == loc)
                .map(|o| o as ObsId)
        };
        let mut seen: BTreeSet<(usize, u64)> = BTreeSet::new();
        let mut stack = vec![(thread.initial, 0u64)];
        while let Some((loc, held)) = stack.pop() {
            if !seen.insert((loc, held)) {
                continue;
            }
            let Some(obs) = obs_at(loc) else { continue };
            let Some(a) = g.resolved(obs, strategy) else {
                continue;
            };
            for &tr in &g.observations[obs as usize].actions[a as usize].transitions {
                let ct = &thread.transitions[tr];
                let mut h = held;
                for &(lock, v) in &ct.lock_writes {
                    if v == 1 {
                        for prev in 0..cp.layout.locks.len() {
                            if h & (1 << prev) != 0 && prev != lock {
                                order.entry((prev, lock)).or_insert(ti);
                            }
                        }
                        h |= 1 << lock;
                    } else {
                        h &= !(1 << lock);
                    }
                }
                stack.push((ct.to, h));
            }
        }
    }
    let mut out = Vec::new();
    for (&(a, b), &t1) in &order {
        if a < b {
            if let Some(&t2) = order.get(&(b, a)) {
                if t1 != t2 {
                    let name = |l: usize| cp.layout.slots[cp.layout.locks[l]].name.clone();
                    out.push(format!(
                        "threads {} and {} acquire {} and {} in opposite orders",
                        cp.threads[t1].name,
                        cp.threads[t2].name,
                        name(a),
                        name(b)
                    ));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests;
