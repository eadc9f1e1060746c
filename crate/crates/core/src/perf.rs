//! Performance automata (deterministic weighted automata over cost symbols)
//! and finite-memory schedulers.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::num::Q;

/// The symbol for "none of the tracked actions occurred".
pub const BOT: &str = "bot";
/// Symbol charged before a thread move when the scheduled thread differs
/// from the previously running one.
pub const CONTEXT_SWITCH: &str = "cs";

pub type SymId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PerfError {
    #[error("unknown automaton state `{0}`")]
    UnknownState(String),
    #[error("two edges from state `{state}` on symbol `{symbol}`")]
    Nondeterministic { state: String, symbol: String },
    #[error("negative cost on edge from `{state}` on `{symbol}`")]
    NegativeCost { state: String, symbol: String },
    #[error("state `{state}` has no edge on symbol `{symbol}`")]
    MissingEdge { state: String, symbol: String },
    #[error("symbol `{0}` is not in the automaton's alphabet")]
    UnknownSymbol(String),
}

/// Deterministic weighted automaton. Missing ⊥ edges default to a zero-cost
/// self-loop; every other symbol must be defined in every state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerformanceAutomaton {
    states: Vec<String>,
    initial: usize,
    symbols: Vec<String>,
    delta: Vec<Vec<Option<(usize, Q)>>>,
}

impl PerformanceAutomaton {
    pub fn new(states: Vec<String>, initial: usize) -> Self {
        let n = states.len();
        PerformanceAutomaton {
            states,
            initial,
            symbols: vec![BOT.to_string()],
            delta: vec![vec![None]; n],
        }
    }

    /// One state, no costed symbols.
    pub fn trivial() -> Self {
        Self::new(vec!["q0".to_string()], 0)
    }

    /// One state with a costed self-loop per `(symbol, cost)`.
    pub fn single_state(costs: &[(&str, Q)]) -> Self {
        let mut a = Self::trivial();
        for (s, c) in costs {
            a.add_edge_by_index(0, s, 0, c.clone())
                .expect("fresh symbols");
        }
        a
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn add_edge(
        &mut self,
        from: &str,
        symbol: &str,
        to: &str,
        cost: Q,
    ) -> Result<(), PerfError> {
        let f = self
            .state_index(from)
            .ok_or_else(|| PerfError::UnknownState(from.into()))?;
        let t = self
            .state_index(to)
            .ok_or_else(|| PerfError::UnknownState(to.into()))?;
        self.add_edge_by_index(f, symbol, t, cost)
    }

    pub fn add_edge_by_index(
        &mut self,
        from: usize,
        symbol: &str,
        to: usize,
        cost: Q,
    ) -> Result<(), PerfError> {
        if cost.is_negative() {
            return Err(PerfError::NegativeCost {
                state: self.states[from].clone(),
                symbol: symbol.into(),
            });
        }
        let sym = match self.symbol(symbol) {
            Some(s) => s,
            None => {
                self.symbols.push(symbol.to_string());
                for row in &mut self.delta {
                    row.push(None);
                }
                self.symbols.len() - 1
            }
        };
        let slot = &mut self.delta[from][sym];
        if slot.is_some() {
            return Err(PerfError::Nondeterministic {
                state: self.states[from].clone(),
                symbol: symbol.into(),
            });
        }
        *slot = Some((to, cost));
        Ok(())
    }

    /// Checks totality on every non-⊥ symbol.
    pub fn check_total(&self) -> Result<(), PerfError> {
        for (q, row) in self.delta.iter().enumerate() {
            for (s, edge) in row.iter().enumerate().skip(1) {
                if edge.is_none() {
                    return Err(PerfError::MissingEdge {
                        state: self.states[q].clone(),
                        symbol: self.symbols[s].clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn symbol(&self, name: &str) -> Option<SymId> {
        self.symbols.iter().position(|s| s == name)
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    /// Successor state and cost of reading `sym` in state `q`.
    pub fn step(&self, q: usize, sym: SymId) -> Result<(usize, Q), PerfError> {
        match &self.delta[q][sym] {
            Some((t, c)) => Ok((*t, c.clone())),
            None if sym == 0 => Ok((q, Q::zero())),
            None => Err(PerfError::MissingEdge {
                state: self.states[q].clone(),
                symbol: self.symbols[sym].clone(),
            }),
        }
    }

    /// Same as [`step`](Self::step) but by symbol name.
    pub fn step_perf(&self, q: usize, sym: &str) -> Result<(usize, Q), PerfError> {
        let s = self
            .symbol(sym)
            .ok_or_else(|| PerfError::UnknownSymbol(sym.into()))?;
        self.step(q, s)
    }

    /// Explicit edges `(from, symbol, to, cost)`, state-major.
    pub fn edges(&self) -> Vec<(usize, SymId, usize, Q)> {
        let mut out = Vec::new();
        for (q, row) in self.delta.iter().enumerate() {
            for (s, e) in row.iter().enumerate() {
                if let Some((t, c)) = e {
                    out.push((q, s, *t, c.clone()));
                }
            }
        }
        out
    }

    /// Synchronous product: a symbol moves every component whose alphabet
    /// contains it (others stay put), and the costs add up.
    pub fn product(parts: &[PerformanceAutomaton]) -> Result<Self, PerfError> {
        let mut symbols: Vec<String> = vec![BOT.to_string()];
        for p in parts {
            for s in &p.symbols[1..] {
                if !symbols.contains(s) {
                    symbols.push(s.clone());
                }
            }
        }
        let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut tuples: Vec<Vec<usize>> = Vec::new();
        let start: Vec<usize> = parts.iter().map(|p| p.initial).collect();
        index.insert(start.clone(), 0);
        tuples.push(start);
        let mut edges = Vec::new();
        let mut i = 0;
        while i < tuples.len() {
            let cur = tuples[i].clone();
            for (si, s) in symbols.iter().enumerate() {
                let mut next = cur.clone();
                let mut cost = Q::zero();
                let mut moved = false;
                for (k, p) in parts.iter().enumerate() {
                    if let Some(ps) = p.symbol(s) {
                        if si == 0 && p.delta[cur[k]][ps].is_none() {
                            continue;
                        }
                        let (t, c) = p.step(cur[k], ps)?;
                        next[k] = t;
                        cost += c;
                        moved = true;
                    }
                }
                if si == 0 && !moved {
                    continue;
                }
                let target = match index.get(&next) {
                    Some(&t) => t,
                    None => {
                        index.insert(next.clone(), tuples.len());
                        tuples.push(next);
                        tuples.len() - 1
                    }
                };
                edges.push((i, s.clone(), target, cost));
            }
            i += 1;
        }
        let names = tuples
            .iter()
            .map(|t| {
                let parts: Vec<&str> = t
                    .iter()
                    .zip(parts)
                    .map(|(&q, p)| p.states[q].as_str())
                    .collect();
                parts.join("_")
            })
            .collect();
        let mut out = PerformanceAutomaton::new(names, 0);
        for s in &symbols[1..] {
            if out.symbol(s).is_none() {
                out.symbols.push(s.clone());
                for row in &mut out.delta {
                    row.push(None);
                }
            }
        }
        for (f, s, t, c) in edges {
            out.add_edge_by_index(f, &s, t, c)?;
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchedulerMode {
    Nondeterministic,
    Probabilistic,
}

/// What a scheduler does in one memory state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Policy {
    Nondet,
    /// Strictly positive weight per thread, summing to 1.
    Weights(Vec<Q>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SchedError {
    #[error("scheduler mixes nondeterministic and probabilistic memory states")]
    MixedModes,
    #[error("weights in memory state `{0}` do not sum to 1")]
    NotADistribution(String),
    #[error("weights in memory state `{0}` must be positive for every thread")]
    NonPositiveWeight(String),
    #[error("memory state `{0}` does not list every thread")]
    WrongArity(String),
    #[error("no memory states")]
    Empty,
    #[error("no active thread to schedule")]
    NoActiveThread,
}

/// Finite-memory scheduler over `n_threads` threads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scheduler {
    memory: Vec<String>,
    initial: usize,
    policies: Vec<Policy>,
    next: Vec<Vec<usize>>,
    n_threads: usize,
    mode: SchedulerMode,
}

/// Outcome of restricting a scheduler's choice to the active threads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pick {
    Choice(Vec<usize>),
    Dist(Vec<(usize, Q)>),
}

impl Scheduler {
    pub fn new(
        memory: Vec<String>,
        initial: usize,
        policies: Vec<Policy>,
        next: Vec<Vec<usize>>,
        n_threads: usize,
    ) -> Result<Self, SchedError> {
        if memory.is_empty() || policies.len() != memory.len() || next.len() != memory.len() {
            return Err(SchedError::Empty);
        }
        let nondet = policies
            .iter()
            .filter(|p| matches!(p, Policy::Nondet))
            .count();
        let mode = if nondet == policies.len() {
            SchedulerMode::Nondeterministic
        } else if nondet == 0 {
            SchedulerMode::Probabilistic
        } else {
            return Err(SchedError::MixedModes);
        };
        for (m, p) in policies.iter().enumerate() {
            if next[m].len() != n_threads {
                return Err(SchedError::WrongArity(memory[m].clone()));
            }
            if let Policy::Weights(w) = p {
                if w.len() != n_threads {
                    return Err(SchedError::WrongArity(memory[m].clone()));
                }
                if w.iter().any(|x| !x.is_positive()) {
                    return Err(SchedError::NonPositiveWeight(memory[m].clone()));
                }
                let total: Q = w.iter().cloned().sum();
                if !total.is_one() {
                    return Err(SchedError::NotADistribution(memory[m].clone()));
                }
            }
        }
        Ok(Scheduler {
            memory,
            initial,
            policies,
            next,
            n_threads,
            mode,
        })
    }

    /// One memory state, each thread with probability `1/n`.
    pub fn uniform(n_threads: usize) -> Self {
        let w = Q::new(1.into(), (n_threads as i64).into());
        Self::new(
            vec!["m0".into()],
            0,
            vec![Policy::Weights(vec![w; n_threads])],
            vec![vec![0; n_threads]],
            n_threads,
        )
        .expect("uniform scheduler is well formed")
    }

    /// Time slicing: the thread that ran last runs again with probability
    /// `1 - switch`, the others share `switch` equally. Memory is the last
    /// thread run.
    pub fn time_slice(n_threads: usize, switch: Q) -> Result<Self, SchedError> {
        if n_threads < 2 {
            return Ok(Self::uniform(n_threads.max(1)));
        }
        let other = &switch / crate::num::q(n_threads as i64 - 1);
        let stay = Q::one() - &switch;
        let memory = (0..n_threads).map(|t| format!("last{t}")).collect();
        let policies = (0..n_threads)
            .map(|m| {
                Policy::Weights(
                    (0..n_threads)
                        .map(|t| if t == m { stay.clone() } else { other.clone() })
                        .collect(),
                )
            })
            .collect();
        let next = (0..n_threads).map(|_| (0..n_threads).collect()).collect();
        Self::new(memory, 0, policies, next, n_threads)
    }

    /// One memory state, any active thread may be picked.
    pub fn nondeterministic(n_threads: usize) -> Self {
        Self::new(
            vec!["m0".into()],
            0,
            vec![Policy::Nondet],
            vec![vec![0; n_threads]],
            n_threads,
        )
        .expect("nondeterministic scheduler is well formed")
    }

    pub fn mode(&self) -> SchedulerMode {
        self.mode
    }

    pub fn n_threads(&self) -> usize {
        self.n_threads
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn memory(&self) -> &[String] {
        &self.memory
    }

    pub fn policy(&self, mem: usize) -> &Policy {
        &self.policies[mem]
    }

    pub fn next(&self, mem: usize, thread: usize) -> usize {
        self.next[mem][thread]
    }

    pub fn weight(&self, mem: usize, thread: usize) -> Option<&Q> {
        match &self.policies[mem] {
            Policy::Weights(w) => Some(&w[thread]),
            Policy::Nondet => None,
        }
    }

    /// The scheduler's choice in memory state `mem` among `active` threads:
    /// renormalized weights, or the active set itself when nondeterministic.
    pub fn restrict_active(&self, mem: usize, active: &[usize]) -> Result<Pick, SchedError> {
        if active.is_empty() {
            return Err(SchedError::NoActiveThread);
        }
        match &self.policies[mem] {
            Policy::Nondet => Ok(Pick::Choice(active.to_vec())),
            Policy::Weights(w) => {
                let total: Q = active.iter().map(|&t| w[t].clone()).sum();
                Ok(Pick::Dist(
                    active.iter().map(|&t| (t, &w[t] / &total)).collect(),
                ))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{q, ratio};

    fn fig2() -> PerformanceAutomaton {
        PerformanceAutomaton::single_state(&[("l", q(3)), ("cs", q(5)), ("m", q(2))])
    }

    #[test]
    fn costed_loops() {
        let a = fig2();
        assert_eq!(a.step_perf(0, "l"), Ok((0, q(3))));
        assert_eq!(a.step_perf(0, BOT), Ok((0, q(0))));
        assert_eq!(a.edges().len(), 3);
        assert_eq!(a.check_total(), Ok(()));
    }

    #[test]
    fn nondeterministic_edge_rejected() {
        let mut a = PerformanceAutomaton::trivial();
        a.add_edge("q0", "l", "q0", q(1)).unwrap();
        assert!(matches!(
            a.add_edge("q0", "l", "q0", q(2)),
            Err(PerfError::Nondeterministic { .. })
        ));
    }

    #[test]
    fn missing_edge_detected() {
        let mut a = PerformanceAutomaton::new(vec!["a".into(), "b".into()], 0);
        a.add_edge("a", "l", "b", q(1)).unwrap();
        assert!(matches!(
            a.check_total(),
            Err(PerfError::MissingEdge { .. })
        ));
    }

    #[test]
    fn cache_line_costs_differ() {
        let mut a = PerformanceAutomaton::new(vec!["unc".into(), "cached".into()], 0);
        for s in ["unc", "cached"] {
            let cost = if s == "unc" { q(10) } else { q(1) };
            a.add_edge(s, "read", "cached", cost).unwrap();
            a.add_edge(s, "evict", "unc", q(0)).unwrap();
        }
        let (s1, c1) = a.step_perf(0, "read").unwrap();
        let (_, c2) = a.step_perf(s1, "read").unwrap();
        assert!(c2 < c1);
    }

    #[test]
    fn product_of_two_lines() {
        let line = |i: usize| {
            let mut a = PerformanceAutomaton::new(vec!["u".into(), "c".into()], 0);
            let r = alloc::format!("read{i}");
            for s in ["u", "c"] {
                a.add_edge(s, &r, "c", if s == "u" { q(4) } else { q(1) })
                    .unwrap();
                a.add_edge(s, "cs", "u", q(0)).unwrap();
            }
            a
        };
        let p = PerformanceAutomaton::product(&[line(0), line(1)]).unwrap();
        assert_eq!(p.states().len(), 4);
        assert_eq!(p.check_total(), Ok(()));
        let (s, c) = p.step_perf(0, "read1").unwrap();
        assert_eq!(c, q(4));
        assert_eq!(p.step_perf(s, "read1").unwrap().1, q(1));
        assert_eq!(p.step_perf(s, "cs").unwrap().0, 0);
    }

    #[test]
    fn renormalization() {
        let u = Scheduler::uniform(2);
        assert_eq!(u.restrict_active(0, &[0]), Ok(Pick::Dist(vec![(0, q(1))])));
        let s = Scheduler::new(
            vec!["m".into()],
            0,
            vec![Policy::Weights(vec![ratio(1, 3), ratio(2, 3)])],
            vec![vec![0, 0]],
            2,
        )
        .unwrap();
        assert_eq!(
            s.restrict_active(0, &[0, 1]),
            Ok(Pick::Dist(vec![(0, ratio(1, 3)), (1, ratio(2, 3))]))
        );
        let n = Scheduler::nondeterministic(2);
        assert_eq!(n.restrict_active(0, &[0, 1]), Ok(Pick::Choice(vec![0, 1])));
        assert_eq!(n.restrict_active(0, &[]), Err(SchedError::NoActiveThread));
    }

    #[test]
    fn weights_must_sum_to_one() {
        let s = Scheduler::new(
            vec!["m".into()],
            0,
            vec![Policy::Weights(vec![ratio(1, 2), ratio(1, 3)])],
            vec![vec![0, 0]],
            2,
        );
        assert!(matches!(s, Err(SchedError::NotADistribution(_))));
    }
}
