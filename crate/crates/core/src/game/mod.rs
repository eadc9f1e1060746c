//! The program resolution game: an imperfect-information game whose
//! resolver player sees only the scheduled thread and its location, while
//! the environment picks inputs (and, without a probabilistic scheduler,
//! the thread to run).
//!
//! Which threads are active, racing or deadlocked depends on which action
//! the resolver uses at each thread's current location, so environment
//! states keep per-action views and safety verdicts are computed against a
//! (possibly partial) strategy.

mod build;
mod dot;
mod fix;

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::model::{Diagnostic, Layout};
use crate::num::Q;
use crate::perf::{PerfError, SchedulerMode};
use crate::solve::Branch;

pub use build::{build_game, BuildOptions, DEFAULT_STATE_CAP};
pub use fix::{fix_strategy, FixedGame, BAD_LABEL, RESTART_LABEL};

pub type StateId = u32;
pub type ObsId = u32;

/// Which safety conditions make a state bad.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Checks {
    pub race: bool,
    pub deadlock: bool,
}

impl Checks {
    pub const NONE: Checks = Checks {
        race: false,
        deadlock: false,
    };
    pub const ALL: Checks = Checks {
        race: true,
        deadlock: true,
    };
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionInfo {
    pub name: String,
    /// Indices into the thread's transition list (empty for synthetic games).
    pub transitions: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationInfo {
    pub name: String,
    pub thread: usize,
    pub location: usize,
    pub actions: Vec<ActionInfo>,
    /// Breadth-first depth of the first resolver state with this observation.
    pub depth: Option<u32>,
}

impl ObservationInfo {
    pub fn is_choice(&self) -> bool {
        self.actions.len() > 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Move {
    pub target: StateId,
    pub weight: Q,
}

/// A state where a thread is scheduled; one entry per action of its
/// observation, `None` when that action has no enabled transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreadNode {
    pub obs: ObsId,
    pub moves: Vec<Option<Move>>,
}

/// What one thread looks like from an environment state, assuming the
/// resolver uses a given action at its location.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionView {
    /// Positions in `ThreadSlot::options` whose input enables the action.
    pub live: Vec<u32>,
    /// Non-lock globals read and written by the enabled transitions.
    pub reads: u64,
    pub writes: u64,
    /// When no input enables the action: the thread holding a lock it waits on.
    pub waits_for: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreadSlot {
    pub thread: u32,
    /// `None` when the thread's location has no outgoing transitions.
    pub obs: Option<ObsId>,
    /// (input valuation index, resolver state) for every input that is
    /// live under at least one action.
    pub options: Vec<(u32, StateId)>,
    /// Scheduler weight under a probabilistic scheduler.
    pub weight: Option<Q>,
    pub views: Vec<ActionView>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EnvChoice {
    /// Fixed actions with explicit distributions.
    Explicit(Vec<Vec<Branch>>),
    /// Scheduling among threads, resolved against the strategy.
    Schedule {
        slots: Vec<ThreadSlot>,
        terminal: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvNode {
    /// Bad regardless of the strategy.
    pub bad: bool,
    pub choice: EnvChoice,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GameNode {
    Thread(ThreadNode),
    Env(EnvNode),
}

/// Packed program state behind each game state, used by abstractions and
/// for display. Key layout: `[scheduled thread or -1, scheduler memory,
/// automaton state, last thread run or -1, locations.., lock holders..,
/// variable slots..]`.
#[derive(Clone, Debug)]
pub struct ProgramInfo {
    pub layout: Layout,
    pub n_threads: usize,
    pub n_locks: usize,
    pub location_names: Vec<Vec<String>>,
    pub keys: Vec<alloc::boxed::Box<[i32]>>,
}

impl ProgramInfo {
    pub const HEADER: usize = 4;

    pub fn slot_offset(&self) -> usize {
        Self::HEADER + self.n_threads + self.n_locks
    }

    pub fn describe(&self, s: StateId) -> String {
        use core::fmt::Write;
        let k = &self.keys[s as usize];
        let mut out = String::new();
        if k[0] >= 0 {
            let _ = write!(out, "run t{} ", k[0]);
        }
        for t in 0..self.n_threads {
            let loc = k[Self::HEADER + t] as usize;
            let _ = write!(out, "{} ", self.location_names[t][loc]);
        }
        let off = self.slot_offset();
        for (i, slot) in self.layout.slots.iter().enumerate() {
            let _ = write!(out, "{}={} ", slot.name, k[off + i]);
        }
        let _ = write!(out, "w{}", k[2]);
        out
    }
}

#[derive(Clone, Debug)]
pub struct GameGraph {
    pub mode: SchedulerMode,
    pub initial: StateId,
    pub nodes: Vec<GameNode>,
    pub observations: Vec<ObservationInfo>,
    pub thread_names: Vec<String>,
    pub checks: Checks,
    pub program: Option<ProgramInfo>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("invalid program: {}", .0.iter().map(|d| alloc::format!("{d}")).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Perf(#[from] PerfError),
    #[error("thread `{thread}` uses symbol `{symbol}` unknown to the performance automaton")]
    UnknownSymbol { thread: String, symbol: String },
    #[error("scheduler is for {expected} threads but the program has {found}")]
    ThreadCount { expected: usize, found: usize },
    #[error("state space exceeds the cap of {0} states")]
    StateCap(usize),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("domain of `{0}` does not fit in 32 bits")]
    DomainTooWide(String),
}

/// Outcome of looking at an environment state under a (partial) strategy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub bad: bool,
    /// (slot index, action) of threads known to be schedulable.
    pub active: Vec<(usize, u32)>,
    /// No thread can run and every thread's action is known.
    pub stuck: bool,
}

impl GameGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_resolver_states(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, GameNode::Thread(_)))
            .count()
    }

    /// Observations where the resolver actually has a choice, in the order
    /// used to build strategy trees: first discovery depth, thread, location.
    /// Observations never reached are left out.
    pub fn choice_order(&self) -> Vec<ObsId> {
        let mut v: Vec<ObsId> = (0..self.observations.len() as ObsId)
            .filter(|&o| {
                let info = &self.observations[o as usize];
                info.is_choice() && info.depth.is_some()
            })
            .collect();
        v.sort_by_key(|&o| {
            let info = &self.observations[o as usize];
            (info.depth, info.thread, info.location, o)
        });
        v
    }

    /// The action used at `obs`, if known: observations without a choice
    /// always use their single action.
    pub fn resolved(&self, obs: ObsId, strategy: &[Option<u32>]) -> Option<u32> {
        if self.observations[obs as usize].is_choice() {
            strategy[obs as usize]
        } else {
            Some(0)
        }
    }

    /// Safety verdict for the environment state with the given slots. A
    /// state is only declared bad when the witnessing threads' actions are
    /// all known, so the verdict holds for every extension of `strategy`.
    pub fn verdict(&self, slots: &[ThreadSlot], strategy: &[Option<u32>]) -> Verdict {
        let mut active = Vec::new();
        let mut all_known = true;
        let mut waits: Vec<Option<u32>> = alloc::vec![None; slots.len()];
        for (i, slot) in slots.iter().enumerate() {
            let Some(obs) = slot.obs else { continue };
            match self.resolved(obs, strategy) {
                None => all_known = false,
                Some(a) => {
                    let view = &slot.views[a as usize];
                    if view.live.is_empty() {
                        waits[i] = view.waits_for;
                    } else {
                        active.push((i, a));
                    }
                }
            }
        }
        let mut bad = false;
        if self.checks.race {
            'outer: for (x, &(i, a)) in active.iter().enumerate() {
                let vi = &slots[i].views[a as usize];
                for &(j, b) in &active[x + 1..] {
                    let vj = &slots[j].views[b as usize];
                    if (vi.writes & (vj.reads | vj.writes)) | (vj.writes & vi.reads) != 0 {
                        bad = true;
                        break 'outer;
                    }
                }
            }
        }
        let stuck = active.is_empty() && all_known;
        if self.checks.deadlock && !bad {
            if stuck && slots.iter().any(|s| s.obs.is_some()) {
                bad = true;
            } else {
                bad = waits_cycle(slots, &waits);
            }
        }
        Verdict { bad, active, stuck }
    }
}

/// Whether the waits-for edges (thread → holder of the lock it waits on)
/// contain a cycle.
fn waits_cycle(slots: &[ThreadSlot], waits: &[Option<u32>]) -> bool {
    let slot_of = |thread: u32| slots.iter().position(|s| s.thread == thread);
    for start in 0..slots.len() {
        let mut cur = start;
        for _ in 0..slots.len() {
            match waits[cur].and_then(slot_of) {
                Some(next) if next == start => return true,
                Some(next) => cur = next,
                None => break,
            }
        }
    }
    false
}

/// Records the safety conditions that make states bad.
pub fn label_safety(mut g: GameGraph, checks: Checks) -> GameGraph {
    g.checks = checks;
    g
}

#[cfg(test)]
mod tests;
