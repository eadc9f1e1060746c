//! Explicit breadth-first construction of the resolution game.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use num_traits::Zero;

use super::{
    ActionInfo, ActionView, Checks, EnvChoice, EnvNode, GameError, GameGraph, GameNode, Move,
    ObsId, ObservationInfo, ProgramInfo, StateId, ThreadNode, ThreadSlot,
};
use crate::model::{choice_locations, CompiledProgram, Guard, PartialProgram, Rel, Term, Value};
use crate::num::Q;
use crate::perf::{PerformanceAutomaton, Scheduler, SymId, CONTEXT_SWITCH};
use crate::strategy::enumerate_actions;

pub const DEFAULT_STATE_CAP: usize = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub state_cap: usize,
    /// Offer every guard-disjoint subset as an action, not only maximal ones.
    pub all_subsets: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            state_cap: DEFAULT_STATE_CAP,
            all_subsets: false,
        }
    }
}

const H: usize = ProgramInfo::HEADER;

struct Builder<'a> {
    cp: CompiledProgram,
    sched: &'a Scheduler,
    perf: &'a PerformanceAutomaton,
    n_threads: usize,
    n_locks: usize,
    slot_off: usize,
    obs_of: Vec<Vec<Option<ObsId>>>,
    observations: Vec<ObservationInfo>,
    symbols: Vec<Vec<SymId>>,
    cs: Option<SymId>,
    race_mask: u64,
    /// Per thread, per transition: lock indices tested by a conjunct `g == 0`.
    lock_waits: Vec<Vec<Vec<usize>>>,
    inputs: Vec<Vec<Vec<Value>>>,
    keys: Vec<Box<[i32]>>,
    index: HashMap<Box<[i32]>, StateId>,
    depth: Vec<u32>,
    cap: usize,
}

impl Builder<'_> {
    fn intern(&mut self, key: Vec<i32>, depth: u32) -> Result<StateId, GameError> {
        if let Some(&id) = self.index.get(key.as_slice()) {
            return Ok(id);
        }
        if self.keys.len() >= self.cap {
            return Err(GameError::StateCap(self.cap));
        }
        let id = self.keys.len() as StateId;
        let key: Box<[i32]> = key.into_boxed_slice();
        self.index.insert(key.clone(), id);
        self.keys.push(key);
        self.depth.push(depth);
        Ok(id)
    }

    fn slots_of(&self, key: &[i32]) -> Vec<Value> {
        key[self.slot_off..].iter().map(|&v| v as Value).collect()
    }

    fn is_terminal(&self, key: &[i32]) -> bool {
        (0..self.n_threads).all(|t| self.obs_of[t][key[H + t] as usize].is_none())
    }

    fn guard(&self, g: &Guard<usize>, vals: &[Value]) -> Result<bool, GameError> {
        g.eval(vals).map_err(|e| GameError::Eval(format!("{e}")))
    }

    fn set_inputs(&self, t: usize, i: usize, vals: &mut [Value]) {
        for (slot, v) in self.cp.threads[t]
            .input_slots
            .iter()
            .zip(&self.inputs[t][i])
        {
            vals[*slot] = *v;
        }
    }

    fn env_node(&mut self, s: StateId) -> Result<GameNode, GameError> {
        let key = self.keys[s as usize].clone();
        let mem = key[1] as usize;
        let base = self.slots_of(&key);
        let mut slots = Vec::with_capacity(self.n_threads);
        for t in 0..self.n_threads {
            let loc = key[H + t] as usize;
            let weight = self.sched.weight(mem, t).cloned();
            let Some(obs) = self.obs_of[t][loc] else {
                slots.push(ThreadSlot {
                    thread: t as u32,
                    obs: None,
                    options: Vec::new(),
                    weight,
                    views: Vec::new(),
                });
                continue;
            };
            let n_inputs = self.inputs[t].len();
            let actions: Vec<Vec<usize>> = self.observations[obs as usize]
                .actions
                .iter()
                .map(|a| a.transitions.clone())
                .collect();
            // chosen[a][i]: the transition of action `a` enabled under input `i`.
            let mut chosen: Vec<Vec<Option<usize>>> = vec![vec![None; n_inputs]; actions.len()];
            let mut vals = base.clone();
            for i in 0..n_inputs {
                self.set_inputs(t, i, &mut vals);
                for (a, trs) in actions.iter().enumerate() {
                    for &tr in trs {
                        if self.guard(&self.cp.threads[t].transitions[tr].guard, &vals)? {
                            chosen[a][i] = Some(tr);
                            break;
                        }
                    }
                }
            }
            let mut options = Vec::new();
            let mut option_pos = vec![u32::MAX; n_inputs];
            for i in 0..n_inputs {
                if chosen.iter().any(|row| row[i].is_some()) {
                    let mut k = key.to_vec();
                    k[0] = t as i32;
                    k[1] = self.sched.next(mem, t) as i32;
                    for (slot, v) in self.cp.threads[t]
                        .input_slots
                        .iter()
                        .zip(&self.inputs[t][i])
                    {
                        k[self.slot_off + slot] = *v as i32;
                    }
                    let id = self.intern(k, self.depth[s as usize] + 1)?;
                    option_pos[i] = options.len() as u32;
                    options.push((i as u32, id));
                }
            }
            let mut views = Vec::with_capacity(actions.len());
            for (a, row) in chosen.iter().enumerate() {
                let mut live = Vec::new();
                let (mut reads, mut writes) = (0u64, 0u64);
                for (i, c) in row.iter().enumerate() {
                    if let Some(tr) = c {
                        live.push(option_pos[i]);
                        let ct = &self.cp.threads[t].transitions[*tr];
                        reads |= ct.reads & self.race_mask;
                        writes |= ct.writes & self.race_mask;
                    }
                }
                let waits_for = if live.is_empty() {
                    self.waits_for(t, &actions[a], &key, &base)?
                } else {
                    None
                };
                views.push(ActionView {
                    live,
                    reads,
                    writes,
                    waits_for,
                });
            }
            slots.push(ThreadSlot {
                thread: t as u32,
                obs: Some(obs),
                options,
                weight,
                views,
            });
        }
        let terminal = self.is_terminal(&key);
        Ok(GameNode::Env(EnvNode {
            bad: false,
            choice: EnvChoice::Schedule { slots, terminal },
        }))
    }

    /// The holder of a lock that blocks a disabled action: some transition
    /// tests `g == 0` on a lock held by another thread and would be enabled,
    /// for some input, if the lock were released.
    fn waits_for(
        &self,
        t: usize,
        action: &[usize],
        key: &[i32],
        base: &[Value],
    ) -> Result<Option<u32>, GameError> {
        let holders = &key[H + self.n_threads..H + self.n_threads + self.n_locks];
        for &tr in action {
            for &g in &self.lock_waits[t][tr] {
                let slot = self.cp.layout.locks[g];
                let holder = holders[g];
                if base[slot] != 1 || holder < 0 || holder as usize == t {
                    continue;
                }
                let mut vals = base.to_vec();
                vals[slot] = 0;
                for i in 0..self.inputs[t].len() {
                    self.set_inputs(t, i, &mut vals);
                    if self.guard(&self.cp.threads[t].transitions[tr].guard, &vals)? {
                        return Ok(Some(holder as u32));
                    }
                }
            }
        }
        Ok(None)
    }

    fn thread_node(&mut self, s: StateId) -> Result<GameNode, GameError> {
        let key = self.keys[s as usize].clone();
        let t = key[0] as usize;
        let loc = key[H + t] as usize;
        let obs = self.obs_of[t][loc].expect("scheduled threads have an observation");
        let depth = self.depth[s as usize];
        {
            let info = &mut self.observations[obs as usize];
            info.depth = Some(info.depth.map_or(depth, |d| d.min(depth)));
        }
        let vals = self.slots_of(&key);
        let n_actions = self.observations[obs as usize].actions.len();
        let mut moves = Vec::with_capacity(n_actions);
        for a in 0..n_actions {
            let mut taken = None;
            for &tr in &self.observations[obs as usize].actions[a].transitions {
                if self.guard(&self.cp.threads[t].transitions[tr].guard, &vals)? {
                    taken = Some(tr);
                    break;
                }
            }
            let Some(tr) = taken else {
                moves.push(None);
                continue;
            };
            moves.push(Some(self.step(s, &key, &vals, t, tr)?));
        }
        Ok(GameNode::Thread(ThreadNode { obs, moves }))
    }

    fn step(
        &mut self,
        s: StateId,
        key: &[i32],
        vals: &[Value],
        t: usize,
        tr: usize,
    ) -> Result<Move, GameError> {
        let ct = &self.cp.threads[t].transitions[tr];
        let written = ct
            .op
            .evaluate(vals)
            .map_err(|e| GameError::Eval(format!("{e}")))?;
        let mut k = key.to_vec();
        for (asg, v) in ct.op.assigns.iter().zip(&written) {
            let dom = self.cp.layout.slots[asg.target].domain;
            if !dom.contains(*v) {
                return Err(GameError::Eval(format!(
                    "`{}` := {v} leaves [{}, {}]",
                    self.cp.layout.slots[asg.target].name, dom.lo, dom.hi
                )));
            }
            k[self.slot_off + asg.target] = *v as i32;
        }
        for &slot in &self.cp.threads[t].input_slots {
            k[self.slot_off + slot] = self.cp.layout.slots[slot].domain.lo as i32;
        }
        for &(g, c) in &ct.lock_writes {
            k[H + self.n_threads + g] = if c == 1 { t as i32 } else { -1 };
        }
        k[H + t] = ct.to as i32;
        let mut q = key[2] as usize;
        let mut weight = Q::zero();
        if let Some(cs) = self.cs {
            if key[3] >= 0 && key[3] as usize != t {
                let (q2, c) = self.perf.step(q, cs)?;
                q = q2;
                weight += c;
            }
            k[3] = t as i32;
        }
        let (q2, c) = self.perf.step(q, self.symbols[t][tr])?;
        weight += c;
        k[2] = q2 as i32;
        k[0] = -1;
        let target = if self.is_terminal(&k) {
            0
        } else {
            self.intern(k, self.depth[s as usize] + 1)?
        };
        Ok(Move { target, weight })
    }
}

/// Locks `g` tested by a top-level conjunct `g == 0` (either side).
fn lock_zero_tests(g: &Guard<usize>, locks: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    for c in g.conjuncts() {
        if let Guard::Cmp(Rel::Eq, a, b) = c {
            let slot = match (a, b) {
                (Term::Var(v), Term::Const(0)) | (Term::Const(0), Term::Var(v)) => Some(*v),
                _ => None,
            };
            if let Some(li) = slot.and_then(|v| locks.iter().position(|&l| l == v)) {
                if !out.contains(&li) {
                    out.push(li);
                }
            }
        }
    }
    out
}

/// Builds the resolution game of a partial program composed with a
/// scheduler and a performance automaton, exploring breadth-first from the
/// initial state. Environment moves cost nothing; a thread move costs the
/// automaton's charge for its symbol, preceded by the context-switch charge
/// when the automaton knows `cs` and a different thread ran last. Moves
/// into a state where every thread has finished lead back to the initial
/// state with their weight unchanged.
pub fn build_game(
    p: &PartialProgram,
    sched: &Scheduler,
    perf: &PerformanceAutomaton,
    opts: &BuildOptions,
) -> Result<GameGraph, GameError> {
    let cp = CompiledProgram::new(p).map_err(GameError::Invalid)?;
    let n_threads = cp.threads.len();
    if sched.n_threads() != n_threads {
        return Err(GameError::ThreadCount {
            expected: sched.n_threads(),
            found: n_threads,
        });
    }
    perf.check_total()?;
    for s in &cp.layout.slots {
        if s.domain.lo < i32::MIN as Value || s.domain.hi > i32::MAX as Value {
            return Err(GameError::DomainTooWide(s.name.clone()));
        }
    }
    let mut symbols = Vec::with_capacity(n_threads);
    for t in &cp.threads {
        let mut row = Vec::with_capacity(t.transitions.len());
        for tr in &t.transitions {
            let sym = match &tr.symbol {
                None => 0,
                Some(name) => perf.symbol(name).ok_or_else(|| GameError::UnknownSymbol {
                    thread: t.name.clone(),
                    symbol: name.clone(),
                })?,
            };
            row.push(sym);
        }
        symbols.push(row);
    }
    let mut observations = Vec::new();
    let mut obs_of = Vec::with_capacity(n_threads);
    for (ti, thread) in p.threads.iter().enumerate() {
        let choices = choice_locations(thread);
        let mut row = vec![None; thread.locations.len()];
        for (q, slot) in row.iter_mut().enumerate() {
            let outgoing = thread.outgoing(q);
            if outgoing.is_empty() {
                continue;
            }
            let sets = if choices.contains(&q) {
                enumerate_actions(thread, q, opts.all_subsets)
            } else {
                vec![outgoing]
            };
            let actions = sets
                .into_iter()
                .map(|trs| ActionInfo {
                    name: action_name(thread, &trs),
                    transitions: trs,
                })
                .collect();
            *slot = Some(observations.len() as ObsId);
            observations.push(ObservationInfo {
                name: format!("{}.{}", thread.name, thread.locations[q]),
                thread: ti,
                location: q,
                actions,
                depth: None,
            });
        }
        obs_of.push(row);
    }
    let lock_mask = cp.layout.locks.iter().fold(0u64, |m, &s| m | (1 << s));
    let lock_waits = cp
        .threads
        .iter()
        .map(|t| {
            t.transitions
                .iter()
                .map(|tr| lock_zero_tests(&tr.guard, &cp.layout.locks))
                .collect()
        })
        .collect();
    let inputs = cp
        .threads
        .iter()
        .map(|t| t.input_valuations(&cp.layout))
        .collect();
    let n_locks = cp.layout.locks.len();
    let cs = perf.symbol(CONTEXT_SWITCH);
    let mut b = Builder {
        sched,
        perf,
        n_threads,
        n_locks,
        slot_off: H + n_threads + n_locks,
        obs_of,
        observations,
        symbols,
        cs,
        race_mask: !lock_mask,
        lock_waits,
        inputs,
        keys: Vec::new(),
        index: HashMap::new(),
        depth: Vec::new(),
        cap: opts.state_cap,
        cp,
    };
    let mut init = vec![-1, sched.initial() as i32, perf.initial() as i32, -1];
    init.extend(b.cp.threads.iter().map(|t| t.initial as i32));
    init.extend(core::iter::repeat(-1).take(n_locks));
    init.extend(b.cp.layout.initial_values().iter().map(|&v| v as i32));
    b.intern(init, 0)?;
    let mut nodes = Vec::new();
    let mut next = 0usize;
    while next < b.keys.len() {
        let s = next as StateId;
        let node = if b.keys[next][0] < 0 {
            b.env_node(s)?
        } else {
            b.thread_node(s)?
        };
        nodes.push(node);
        next += 1;
    }
    let location_names = p.threads.iter().map(|t| t.locations.clone()).collect();
    Ok(GameGraph {
        mode: sched.mode(),
        initial: 0,
        nodes,
        observations: b.observations,
        thread_names: p.thread_names(),
        checks: Checks::NONE,
        program: Some(ProgramInfo {
            layout: b.cp.layout,
            n_threads,
            n_locks,
            location_names,
            keys: b.keys,
        }),
    })
}

/// Readable name of an action: its target locations and labels.
fn action_name(thread: &crate::model::Thread, trs: &[usize]) -> String {
    let parts: Vec<String> = trs
        .iter()
        .map(|&i| {
            let tr = &thread.transitions[i];
            let mut s = thread.locations[tr.to].to_string();
            if let Some(sym) = &tr.symbol {
                s.push('/');
                s.push_str(sym);
            }
            format!("#{i}:{s}")
        })
        .collect();
    parts.join("+")
}
