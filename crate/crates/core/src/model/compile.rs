//! Slot-indexed form of a validated program, used by game construction.

use alloc::string::String;
use alloc::vec::Vec;

use super::{validate, Diagnostic, Domain, Guard, Operation, PartialProgram, Term, Value, VarKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotKind {
    Global,
    Local(usize),
    Input(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slot {
    pub name: String,
    pub domain: Domain,
    pub kind: SlotKind,
    /// Initial value; inputs start at the bottom of their domain.
    pub initial: Value,
}

/// Flat variable layout: globals first, then per thread its locals and inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub slots: Vec<Slot>,
    pub n_globals: usize,
    /// Global slots designated as locks by any thread, ascending.
    pub locks: Vec<usize>,
}

impl Layout {
    pub fn initial_values(&self) -> Vec<Value> {
        self.slots.iter().map(|s| s.initial).collect()
    }

    pub fn lock_index(&self, slot: usize) -> Option<usize> {
        self.locks.iter().position(|&s| s == slot)
    }

    /// Slots whose variable is called `name` (one global, or one local per thread).
    pub fn slots_named(&self, name: &str) -> Vec<usize> {
        (0..self.slots.len())
            .filter(|&i| self.slots[i].name == name)
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct CompiledTransition {
    pub from: usize,
    pub to: usize,
    pub guard: Guard<usize>,
    pub op: Operation<usize>,
    pub symbol: Option<String>,
    /// Bit `i` set when global `i` is read (guard or right-hand side).
    pub reads: u64,
    /// Bit `i` set when global `i` is assigned.
    pub writes: u64,
    /// (lock index, constant written).
    pub lock_writes: Vec<(usize, Value)>,
}

#[derive(Clone, Debug)]
pub struct CompiledThread {
    pub name: String,
    pub n_locations: usize,
    pub initial: usize,
    pub transitions: Vec<CompiledTransition>,
    pub outgoing: Vec<Vec<usize>>,
    pub input_slots: Vec<usize>,
}

impl CompiledThread {
    /// Every valuation of this thread's inputs, in odometer order (first
    /// input varies fastest). A thread without inputs has exactly one.
    pub fn input_valuations(&self, layout: &Layout) -> Vec<Vec<Value>> {
        let doms: Vec<Domain> = self
            .input_slots
            .iter()
            .map(|&s| layout.slots[s].domain)
            .collect();
        let mut out = Vec::new();
        let mut cur: Vec<Value> = doms.iter().map(|d| d.lo).collect();
        loop {
            out.push(cur.clone());
            let mut i = 0;
            loop {
                if i == doms.len() {
                    return out;
                }
                if cur[i] < doms[i].hi {
                    cur[i] += 1;
                    break;
                }
                cur[i] = doms[i].lo;
                i += 1;
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct CompiledProgram {
    pub layout: Layout,
    pub threads: Vec<CompiledThread>,
}

impl CompiledProgram {
    pub fn new(p: &PartialProgram) -> Result<Self, Vec<Diagnostic>> {
        validate(p)?;
        let globals = p.globals();
        let mut slots: Vec<Slot> = globals
            .iter()
            .map(|d| Slot {
                name: d.name.clone(),
                domain: d.domain,
                kind: SlotKind::Global,
                initial: d.initial.unwrap_or(d.domain.lo),
            })
            .collect();
        let n_globals = slots.len();
        let mut locks: Vec<usize> = Vec::new();
        for t in &p.threads {
            for l in &t.locks {
                let s = globals
                    .iter()
                    .position(|g| &g.name == l)
                    .expect("validated lock");
                if !locks.contains(&s) {
                    locks.push(s);
                }
            }
        }
        locks.sort_unstable();
        let mut scopes = Vec::new();
        for (ti, t) in p.threads.iter().enumerate() {
            let base = slots.len();
            for d in &t.locals {
                slots.push(Slot {
                    name: d.name.clone(),
                    domain: d.domain,
                    kind: SlotKind::Local(ti),
                    initial: d.initial.unwrap_or(d.domain.lo),
                });
            }
            let input_base = slots.len();
            for d in &t.inputs {
                slots.push(Slot {
                    name: d.name.clone(),
                    domain: d.domain,
                    kind: SlotKind::Input(ti),
                    initial: d.domain.lo,
                });
            }
            scopes.push((base, input_base));
        }
        let layout = Layout {
            slots,
            n_globals,
            locks,
        };
        let mut threads = Vec::new();
        for (ti, t) in p.threads.iter().enumerate() {
            let (local_base, input_base) = scopes[ti];
            let resolve = |name: &String| -> Result<usize, ()> {
                match t.var(name) {
                    Some((VarKind::Local, _)) => {
                        Ok(local_base + t.locals.iter().position(|d| &d.name == name).ok_or(())?)
                    }
                    Some((VarKind::Input, _)) => {
                        Ok(input_base + t.inputs.iter().position(|d| &d.name == name).ok_or(())?)
                    }
                    Some((VarKind::Global, _)) => {
                        globals.iter().position(|d| &d.name == name).ok_or(())
                    }
                    None => Err(()),
                }
            };
            let mut transitions = Vec::new();
            let mut outgoing = alloc::vec![Vec::new(); t.locations.len()];
            for (i, tr) in t.transitions.iter().enumerate() {
                let guard = tr
                    .guard
                    .map_vars(&mut |v| resolve(v))
                    .expect("validated guard");
                let op = tr
                    .op
                    .map_vars(&mut |v| resolve(v))
                    .expect("validated operation");
                let mut reads = 0u64;
                let mut note = |s: &usize| {
                    if *s < n_globals {
                        reads |= 1 << *s;
                    }
                };
                guard.for_each_var(&mut note);
                for a in &op.assigns {
                    a.value.for_each_var(&mut note);
                }
                let mut writes = 0u64;
                let mut lock_writes = Vec::new();
                for a in &op.assigns {
                    if a.target < n_globals {
                        writes |= 1 << a.target;
                        if let Some(li) = layout.lock_index(a.target) {
                            if let Term::Const(c) = a.value {
                                lock_writes.push((li, c));
                            }
                        }
                    }
                }
                outgoing[tr.from].push(i);
                transitions.push(CompiledTransition {
                    from: tr.from,
                    to: tr.to,
                    guard,
                    op,
                    symbol: tr.symbol.clone(),
                    reads,
                    writes,
                    lock_writes,
                });
            }
            let input_slots = (input_base..input_base + t.inputs.len()).collect();
            threads.push(CompiledThread {
                name: t.name.clone(),
                n_locations: t.locations.len(),
                initial: t.initial,
                transitions,
                outgoing,
                input_slots,
            });
        }
        Ok(CompiledProgram { layout, threads })
    }
}
