//! Partial programs: finite-domain variables, guarded transitions and
//! threads whose transition relation may be nondeterministic.

pub mod build;
mod compile;
mod expr;
mod sweep;
mod validate;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

pub use compile::{CompiledProgram, CompiledThread, CompiledTransition, Layout, Slot, SlotKind};
pub use expr::{
    apply_operation, eval_guard, eval_term, Assignment, BinOp, EvalError, Guard, Lookup, Operation,
    Rel, Term, Valuation, Value,
};
pub use sweep::{guards_overlap, sweep_named};
pub use validate::{validate, Diagnostic};

/// Inclusive integer interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Domain {
    pub lo: Value,
    pub hi: Value,
}

impl Domain {
    pub const BOOL: Domain = Domain { lo: 0, hi: 1 };

    pub fn new(lo: Value, hi: Value) -> Self {
        Domain { lo, hi }
    }

    pub fn contains(&self, v: Value) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn size(&self) -> u64 {
        if self.hi < self.lo {
            0
        } else {
            (self.hi as i128 - self.lo as i128 + 1) as u64
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Global,
    Local,
    Input,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub domain: Domain,
    /// Absent for inputs, which the environment sets when the thread is scheduled.
    pub initial: Option<Value>,
}

impl VarDecl {
    pub fn new(name: impl Into<String>, domain: Domain, initial: Value) -> Self {
        VarDecl {
            name: name.into(),
            domain,
            initial: Some(initial),
        }
    }

    pub fn input(name: impl Into<String>, domain: Domain) -> Self {
        VarDecl {
            name: name.into(),
            domain,
            initial: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Access {
    Read,
    Write,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub guard: Guard,
    pub op: Operation,
    /// Cost symbol matched against the performance automaton; `None` is ⊥.
    pub symbol: Option<String>,
}

impl Transition {
    pub fn new(from: usize, to: usize, guard: Guard, op: Operation, symbol: Option<&str>) -> Self {
        Transition {
            from,
            to,
            guard,
            op,
            symbol: symbol.map(String::from),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Thread {
    pub name: String,
    pub locations: Vec<String>,
    pub initial: usize,
    /// This thread's view of the shared variables.
    pub globals: Vec<VarDecl>,
    pub locals: Vec<VarDecl>,
    pub inputs: Vec<VarDecl>,
    pub transitions: Vec<Transition>,
    /// Globals used as locks (domain `[0, 1]`, written only with constants).
    pub locks: Vec<String>,
}

impl Thread {
    pub fn var(&self, name: &str) -> Option<(VarKind, &VarDecl)> {
        let find = |list: &'_ [VarDecl]| list.iter().position(|d| d.name == name);
        if let Some(i) = find(&self.locals) {
            return Some((VarKind::Local, &self.locals[i]));
        }
        if let Some(i) = find(&self.inputs) {
            return Some((VarKind::Input, &self.inputs[i]));
        }
        find(&self.globals).map(|i| (VarKind::Global, &self.globals[i]))
    }

    pub fn domain_of(&self, name: &str) -> Option<Domain> {
        self.var(name).map(|(_, d)| d.domain)
    }

    pub fn location(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l == name)
    }

    /// Indices of the transitions leaving `q`, in declaration order.
    pub fn outgoing(&self, q: usize) -> Vec<usize> {
        (0..self.transitions.len())
            .filter(|&i| self.transitions[i].from == q)
            .collect()
    }

    pub fn is_lock(&self, name: &str) -> bool {
        self.locks.iter().any(|l| l == name)
    }

    /// Globals read by the guard or any right-hand side, and globals written.
    pub fn access_set(&self, t: &Transition) -> BTreeSet<(String, Access)> {
        let mut out = BTreeSet::new();
        let mut note_read = |v: &String| {
            if matches!(self.var(v), Some((VarKind::Global, _))) {
                out.insert((v.clone(), Access::Read));
            }
        };
        t.guard.for_each_var(&mut note_read);
        for a in &t.op.assigns {
            a.value.for_each_var(&mut note_read);
        }
        for a in &t.op.assigns {
            if matches!(self.var(&a.target), Some((VarKind::Global, _))) {
                out.insert((a.target.clone(), Access::Write));
            }
        }
        out
    }

    pub fn domains(&self) -> BTreeMap<String, Domain> {
        self.globals
            .iter()
            .chain(&self.locals)
            .chain(&self.inputs)
            .map(|d| (d.name.clone(), d.domain))
            .collect()
    }
}

/// Locations where some valuation enables two or more outgoing transitions.
pub fn choice_locations(thread: &Thread) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for q in 0..thread.locations.len() {
        let outgoing = thread.outgoing(q);
        'pairs: for (i, &a) in outgoing.iter().enumerate() {
            for &b in &outgoing[i + 1..] {
                if guards_overlap(
                    thread,
                    &thread.transitions[a].guard,
                    &thread.transitions[b].guard,
                ) {
                    out.insert(q);
                    break 'pairs;
                }
            }
        }
    }
    out
}

/// Which variables an abstraction directive covers, and how.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbstractionDirective {
    /// Erase the values of the listed variables.
    Data(Vec<String>),
    /// Keep only the equality/order relations among the listed variables.
    Order(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialProgram {
    pub threads: Vec<Thread>,
    pub abstractions: Vec<AbstractionDirective>,
}

impl PartialProgram {
    pub fn new(threads: Vec<Thread>) -> Self {
        PartialProgram {
            threads,
            abstractions: Vec::new(),
        }
    }

    /// Shared variables, as declared by the first thread.
    pub fn globals(&self) -> &[VarDecl] {
        self.threads
            .first()
            .map(|t| t.globals.as_slice())
            .unwrap_or(&[])
    }

    pub fn thread_index(&self, name: &str) -> Option<usize> {
        self.threads.iter().position(|t| t.name == name)
    }

    /// A program is choice-free when every thread is deterministic.
    pub fn is_choice_free(&self) -> bool {
        self.threads.iter().all(|t| choice_locations(t).is_empty())
    }

    pub fn thread_names(&self) -> Vec<String> {
        self.threads.iter().map(|t| t.name.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn thread_with(guards: Vec<Guard>) -> Thread {
        Thread {
            name: "t".into(),
            locations: vec!["a".into(), "b".into()],
            initial: 0,
            globals: vec![VarDecl::new("x", Domain::new(0, 3), 0)],
            locals: vec![],
            inputs: vec![],
            transitions: guards
                .into_iter()
                .map(|g| Transition::new(0, 1, g, Operation::default(), None))
                .collect(),
            locks: vec![],
        }
    }

    fn x_eq(c: i64) -> Guard {
        Guard::cmp(Rel::Eq, Term::var("x"), Term::Const(c))
    }

    #[test]
    fn single_transition_is_deterministic() {
        assert!(choice_locations(&thread_with(vec![Guard::True])).is_empty());
    }

    #[test]
    fn overlapping_true_guards_form_a_choice() {
        let t = thread_with(vec![Guard::True, Guard::True]);
        assert_eq!(choice_locations(&t), [0].into_iter().collect());
    }

    #[test]
    fn disjoint_guards_are_not_a_choice() {
        let t = thread_with(vec![x_eq(0), x_eq(1)]);
        assert!(choice_locations(&t).is_empty());
    }

    #[test]
    fn access_set_tracks_reads_and_writes() {
        let mut t = thread_with(vec![x_eq(0)]);
        t.globals.push(VarDecl::new("y", Domain::new(0, 3), 0));
        t.locals.push(VarDecl::new("l", Domain::new(0, 3), 0));
        t.transitions[0].op = Operation::new(vec![
            Assignment {
                target: "y".into(),
                value: Term::var("l"),
            },
            Assignment {
                target: "l".into(),
                value: Term::var("x"),
            },
        ]);
        let set = t.access_set(&t.transitions[0]);
        let want: BTreeSet<_> = [("x".into(), Access::Read), ("y".into(), Access::Write)]
            .into_iter()
            .collect();
        assert_eq!(set, want);
    }
}
