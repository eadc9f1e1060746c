//! Terse constructors for programs written in code (tests, generators).

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{
    Assignment, BinOp, Domain, Guard, Operation, Rel, Term, Thread, Transition, Value, VarDecl,
};

pub fn var(name: &str) -> Term {
    Term::Var(name.to_string())
}

pub fn cst(v: Value) -> Term {
    Term::Const(v)
}

pub fn add(a: Term, b: Term) -> Term {
    Term::bin(BinOp::Add, a, b)
}

pub fn sub(a: Term, b: Term) -> Term {
    Term::bin(BinOp::Sub, a, b)
}

pub fn mul(a: Term, b: Term) -> Term {
    Term::bin(BinOp::Mul, a, b)
}

pub fn modulo(a: Term, b: Term) -> Term {
    Term::bin(BinOp::Mod, a, b)
}

pub fn eq(a: Term, b: Term) -> Guard {
    Guard::cmp(Rel::Eq, a, b)
}

pub fn ne(a: Term, b: Term) -> Guard {
    Guard::cmp(Rel::Ne, a, b)
}

pub fn lt(a: Term, b: Term) -> Guard {
    Guard::cmp(Rel::Lt, a, b)
}

pub fn le(a: Term, b: Term) -> Guard {
    Guard::cmp(Rel::Le, a, b)
}

pub fn gt(a: Term, b: Term) -> Guard {
    Guard::cmp(Rel::Gt, a, b)
}

pub fn ge(a: Term, b: Term) -> Guard {
    Guard::cmp(Rel::Ge, a, b)
}

/// `name == v`
pub fn is(name: &str, v: Value) -> Guard {
    eq(var(name), cst(v))
}

pub fn all(gs: impl IntoIterator<Item = Guard>) -> Guard {
    gs.into_iter().fold(Guard::True, Guard::and)
}

pub fn assign<S: Into<String>>(pairs: impl IntoIterator<Item = (S, Term)>) -> Operation {
    Operation::new(
        pairs
            .into_iter()
            .map(|(t, v)| Assignment {
                target: t.into(),
                value: v,
            })
            .collect(),
    )
}

/// Incremental thread construction; the first location added is initial.
#[derive(Clone, Debug)]
pub struct ThreadBuilder {
    thread: Thread,
}

impl ThreadBuilder {
    pub fn new(name: impl Into<String>, globals: &[VarDecl]) -> Self {
        ThreadBuilder {
            thread: Thread {
                name: name.into(),
                locations: Vec::new(),
                initial: 0,
                globals: globals.to_vec(),
                locals: Vec::new(),
                inputs: Vec::new(),
                transitions: Vec::new(),
                locks: Vec::new(),
            },
        }
    }

    pub fn local(&mut self, name: &str, lo: Value, hi: Value, init: Value) -> &mut Self {
        self.thread
            .locals
            .push(VarDecl::new(name, Domain::new(lo, hi), init));
        self
    }

    pub fn input(&mut self, name: &str, lo: Value, hi: Value) -> &mut Self {
        self.thread
            .inputs
            .push(VarDecl::input(name, Domain::new(lo, hi)));
        self
    }

    pub fn lock(&mut self, name: &str) -> &mut Self {
        self.thread.locks.push(name.to_string());
        self
    }

    /// Index of location `name`, adding it if new.
    pub fn loc(&mut self, name: &str) -> usize {
        match self.thread.location(name) {
            Some(i) => i,
            None => {
                self.thread.locations.push(name.to_string());
                self.thread.locations.len() - 1
            }
        }
    }

    pub fn trans(
        &mut self,
        from: &str,
        to: &str,
        guard: Guard,
        op: Operation,
        label: Option<&str>,
    ) -> &mut Self {
        let f = self.loc(from);
        let t = self.loc(to);
        self.thread
            .transitions
            .push(Transition::new(f, t, guard, op, label));
        self
    }

    pub fn build(&self) -> Thread {
        self.thread.clone()
    }
}
