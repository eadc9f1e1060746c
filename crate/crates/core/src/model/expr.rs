//! Terms, guards and simultaneous assignments, generic over how variables
//! are referenced (names in source programs, slot indices once compiled).

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

pub type Value = i64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    /// Euclidean remainder, always in `[0, |divisor|)`.
    Mod,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Mod => "mod",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term<V = String> {
    Const(Value),
    Var(V),
    Bin(BinOp, Box<Term<V>>, Box<Term<V>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "==",
            Rel::Ne => "!=",
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        }
    }

    pub fn holds(self, a: Value, b: Value) -> bool {
        match self {
            Rel::Eq => a == b,
            Rel::Ne => a != b,
            Rel::Lt => a < b,
            Rel::Le => a <= b,
            Rel::Gt => a > b,
            Rel::Ge => a >= b,
        }
    }
}

/// Guard formulas: comparisons closed under conjunction and negation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Guard<V = String> {
    True,
    Cmp(Rel, Term<V>, Term<V>),
    And(Box<Guard<V>>, Box<Guard<V>>),
    Not(Box<Guard<V>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment<V = String> {
    pub target: V,
    pub value: Term<V>,
}

/// Simultaneous assignments: every right-hand side is evaluated in the old
/// valuation before any target is written.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Operation<V = String> {
    pub assigns: Vec<Assignment<V>>,
}

impl<V> Default for Operation<V> {
    fn default() -> Self {
        Operation {
            assigns: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("modulo by zero")]
    ModByZero,
    #[error("integer overflow during evaluation")]
    Overflow,
    #[error("value {value} of `{var}` outside its domain [{lo}, {hi}]")]
    DomainOverflow {
        var: String,
        value: Value,
        lo: Value,
        hi: Value,
    },
}

/// Variable lookup used by evaluation.
pub trait Lookup<V> {
    fn lookup(&self, var: &V) -> Option<Value>;
    fn describe(var: &V) -> String;
}

impl Lookup<usize> for [Value] {
    fn lookup(&self, var: &usize) -> Option<Value> {
        self.get(*var).copied()
    }

    fn describe(var: &usize) -> String {
        alloc::format!("#{var}")
    }
}

/// A named valuation of program variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Valuation(pub BTreeMap<String, Value>);

impl Valuation {
    pub fn new() -> Self {
        Valuation(BTreeMap::new())
    }

    pub fn with(mut self, name: &str, value: Value) -> Self {
        self.0.insert(String::from(name), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        self.0.get(name).copied()
    }
}

impl<'a> FromIterator<(&'a str, Value)> for Valuation {
    fn from_iter<I: IntoIterator<Item = (&'a str, Value)>>(iter: I) -> Self {
        Valuation(
            iter.into_iter()
                .map(|(k, v)| (String::from(k), v))
                .collect(),
        )
    }
}

impl Lookup<String> for Valuation {
    fn lookup(&self, var: &String) -> Option<Value> {
        self.0.get(var).copied()
    }

    fn describe(var: &String) -> String {
        var.clone()
    }
}

impl<V> Term<V> {
    pub fn var(v: impl Into<V>) -> Self {
        Term::Var(v.into())
    }

    pub fn bin(op: BinOp, a: Term<V>, b: Term<V>) -> Self {
        Term::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn eval<L: Lookup<V> + ?Sized>(&self, env: &L) -> Result<Value, EvalError> {
        match self {
            Term::Const(c) => Ok(*c),
            Term::Var(v) => env
                .lookup(v)
                .ok_or_else(|| EvalError::Unbound(L::describe(v))),
            Term::Bin(op, a, b) => {
                let a = a.eval(env)?;
                let b = b.eval(env)?;
                match op {
                    BinOp::Add => a.checked_add(b).ok_or(EvalError::Overflow),
                    BinOp::Sub => a.checked_sub(b).ok_or(EvalError::Overflow),
                    BinOp::Mul => a.checked_mul(b).ok_or(EvalError::Overflow),
                    BinOp::Mod => {
                        if b == 0 {
                            Err(EvalError::ModByZero)
                        } else {
                            a.checked_rem_euclid(b).ok_or(EvalError::Overflow)
                        }
                    }
                }
            }
        }
    }

    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a V)) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => f(v),
            Term::Bin(_, a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
        }
    }

    pub fn has_arithmetic(&self) -> bool {
        matches!(self, Term::Bin(..))
    }

    pub fn map_vars<W, E>(&self, f: &mut impl FnMut(&V) -> Result<W, E>) -> Result<Term<W>, E> {
        Ok(match self {
            Term::Const(c) => Term::Const(*c),
            Term::Var(v) => Term::Var(f(v)?),
            Term::Bin(op, a, b) => Term::bin(*op, a.map_vars(f)?, b.map_vars(f)?),
        })
    }
}

impl<V> Guard<V> {
    pub fn cmp(rel: Rel, a: Term<V>, b: Term<V>) -> Self {
        Guard::Cmp(rel, a, b)
    }

    pub fn and(a: Guard<V>, b: Guard<V>) -> Self {
        match (a, b) {
            (Guard::True, g) | (g, Guard::True) => g,
            (a, b) => Guard::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn not(g: Guard<V>) -> Self {
        Guard::Not(Box::new(g))
    }

    /// Disjunction encoded as `!(!a && !b)`.
    pub fn or(a: Guard<V>, b: Guard<V>) -> Self {
        Guard::not(Guard::And(Box::new(Guard::not(a)), Box::new(Guard::not(b))))
    }

    pub fn eval<L: Lookup<V> + ?Sized>(&self, env: &L) -> Result<bool, EvalError> {
        match self {
            Guard::True => Ok(true),
            Guard::Cmp(rel, a, b) => Ok(rel.holds(a.eval(env)?, b.eval(env)?)),
            Guard::And(a, b) => Ok(a.eval(env)? && b.eval(env)?),
            Guard::Not(g) => Ok(!g.eval(env)?),
        }
    }

    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a V)) {
        match self {
            Guard::True => {}
            Guard::Cmp(_, a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
            Guard::And(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
            Guard::Not(g) => g.for_each_var(f),
        }
    }

    pub fn for_each_cmp<'a>(&'a self, f: &mut impl FnMut(Rel, &'a Term<V>, &'a Term<V>)) {
        match self {
            Guard::True => {}
            Guard::Cmp(rel, a, b) => f(*rel, a, b),
            Guard::And(a, b) => {
                a.for_each_cmp(f);
                b.for_each_cmp(f);
            }
            Guard::Not(g) => g.for_each_cmp(f),
        }
    }

    /// Top-level conjuncts, looking through nested `And` nodes.
    pub fn conjuncts(&self) -> Vec<&Guard<V>> {
        let mut out = Vec::new();
        fn walk<'a, V>(g: &'a Guard<V>, out: &mut Vec<&'a Guard<V>>) {
            match g {
                Guard::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Guard::True => {}
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn map_vars<W, E>(&self, f: &mut impl FnMut(&V) -> Result<W, E>) -> Result<Guard<W>, E> {
        Ok(match self {
            Guard::True => Guard::True,
            Guard::Cmp(rel, a, b) => Guard::Cmp(*rel, a.map_vars(f)?, b.map_vars(f)?),
            Guard::And(a, b) => Guard::And(Box::new(a.map_vars(f)?), Box::new(b.map_vars(f)?)),
            Guard::Not(g) => Guard::Not(Box::new(g.map_vars(f)?)),
        })
    }
}

impl<V> Operation<V> {
    pub fn new(assigns: Vec<Assignment<V>>) -> Self {
        Operation { assigns }
    }

    pub fn is_empty(&self) -> bool {
        self.assigns.is_empty()
    }

    /// Evaluates every right-hand side in the current valuation.
    pub fn evaluate<L: Lookup<V> + ?Sized>(&self, env: &L) -> Result<Vec<Value>, EvalError> {
        self.assigns.iter().map(|a| a.value.eval(env)).collect()
    }

    pub fn map_vars<W, E>(
        &self,
        f: &mut impl FnMut(&V) -> Result<W, E>,
    ) -> Result<Operation<W>, E> {
        let assigns = self
            .assigns
            .iter()
            .map(|a| {
                Ok(Assignment {
                    target: f(&a.target)?,
                    value: a.value.map_vars(f)?,
                })
            })
            .collect::<Result<Vec<_>, E>>()?;
        Ok(Operation { assigns })
    }
}

/// Evaluates a term against a named valuation.
pub fn eval_term(t: &Term, v: &Valuation) -> Result<Value, EvalError> {
    t.eval(v)
}

/// Evaluates a guard against a named valuation.
pub fn eval_guard(g: &Guard, v: &Valuation) -> Result<bool, EvalError> {
    g.eval(v)
}

/// Applies a simultaneous assignment. `domains` bounds the written
/// variables; a result outside its domain is a [`EvalError::DomainOverflow`].
pub fn apply_operation(
    op: &Operation,
    v: &Valuation,
    domains: &BTreeMap<String, super::Domain>,
) -> Result<Valuation, EvalError> {
    let values = op.evaluate(v)?;
    let mut out = v.clone();
    for (a, value) in op.assigns.iter().zip(values) {
        if !v.0.contains_key(&a.target) {
            return Err(EvalError::Unbound(a.target.clone()));
        }
        if let Some(d) = domains.get(&a.target) {
            if !d.contains(value) {
                return Err(EvalError::DomainOverflow {
                    var: a.target.clone(),
                    value,
                    lo: d.lo,
                    hi: d.hi,
                });
            }
        }
        out.0.insert(a.target.clone(), value);
    }
    Ok(out)
}

impl<V: fmt::Display> fmt::Display for Term<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) if *c < 0 => write!(f, "(0 - {})", -(*c as i128)),
            Term::Const(c) => write!(f, "{c}"),
            Term::Var(v) => write!(f, "{v}"),
            Term::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

impl<V: fmt::Display> fmt::Display for Guard<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::True => f.write_str("true"),
            Guard::Cmp(rel, a, b) => write!(f, "{a} {} {b}", rel.symbol()),
            Guard::And(a, b) => write!(f, "({a} && {b})"),
            Guard::Not(g) => write!(f, "!({g})"),
        }
    }
}
