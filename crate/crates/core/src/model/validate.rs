//! Well-formedness checks for partial programs.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::ControlFlow;

use super::sweep::sweep_named;
use super::{BinOp, Domain, Guard, PartialProgram, Term, Thread, VarKind};

/// Valuation sweeps larger than this are not attempted.
const SWEEP_CAP: u64 = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub thread: Option<String>,
    pub location: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.thread, &self.location) {
            (Some(t), Some(l)) => write!(f, "thread {t}, location {l}: {}", self.message),
            (Some(t), None) => write!(f, "thread {t}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

struct Report {
    out: Vec<Diagnostic>,
}

impl Report {
    fn push(&mut self, thread: Option<&Thread>, location: Option<&str>, message: String) {
        self.out.push(Diagnostic {
            thread: thread.map(|t| t.name.clone()),
            location: location.map(String::from),
            message,
        });
    }
}

/// Checks every structural invariant of `p`. Returns all violations found.
pub fn validate(p: &PartialProgram) -> Result<(), Vec<Diagnostic>> {
    let mut r = Report { out: Vec::new() };
    if p.threads.is_empty() {
        r.push(None, None, "a program needs at least one thread".into());
    }
    let mut thread_names = BTreeSet::new();
    for t in &p.threads {
        if !thread_names.insert(t.name.as_str()) {
            r.push(Some(t), None, "duplicate thread name".into());
        }
    }
    if let Some(first) = p.threads.first() {
        if first.globals.len() > 64 {
            r.push(
                None,
                None,
                "at most 64 global variables are supported".into(),
            );
        }
        for t in &p.threads[1..] {
            if t.globals != first.globals {
                r.push(
                    Some(t),
                    None,
                    format!(
                        "globals (names, domains or initial values) differ from thread {}",
                        first.name
                    ),
                );
            }
        }
    }
    for t in &p.threads {
        check_thread(t, &mut r);
    }
    if r.out.is_empty() {
        Ok(())
    } else {
        Err(r.out)
    }
}

fn check_thread(t: &Thread, r: &mut Report) {
    let mut names = BTreeSet::new();
    for (kind, list) in [
        (VarKind::Global, &t.globals),
        (VarKind::Local, &t.locals),
        (VarKind::Input, &t.inputs),
    ] {
        for d in list.iter() {
            if !names.insert(d.name.as_str()) {
                r.push(
                    Some(t),
                    None,
                    format!("variable `{}` declared twice", d.name),
                );
            }
            if d.domain.lo > d.domain.hi {
                r.push(Some(t), None, format!("empty domain for `{}`", d.name));
            }
            match (kind, d.initial) {
                (VarKind::Input, Some(_)) => r.push(
                    Some(t),
                    None,
                    format!("input `{}` cannot have an initial value", d.name),
                ),
                (VarKind::Input, None) => {}
                (_, None) => r.push(
                    Some(t),
                    None,
                    format!("`{}` needs an initial value", d.name),
                ),
                (_, Some(v)) if !d.domain.contains(v) => r.push(
                    Some(t),
                    None,
                    format!("initial value {v} of `{}` outside its domain", d.name),
                ),
                _ => {}
            }
        }
    }
    if t.locations.is_empty() {
        r.push(Some(t), None, "thread has no locations".into());
        return;
    }
    let mut locs = BTreeSet::new();
    for l in &t.locations {
        if !locs.insert(l.as_str()) {
            r.push(Some(t), Some(l), "duplicate location".into());
        }
    }
    if t.initial >= t.locations.len() {
        r.push(Some(t), None, "initial location out of range".into());
    }
    for lock in &t.locks {
        match t.var(lock) {
            Some((VarKind::Global, d)) if d.domain == Domain::BOOL => {}
            Some((VarKind::Global, _)) => r.push(
                Some(t),
                None,
                format!("lock `{lock}` must have domain [0, 1]"),
            ),
            _ => r.push(
                Some(t),
                None,
                format!("lock `{lock}` is not a global variable"),
            ),
        }
    }
    for tr in &t.transitions {
        let before = r.out.len();
        if tr.from >= t.locations.len() || tr.to >= t.locations.len() {
            r.push(Some(t), None, "transition endpoint out of range".into());
            continue;
        }
        let loc = t.locations[tr.from].as_str();
        let mut unbound = BTreeSet::new();
        let mut check = |v: &String| {
            if t.var(v).is_none() {
                unbound.insert(v.clone());
            }
        };
        tr.guard.for_each_var(&mut check);
        for a in &tr.op.assigns {
            a.value.for_each_var(&mut check);
        }
        for v in &unbound {
            r.push(Some(t), Some(loc), format!("unknown variable `{v}`"));
        }
        let mut targets = BTreeSet::new();
        for a in &tr.op.assigns {
            if !targets.insert(a.target.as_str()) {
                r.push(Some(t), Some(loc), format!("`{}` assigned twice", a.target));
            }
            match t.var(&a.target) {
                None => r.push(
                    Some(t),
                    Some(loc),
                    format!("unknown variable `{}`", a.target),
                ),
                Some((VarKind::Input, _)) => r.push(
                    Some(t),
                    Some(loc),
                    format!("cannot assign input `{}`", a.target),
                ),
                _ => {}
            }
            if t.is_lock(&a.target) && !matches!(a.value, Term::Const(0) | Term::Const(1)) {
                r.push(
                    Some(t),
                    Some(loc),
                    format!(
                        "lock `{}` may only be assigned the constants 0 or 1",
                        a.target
                    ),
                );
            }
        }
        if r.out.len() > before {
            continue;
        }
        check_guard_total(t, loc, &tr.guard, r);
        for a in &tr.op.assigns {
            check_no_overflow(t, loc, &tr.guard, &a.target, &a.value, r);
        }
    }
}

fn check_guard_total(t: &Thread, loc: &str, g: &Guard, r: &mut Report) {
    let mut has_mod = false;
    g.for_each_cmp(&mut |_, a, b| has_mod |= contains_mod(a) || contains_mod(b));
    if !has_mod {
        return;
    }
    let vars = super::sweep::guard_vars(t, &[g]);
    if sweep_size(&vars) > SWEEP_CAP {
        r.push(Some(t), Some(loc), "guard too large to validate".into());
        return;
    }
    let failed = sweep_named(&vars, |v| {
        if g.eval(v).is_err() {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    if failed {
        r.push(Some(t), Some(loc), "guard can divide by zero".into());
    }
}

fn contains_mod(t: &Term) -> bool {
    match t {
        Term::Bin(BinOp::Mod, _, _) => true,
        Term::Bin(_, a, b) => contains_mod(a) || contains_mod(b),
        _ => false,
    }
}

fn sweep_size(vars: &[(String, Domain)]) -> u64 {
    vars.iter()
        .fold(1u64, |acc, (_, d)| acc.saturating_mul(d.size()))
}

/// Interval bounds of a term over its variables' domains; `None` when the
/// term may fail to evaluate.
fn interval(t: &Thread, term: &Term) -> Option<(i128, i128)> {
    Some(match term {
        Term::Const(c) => (*c as i128, *c as i128),
        Term::Var(v) => {
            let d = t.domain_of(v)?;
            (d.lo as i128, d.hi as i128)
        }
        Term::Bin(op, a, b) => {
            let (alo, ahi) = interval(t, a)?;
            let (blo, bhi) = interval(t, b)?;
            match op {
                BinOp::Add => (alo + blo, ahi + bhi),
                BinOp::Sub => (alo - bhi, ahi - blo),
                BinOp::Mul => {
                    let c = [alo * blo, alo * bhi, ahi * blo, ahi * bhi];
                    (*c.iter().min()?, *c.iter().max()?)
                }
                BinOp::Mod => {
                    if blo <= 0 && bhi >= 0 {
                        return None;
                    }
                    let m = blo.abs().max(bhi.abs());
                    (0, m - 1)
                }
            }
        }
    })
}

/// Rejects assignments whose value can leave the target's domain for some
/// valuation satisfying the guard.
fn check_no_overflow(t: &Thread, loc: &str, g: &Guard, target: &str, value: &Term, r: &mut Report) {
    let Some(dom) = t.domain_of(target) else {
        return;
    };
    if let Some((lo, hi)) = interval(t, value) {
        if lo >= dom.lo as i128 && hi <= dom.hi as i128 {
            return;
        }
    }
    let mut names = BTreeSet::new();
    g.for_each_var(&mut |v: &String| {
        names.insert(v.clone());
    });
    value.for_each_var(&mut |v: &String| {
        names.insert(v.clone());
    });
    let vars: Vec<(String, Domain)> = names
        .into_iter()
        .filter_map(|n| t.domain_of(&n).map(|d| (n, d)))
        .collect();
    if sweep_size(&vars) > SWEEP_CAP {
        r.push(
            Some(t),
            Some(loc),
            format!("assignment to `{target}` too large to validate"),
        );
        return;
    }
    let mut bad = None;
    sweep_named(&vars, |v| {
        if !g.eval(v).unwrap_or(false) {
            return ControlFlow::Continue(());
        }
        match value.eval(v) {
            Ok(x) if dom.contains(x) => ControlFlow::Continue(()),
            Ok(x) => {
                bad = Some(format!(
                    "assignment to `{target}` can overflow its domain (value {x})"
                ));
                ControlFlow::Break(())
            }
            Err(e) => {
                bad = Some(format!("assignment to `{target}` can fail: {e}"));
                ControlFlow::Break(())
            }
        }
    });
    if let Some(msg) = bad {
        r.push(Some(t), Some(loc), msg);
    }
}
