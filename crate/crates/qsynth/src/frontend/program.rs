//! Partial programs: parsing and printing.
//!
//! ```text
//! globals { x : 0..3 = 0; l : bool; }
//! abstract data(x);
//! thread T {
//!   locals { i : 0..2 = 0; }
//!   inputs { c : bool; }
//!   locks (l);
//!   loc a, b;
//!   trans a -> b when x < 3 && c == 1 do { x := x + 1; } label m;
//!   choice b { -> a when true do { } ; -> a when i == 0 do { i := 1; } label l; }
//! }
//! ```
//!
//! The first location is initial. A `choice` block is sugar for several
//! `trans` lines from the same location.

use std::fmt::Write as _;

use qsynth_core::model::{
    validate, AbstractionDirective, Assignment, BinOp, Domain, Guard, Operation, PartialProgram,
    Rel, Term, Thread, Transition, VarDecl,
};

use super::lexer::{Cursor, Tok};
use super::{FrontendError, SyntaxError};

pub fn parse_partial_program(src: &str) -> Result<PartialProgram, FrontendError> {
    let mut c = Cursor::new(src)?;
    let program = program(&mut c)?;
    validate(&program).map_err(FrontendError::Invalid)?;
    Ok(program)
}

fn program(c: &mut Cursor) -> Result<PartialProgram, SyntaxError> {
    c.expect_kw("globals")?;
    let globals = decls(c, true)?;
    let mut threads = Vec::new();
    let mut abstractions = Vec::new();
    while !c.at_eof() {
        if c.accept_kw("abstract") {
            let kind = c.ident()?;
            c.expect_sym("(")?;
            let vars = c.names(")")?;
            c.expect_sym(")")?;
            c.expect_sym(";")?;
            abstractions.push(match kind.as_str() {
                "data" => AbstractionDirective::Data(vars),
                "order" => AbstractionDirective::Order(vars),
                _ => {
                    return Err(c.error(format!(
                        "unknown abstraction `{kind}`, expected `data` or `order`"
                    )))
                }
            });
        } else if c.is_kw("thread") {
            threads.push(thread(c, &globals)?);
        } else {
            return Err(c.error(format!(
                "expected `thread` or `abstract`, found {}",
                c.peek()
            )));
        }
    }
    if threads.is_empty() {
        return Err(c.error("a program needs at least one thread"));
    }
    Ok(PartialProgram {
        threads,
        abstractions,
    })
}

/// `{ name : lo..hi (= init)?; ... }`; without `with_init` no initial value
/// is allowed (inputs).
fn decls(c: &mut Cursor, with_init: bool) -> Result<Vec<VarDecl>, SyntaxError> {
    c.expect_sym("{")?;
    let mut out = Vec::new();
    while !c.accept_sym("}") {
        let name = c.ident()?;
        c.expect_sym(":")?;
        let domain = if c.accept_kw("bool") {
            Domain::BOOL
        } else {
            let lo = c.signed()?;
            c.expect_sym("..")?;
            let hi = c.signed()?;
            if lo > hi {
                return Err(c.error(format!("empty domain {lo}..{hi} for `{name}`")));
            }
            Domain::new(lo, hi)
        };
        if with_init {
            let init = if c.accept_sym("=") {
                c.signed()?
            } else {
                domain.lo
            };
            out.push(VarDecl::new(name, domain, init));
        } else {
            out.push(VarDecl::input(name, domain));
        }
        c.expect_sym(";")?;
    }
    Ok(out)
}

struct PendingTransition {
    from: String,
    to: String,
    guard: Guard,
    op: Operation,
    label: Option<String>,
    at: (usize, usize),
}

fn thread(c: &mut Cursor, globals: &[VarDecl]) -> Result<Thread, SyntaxError> {
    c.expect_kw("thread")?;
    let name = c.ident()?;
    c.expect_sym("{")?;
    let mut locals = Vec::new();
    let mut inputs = Vec::new();
    let mut locks = Vec::new();
    let mut locations: Vec<String> = Vec::new();
    let mut pending = Vec::new();
    while !c.accept_sym("}") {
        if c.accept_kw("locals") {
            locals.extend(decls(c, true)?);
        } else if c.accept_kw("inputs") {
            inputs.extend(decls(c, false)?);
        } else if c.accept_kw("locks") {
            c.expect_sym("(")?;
            locks.extend(c.names(")")?);
            c.expect_sym(")")?;
            c.expect_sym(";")?;
        } else if c.accept_kw("loc") {
            for l in c.names(";")? {
                if locations.contains(&l) {
                    return Err(c.error(format!("location `{l}` declared twice")));
                }
                locations.push(l);
            }
            c.expect_sym(";")?;
        } else if c.accept_kw("trans") {
            let at = c.here();
            let from = c.ident()?;
            pending.push(branch(c, from, at)?);
        } else if c.accept_kw("choice") {
            let at = c.here();
            let from = c.ident()?;
            c.expect_sym("{")?;
            let mut n = 0;
            while !c.accept_sym("}") {
                pending.push(branch(c, from.clone(), at)?);
                n += 1;
            }
            if n == 0 {
                return Err(c.error("empty `choice` block"));
            }
        } else {
            return Err(c.error(format!("expected a thread item, found {}", c.peek())));
        }
    }
    if locations.is_empty() {
        return Err(c.error(format!("thread `{name}` declares no locations")));
    }
    let index = |l: &str, at: (usize, usize)| {
        locations.iter().position(|x| x == l).ok_or_else(|| {
            SyntaxError::new(
                at.0,
                at.1,
                format!("unknown location `{l}` in thread `{name}`"),
            )
        })
    };
    let mut transitions = Vec::new();
    for t in pending {
        let from = index(&t.from, t.at)?;
        let to = index(&t.to, t.at)?;
        transitions.push(Transition {
            from,
            to,
            guard: t.guard,
            op: t.op,
            symbol: t.label,
        });
    }
    Ok(Thread {
        name: name.clone(),
        locations: locations.clone(),
        initial: 0,
        globals: globals.to_vec(),
        locals,
        inputs,
        transitions,
        locks,
    })
}

/// `-> to when guard do { assigns } label sym ;` (the `when`, `do` and
/// `label` parts are optional).
fn branch(
    c: &mut Cursor,
    from: String,
    at: (usize, usize),
) -> Result<PendingTransition, SyntaxError> {
    c.expect_sym("->")?;
    let to = c.ident()?;
    let guard = if c.accept_kw("when") {
        guard(c)?
    } else {
        Guard::True
    };
    let mut assigns = Vec::new();
    if c.accept_kw("do") {
        c.expect_sym("{")?;
        while !c.accept_sym("}") {
            let target = c.ident()?;
            c.expect_sym(":=")?;
            let value = term(c)?;
            c.expect_sym(";")?;
            assigns.push(Assignment { target, value });
        }
    }
    let label = if c.accept_kw("label") {
        Some(c.ident()?)
    } else {
        None
    };
    c.expect_sym(";")?;
    Ok(PendingTransition {
        from,
        to,
        guard,
        op: Operation::new(assigns),
        label,
        at,
    })
}

pub(crate) fn guard(c: &mut Cursor) -> Result<Guard, SyntaxError> {
    let mut g = conjunction(c)?;
    while c.accept_sym("||") {
        g = Guard::or(g, conjunction(c)?);
    }
    Ok(g)
}

fn conjunction(c: &mut Cursor) -> Result<Guard, SyntaxError> {
    let mut g = negation(c)?;
    while c.accept_sym("&&") {
        let rhs = negation(c)?;
        g = Guard::And(Box::new(g), Box::new(rhs));
    }
    Ok(g)
}

fn negation(c: &mut Cursor) -> Result<Guard, SyntaxError> {
    if c.accept_sym("!") {
        return Ok(Guard::not(negation(c)?));
    }
    if c.accept_kw("true") {
        return Ok(Guard::True);
    }
    if c.accept_kw("false") {
        return Ok(Guard::not(Guard::True));
    }
    if c.is_sym("(") {
        // Either a parenthesized guard or a comparison whose left term
        // starts with a parenthesis; try the comparison first.
        let save = c.pos;
        if let Ok(g) = comparison(c) {
            return Ok(g);
        }
        c.pos = save;
        c.expect_sym("(")?;
        let g = guard(c)?;
        c.expect_sym(")")?;
        return Ok(g);
    }
    comparison(c)
}

fn comparison(c: &mut Cursor) -> Result<Guard, SyntaxError> {
    let a = term(c)?;
    let rel = match c.peek() {
        Tok::Sym("==") => Rel::Eq,
        Tok::Sym("!=") => Rel::Ne,
        Tok::Sym("<") => Rel::Lt,
        Tok::Sym("<=") => Rel::Le,
        Tok::Sym(">") => Rel::Gt,
        Tok::Sym(">=") => Rel::Ge,
        t => return Err(c.error(format!("expected a comparison operator, found {t}"))),
    };
    c.pos += 1;
    let b = term(c)?;
    Ok(Guard::Cmp(rel, a, b))
}

pub(crate) fn term(c: &mut Cursor) -> Result<Term, SyntaxError> {
    let mut t = product(c)?;
    loop {
        let op = if c.accept_sym("+") {
            BinOp::Add
        } else if c.accept_sym("-") {
            BinOp::Sub
        } else {
            return Ok(t);
        };
        t = Term::bin(op, t, product(c)?);
    }
}

fn product(c: &mut Cursor) -> Result<Term, SyntaxError> {
    let mut t = factor(c)?;
    loop {
        let op = if c.accept_sym("*") {
            BinOp::Mul
        } else if c.accept_sym("%") || c.accept_kw("mod") {
            BinOp::Mod
        } else {
            return Ok(t);
        };
        t = Term::bin(op, t, factor(c)?);
    }
}

fn factor(c: &mut Cursor) -> Result<Term, SyntaxError> {
    if c.accept_sym("(") {
        let t = term(c)?;
        c.expect_sym(")")?;
        return Ok(t);
    }
    if c.accept_sym("-") {
        if let Tok::Int(_) = c.peek() {
            let n = c.int()?;
            return i64::try_from(n)
                .map(|v| Term::Const(-v))
                .map_err(|_| c.error("integer out of range"));
        }
        return Ok(Term::bin(BinOp::Sub, Term::Const(0), factor(c)?));
    }
    match c.peek().clone() {
        Tok::Int(_) => {
            let n = c.int()?;
            i64::try_from(n)
                .map(Term::Const)
                .map_err(|_| c.error("integer out of range"))
        }
        Tok::Ident(name) if !is_reserved(&name) => {
            c.pos += 1;
            Ok(Term::Var(name))
        }
        t => Err(c.error(format!("expected a term, found {t}"))),
    }
}

fn is_reserved(word: &str) -> bool {
    matches!(word, "true" | "false" | "mod" | "when" | "do" | "label")
}

/// Prints a program in the grammar accepted by [`parse_partial_program`].
pub fn emit_program(p: &PartialProgram) -> String {
    let mut out = String::new();
    let globals = p
        .threads
        .first()
        .map(|t| t.globals.as_slice())
        .unwrap_or(&[]);
    out.push_str("globals {\n");
    for d in globals {
        emit_decl(&mut out, d);
    }
    out.push_str("}\n");
    for a in &p.abstractions {
        let (kind, vars) = match a {
            AbstractionDirective::Data(v) => ("data", v),
            AbstractionDirective::Order(v) => ("order", v),
        };
        let _ = writeln!(out, "abstract {kind}({});", vars.join(", "));
    }
    for t in &p.threads {
        let _ = writeln!(out, "\nthread {} {{", t.name);
        if !t.locals.is_empty() {
            out.push_str("  locals {\n");
            for d in &t.locals {
                out.push_str("  ");
                emit_decl(&mut out, d);
            }
            out.push_str("  }\n");
        }
        if !t.inputs.is_empty() {
            out.push_str("  inputs {\n");
            for d in &t.inputs {
                out.push_str("  ");
                emit_decl(&mut out, d);
            }
            out.push_str("  }\n");
        }
        if !t.locks.is_empty() {
            let _ = writeln!(out, "  locks ({});", t.locks.join(", "));
        }
        // The initial location has to come first.
        let mut order: Vec<usize> = vec![t.initial];
        order.extend((0..t.locations.len()).filter(|&l| l != t.initial));
        let names: Vec<&str> = order.iter().map(|&l| t.locations[l].as_str()).collect();
        let _ = writeln!(out, "  loc {};", names.join(", "));
        for tr in &t.transitions {
            let _ = write!(
                out,
                "  trans {} -> {} when {} do {{",
                t.locations[tr.from], t.locations[tr.to], tr.guard
            );
            for a in &tr.op.assigns {
                let _ = write!(out, " {} := {};", a.target, a.value);
            }
            out.push_str(" }");
            if let Some(s) = &tr.symbol {
                let _ = write!(out, " label {s}");
            }
            out.push_str(";\n");
        }
        out.push_str("}\n");
    }
    out
}

fn emit_decl(out: &mut String, d: &VarDecl) {
    let domain = if d.domain == Domain::BOOL {
        "bool".to_string()
    } else {
        format!("{}..{}", d.domain.lo, d.domain.hi)
    };
    match d.initial {
        Some(v) => {
            let _ = writeln!(out, "  {} : {domain} = {v};", d.name);
        }
        None => {
            let _ = writeln!(out, "  {} : {domain};", d.name);
        }
    }
}
