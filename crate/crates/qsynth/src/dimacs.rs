//! DIMACS CNF reading and writing.

use std::fmt::Write as _;

use qsynth_core::gallery::Cnf;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("line {0}: missing or malformed `p cnf` header")]
    Header(usize),
    #[error("line {line}: `{token}` is not a literal")]
    Literal { line: usize, token: String },
    #[error("line {line}: variable {var} exceeds the declared {vars}")]
    OutOfRange { line: usize, var: u32, vars: usize },
    #[error("header declares {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
    #[error("empty clause")]
    EmptyClause,
}

pub fn parse_dimacs(text: &str) -> Result<Cnf, DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["p", "cnf", v, c] if header.is_none() => {
                    let v = v.parse().map_err(|_| DimacsError::Header(n))?;
                    let c = c.parse().map_err(|_| DimacsError::Header(n))?;
                    header = Some((v, c));
                }
                _ => return Err(DimacsError::Header(n)),
            }
            continue;
        }
        let (vars, _) = header.ok_or(DimacsError::Header(n))?;
        for tok in line.split_whitespace() {
            let lit: i32 = tok.parse().map_err(|_| DimacsError::Literal {
                line: n,
                token: tok.to_string(),
            })?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(DimacsError::EmptyClause);
                }
                clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() as usize > vars {
                return Err(DimacsError::OutOfRange {
                    line: n,
                    var: lit.unsigned_abs(),
                    vars,
                });
            } else {
                current.push(lit);
            }
        }
    }
    let (vars, declared) = header.ok_or(DimacsError::Header(text.lines().count().max(1)))?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != declared {
        return Err(DimacsError::ClauseCount {
            declared,
            found: clauses.len(),
        });
    }
    Ok(Cnf::new(vars, clauses))
}

pub fn write_dimacs(cnf: &Cnf) -> String {
    let mut out = format!("p cnf {} {}\n", cnf.vars, cnf.clauses.len());
    for c in &cnf.clauses {
        for l in c {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
    out
}
