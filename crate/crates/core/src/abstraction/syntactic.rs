//! Data and order abstractions: syntactic admissibility and the partitions
//! they induce on a fixed-strategy system.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use super::Partition;
use crate::game::{FixedGame, GameGraph};
use crate::model::{Layout, PartialProgram, Term};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AbstractionError {
    #[error("unknown variable `{0}` in abstraction directive")]
    UnknownVariable(String),
    #[error("cannot abstract `{var}`: {reason}")]
    Rejected { var: String, reason: String },
}

fn rejected(var: &str, reason: impl Into<String>) -> AbstractionError {
    AbstractionError::Rejected {
        var: var.to_string(),
        reason: reason.into(),
    }
}

fn check_known(p: &PartialProgram, vars: &[String]) -> Result<(), AbstractionError> {
    for v in vars {
        if !p.threads.iter().any(|t| t.var(v).is_some()) {
            return Err(AbstractionError::UnknownVariable(v.clone()));
        }
    }
    Ok(())
}

fn first_listed<'a>(t: &'a Term, vars: &[String]) -> Option<&'a String> {
    let mut found = None;
    t.for_each_var(&mut |v: &'a String| {
        if found.is_none() && vars.contains(v) {
            found = Some(v);
        }
    });
    found
}

/// Erasing the listed variables is admissible when none of them is read by
/// a guard and none flows into an unlisted variable.
pub fn check_data_abstraction(p: &PartialProgram, vars: &[String]) -> Result<(), AbstractionError> {
    check_known(p, vars)?;
    for t in &p.threads {
        for tr in &t.transitions {
            let mut in_guard = None;
            tr.guard.for_each_var(&mut |v: &String| {
                if in_guard.is_none() && vars.contains(v) {
                    in_guard = Some(v.clone());
                }
            });
            if let Some(v) = in_guard {
                return Err(rejected(
                    &v,
                    alloc::format!("read by a guard in thread {}", t.name),
                ));
            }
            for a in &tr.op.assigns {
                if vars.contains(&a.target) {
                    continue;
                }
                if let Some(v) = first_listed(&a.value, vars) {
                    return Err(rejected(
                        v,
                        alloc::format!("flows into `{}` in thread {}", a.target, t.name),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Keeping only the order type of the listed variables is admissible when
/// they are only compared with each other, only copied into each other, and
/// never used in arithmetic.
pub fn check_order_abstraction(
    p: &PartialProgram,
    vars: &[String],
) -> Result<(), AbstractionError> {
    check_known(p, vars)?;
    let listed_var = |t: &Term| matches!(t, Term::Var(v) if vars.contains(v));
    for t in &p.threads {
        for tr in &t.transitions {
            let mut err = None;
            tr.guard.for_each_cmp(&mut |_, a, b| {
                if err.is_some() {
                    return;
                }
                let hit = first_listed(a, vars).or_else(|| first_listed(b, vars));
                if let Some(v) = hit {
                    if !(listed_var(a) && listed_var(b)) {
                        let reason = if a.has_arithmetic() || b.has_arithmetic() {
                            "used in arithmetic"
                        } else {
                            "compared with something other than a listed variable"
                        };
                        err = Some(rejected(v, reason));
                    }
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            for a in &tr.op.assigns {
                let listed_target = vars.contains(&a.target);
                if listed_target && !listed_var(&a.value) {
                    let reason = if a.value.has_arithmetic() {
                        "used in arithmetic"
                    } else {
                        "assigned something other than a listed variable"
                    };
                    return Err(rejected(&a.target, reason));
                }
                if !listed_target {
                    if let Some(v) = first_listed(&a.value, vars) {
                        return Err(rejected(v, alloc::format!("flows into `{}`", a.target)));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Every slot holding one of the named variables.
pub fn directive_slots(layout: &Layout, vars: &[String]) -> Vec<usize> {
    let mut out: Vec<usize> = vars.iter().flat_map(|v| layout.slots_named(v)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Partition of the fixed system's states by their program state with the
/// `erase` slots blanked and each group of `order` slots replaced by the
/// dense ranks of its values. Systems without program states get the
/// identity partition.
pub fn abstraction_partition(
    g: &GameGraph,
    fixed: &FixedGame,
    erase: &[usize],
    order: &[Vec<usize>],
) -> Partition {
    let Some(info) = &g.program else {
        return Partition::identity(fixed.mdp.states.len());
    };
    let off = info.slot_offset();
    Partition::from_keys(fixed.origin.iter().enumerate().map(|(i, &s)| {
        let mut k: Vec<i32> = info.keys[s as usize].to_vec();
        for &slot in erase {
            k[off + slot] = 0;
        }
        for group in order {
            let mut vals: Vec<i32> = group.iter().map(|&slot| k[off + slot]).collect();
            vals.sort_unstable();
            vals.dedup();
            for &slot in group {
                let v = k[off + slot];
                k[off + slot] = vals.binary_search(&v).expect("present") as i32;
            }
        }
        (fixed.mdp.states[i].bad, k)
    }))
}
