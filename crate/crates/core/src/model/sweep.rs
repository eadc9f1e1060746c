//! Exhaustive enumeration of valuations over finite domains.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use super::{Domain, Guard, Thread, Valuation, Value};

/// Calls `f` on every valuation of `vars` (name, domain), in odometer order.
/// Stops early when `f` breaks; returns whether it did.
pub fn sweep_named(
    vars: &[(String, Domain)],
    mut f: impl FnMut(&Valuation) -> ControlFlow<()>,
) -> bool {
    if vars.iter().any(|(_, d)| d.size() == 0) {
        return false;
    }
    let mut val = Valuation::new();
    for (name, d) in vars {
        val.0.insert(name.clone(), d.lo);
    }
    let mut current: Vec<Value> = vars.iter().map(|(_, d)| d.lo).collect();
    loop {
        if f(&val).is_break() {
            return true;
        }
        let mut i = 0;
        loop {
            if i == vars.len() {
                return false;
            }
            let (name, d) = &vars[i];
            if current[i] < d.hi {
                current[i] += 1;
                val.0.insert(name.clone(), current[i]);
                break;
            }
            current[i] = d.lo;
            val.0.insert(name.clone(), d.lo);
            i += 1;
        }
    }
}

/// Variables a set of guards mentions, with their domains in `thread`.
/// Unknown names are skipped (validation reports them).
pub(crate) fn guard_vars(thread: &Thread, guards: &[&Guard]) -> Vec<(String, Domain)> {
    let mut names = BTreeSet::new();
    for g in guards {
        g.for_each_var(&mut |v: &String| {
            names.insert(v.clone());
        });
    }
    names
        .into_iter()
        .filter_map(|n| thread.domain_of(&n).map(|d| (n, d)))
        .collect()
}

/// Whether some valuation makes both guards true.
pub fn guards_overlap(thread: &Thread, a: &Guard, b: &Guard) -> bool {
    let vars = guard_vars(thread, &[a, b]);
    sweep_named(&vars, |v| {
        if a.eval(v).unwrap_or(false) && b.eval(v).unwrap_or(false) {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_visits_product() {
        let vars = alloc::vec![
            (String::from("a"), Domain::new(0, 2)),
            (String::from("b"), Domain::new(-1, 0)),
        ];
        let mut seen = Vec::new();
        sweep_named(&vars, |v| {
            seen.push((v.get("a").unwrap(), v.get("b").unwrap()));
            ControlFlow::Continue(())
        });
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], (0, -1));
        assert_eq!(seen[5], (2, 0));
    }

    #[test]
    fn empty_sweep_visits_once() {
        let mut n = 0;
        sweep_named(&[], |_| {
            n += 1;
            ControlFlow::Continue(())
        });
        assert_eq!(n, 1);
    }
}
