//! Exact linear solvers over the rationals.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::num::Q;

/// Solves the square system `A x = b`, where row `i` of `A` is given as
/// sparse `(column, coefficient)` pairs. Returns `None` when singular.
///
/// Columns are eliminated in natural order; each pivot is the remaining row
/// with the fewest nonzeros that mentions the column.
pub fn solve_sparse(n: usize, rows: Vec<Vec<(usize, Q)>>, rhs: Vec<Q>) -> Option<Vec<Q>> {
    assert_eq!(rows.len(), n);
    assert_eq!(rhs.len(), n);
    let mut a: Vec<BTreeMap<usize, Q>> = Vec::with_capacity(n);
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (r, row) in rows.into_iter().enumerate() {
        let mut m = BTreeMap::new();
        for (c, v) in row {
            if v.is_zero() {
                continue;
            }
            let e = m.entry(c).or_insert_with(Q::zero);
            *e += v;
        }
        m.retain(|_, v: &mut Q| !v.is_zero());
        for &c in m.keys() {
            col_rows[c].insert(r);
        }
        a.push(m);
    }
    let mut b = rhs;
    let mut pivoted = vec![false; n];
    let mut order: Vec<(usize, usize)> = Vec::with_capacity(n);
    for c in 0..n {
        let p = col_rows[c]
            .iter()
            .copied()
            .filter(|&r| !pivoted[r])
            .min_by_key(|&r| (a[r].len(), r))?;
        pivoted[p] = true;
        order.push((c, p));
        let targets: Vec<usize> = col_rows[c]
            .iter()
            .copied()
            .filter(|&r| !pivoted[r])
            .collect();
        if targets.is_empty() {
            continue;
        }
        let pivot_row: Vec<(usize, Q)> = a[p].iter().map(|(&k, v)| (k, v.clone())).collect();
        let pivot_val = a[p][&c].clone();
        let pivot_b = b[p].clone();
        for r in targets {
            let factor = &a[r][&c] / &pivot_val;
            for (k, v) in &pivot_row {
                let delta = &factor * v;
                let entry = a[r].entry(*k).or_insert_with(Q::zero);
                *entry -= delta;
                if entry.is_zero() {
                    a[r].remove(k);
                    col_rows[*k].remove(&r);
                } else {
                    col_rows[*k].insert(r);
                }
            }
            let delta = &factor * &pivot_b;
            b[r] -= delta;
        }
    }
    let mut x = vec![Q::zero(); n];
    for &(c, p) in order.iter().rev() {
        let mut acc = b[p].clone();
        for (&k, v) in &a[p] {
            if k != c {
                acc -= v * &x[k];
            }
        }
        x[c] = acc / &a[p][&c];
    }
    Some(x)
}

/// Dense Gaussian elimination on an `n × (n+1)` augmented matrix.
pub fn solve_dense(mut m: Vec<Vec<Q>>) -> Option<Vec<Q>> {
    let n = m.len();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(c, p);
        let inv = Q::one() / &m[c][c];
        for k in c..=n {
            let v = &m[c][k] * &inv;
            m[c][k] = v;
        }
        for r in 0..n {
            if r == c || m[r][c].is_zero() {
                continue;
            }
            let f = m[r][c].clone();
            for k in c..=n {
                let d = &f * &m[c][k];
                m[r][k] -= d;
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{q, ratio};

    #[test]
    fn two_by_two() {
        // 2x + y = 5, x - y = 1
        let rows = vec![vec![(0, q(2)), (1, q(1))], vec![(0, q(1)), (1, q(-1))]];
        assert_eq!(
            solve_sparse(2, rows, vec![q(5), q(1)]),
            Some(vec![q(2), q(1)])
        );
        let dense = vec![vec![q(2), q(1), q(5)], vec![q(1), q(-1), q(1)]];
        assert_eq!(solve_dense(dense), Some(vec![q(2), q(1)]));
    }

    #[test]
    fn singular_detected() {
        let rows = vec![vec![(0, q(1)), (1, q(1))], vec![(0, q(2)), (1, q(2))]];
        assert_eq!(solve_sparse(2, rows, vec![q(1), q(2)]), None);
    }

    #[test]
    fn fractional_solution() {
        let rows = vec![vec![(0, q(3))], vec![(0, q(1)), (1, q(7))]];
        assert_eq!(
            solve_sparse(2, rows, vec![q(1), q(1)]),
            Some(vec![ratio(1, 3), ratio(2, 21)])
        );
    }
}
