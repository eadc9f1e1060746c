//! Long-run averages of irreducible chains by renewal-reward state
//! elimination, over the rationals or modulo word-sized primes.
//!
//! Exact elimination on a few thousand states spends nearly all its time
//! on the size of intermediate fractions, even when the final average is
//! small. Large chains are therefore eliminated modulo a sequence of primes
//! and the average is recovered by Chinese remaindering and rational
//! reconstruction.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::num::Q;

/// Chains up to this size are eliminated over the rationals directly.
pub const EXACT_LIMIT: usize = 256;
/// Extra primes that must reproduce a reconstructed average before it is
/// accepted without reaching the worst-case bound.
pub const CONFIRMATIONS: usize = 3;

/// Field operations used by the elimination.
trait Field {
    type T: Clone;
    fn zero(&self) -> Self::T;
    fn one(&self) -> Self::T;
    fn add(&self, a: &Self::T, b: &Self::T) -> Self::T;
    fn sub(&self, a: &Self::T, b: &Self::T) -> Self::T;
    fn mul(&self, a: &Self::T, b: &Self::T) -> Self::T;
    /// `None` for zero.
    fn inv(&self, a: &Self::T) -> Option<Self::T>;
}

struct Rationals;

impl Field for Rationals {
    type T = Q;
    fn zero(&self) -> Q {
        Q::zero()
    }
    fn one(&self) -> Q {
        Q::one()
    }
    fn add(&self, a: &Q, b: &Q) -> Q {
        a + b
    }
    fn sub(&self, a: &Q, b: &Q) -> Q {
        a - b
    }
    fn mul(&self, a: &Q, b: &Q) -> Q {
        a * b
    }
    fn inv(&self, a: &Q) -> Option<Q> {
        (!a.is_zero()).then(|| a.recip())
    }
}

struct Modular(u64);

impl Modular {
    fn pow(&self, mut b: u64, mut e: u64) -> u64 {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        r
    }

    fn reduce(&self, x: &BigInt) -> u64 {
        let m = BigInt::from(self.0);
        x.mod_floor(&m).to_u64().expect("residue fits a word")
    }

    /// Image of a rational, `None` when its denominator vanishes mod p.
    fn of(&self, x: &Q) -> Option<u64> {
        let d = self.inv(&self.reduce(x.denom()))?;
        Some(self.mul(&self.reduce(x.numer()), &d))
    }
}

impl Field for Modular {
    type T = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.0 as u128) as u64
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        (*a != 0).then(|| self.pow(*a, self.0 - 2))
    }
}

#[derive(Clone)]
struct Edge<T> {
    p: T,
    cost: T,
    time: T,
}

/// Average reward of an irreducible chain: states other than 0 are removed
/// cheapest first (fewest in-edges times out-edges) and their loops spliced
/// into the bypassing edges. Each edge keeps its probability and the
/// probability mass of the cost and of the number of steps along it, so the
/// final loop at state 0 gives the expected cost and length of a return
/// cycle. `None` when a pivot vanishes, which over a prime field means the
/// prime was unlucky.
fn eliminate<F: Field>(f: &F, rows: &[Vec<(usize, F::T)>], reward: &[F::T]) -> Option<F::T> {
    let merge = |into: &mut BTreeMap<usize, Edge<F::T>>, to: usize, e: Edge<F::T>| match into
        .get_mut(&to)
    {
        Some(old) => {
            old.p = f.add(&old.p, &e.p);
            old.cost = f.add(&old.cost, &e.cost);
            old.time = f.add(&old.time, &e.time);
        }
        None => {
            into.insert(to, e);
        }
    };
    let n = rows.len();
    let mut out: Vec<BTreeMap<usize, Edge<F::T>>> = vec![BTreeMap::new(); n];
    let mut inc: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (u, row) in rows.iter().enumerate() {
        for (v, p) in row {
            merge(
                &mut out[u],
                *v,
                Edge {
                    p: p.clone(),
                    cost: f.mul(p, &reward[u]),
                    time: p.clone(),
                },
            );
            inc[*v].insert(u);
        }
    }
    let degree = |out: &[BTreeMap<usize, Edge<F::T>>], inc: &[BTreeSet<usize>], s: usize| {
        let o = out[s].keys().filter(|&&v| v != s).count();
        let i = inc[s].iter().filter(|&&u| u != s).count();
        i * o
    };
    let mut key: Vec<usize> = (0..n).map(|s| degree(&out, &inc, s)).collect();
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (1..n).map(|s| Reverse((key[s], s))).collect();
    let mut gone = vec![false; n];
    while let Some(Reverse((d, s))) = heap.pop() {
        if gone[s] || d != key[s] {
            continue;
        }
        gone[s] = true;
        let mut succ = core::mem::take(&mut out[s]);
        let own = succ.remove(&s);
        let preds: Vec<usize> = core::mem::take(&mut inc[s])
            .into_iter()
            .filter(|&u| u != s)
            .collect();
        // A geometric number of turns around the loop: scale by 1/(1-p) and
        // add the loop's expected cost and length.
        let (scale, loop_cost, loop_time) = match own {
            Some(l) => {
                let scale = f.inv(&f.sub(&f.one(), &l.p))?;
                let lc = f.mul(&l.cost, &scale);
                let lt = f.mul(&l.time, &scale);
                (scale, lc, lt)
            }
            None => (f.one(), f.zero(), f.zero()),
        };
        for &v in succ.keys() {
            inc[v].remove(&s);
        }
        let mut touched = BTreeSet::new();
        for u in preds {
            let a = out[u].remove(&s).expect("in-edge has an out-edge");
            let ap = f.mul(&a.p, &scale);
            let ac = f.add(&f.mul(&a.cost, &scale), &f.mul(&ap, &loop_cost));
            let at = f.add(&f.mul(&a.time, &scale), &f.mul(&ap, &loop_time));
            for (&v, b) in &succ {
                let e = Edge {
                    p: f.mul(&ap, &b.p),
                    cost: f.add(&f.mul(&ac, &b.p), &f.mul(&ap, &b.cost)),
                    time: f.add(&f.mul(&at, &b.p), &f.mul(&ap, &b.time)),
                };
                merge(&mut out[u], v, e);
                inc[v].insert(u);
                touched.insert(v);
            }
            touched.insert(u);
        }
        for t in touched {
            if t != 0 && !gone[t] {
                let d = degree(&out, &inc, t);
                if d != key[t] {
                    key[t] = d;
                    heap.push(Reverse((d, t)));
                }
            }
        }
    }
    let l = out[0].get(&0)?;
    Some(f.mul(&l.cost, &f.inv(&l.time)?))
}

/// Long-run average reward of an irreducible chain given as sparse rows of
/// `(successor, probability)` and per-state expected rewards.
pub fn stationary_average(rows: &[Vec<(usize, Q)>], reward: &[Q]) -> Q {
    if rows.len() <= EXACT_LIMIT {
        eliminate(&Rationals, rows, reward).expect("irreducible chain")
    } else {
        multimodular_average(rows, reward)
    }
}

/// Same as [`stationary_average`], always computed over the rationals.
pub fn stationary_average_exact(rows: &[Vec<(usize, Q)>], reward: &[Q]) -> Q {
    eliminate(&Rationals, rows, reward).expect("irreducible chain")
}

/// Same as [`stationary_average`], always computed by the multi-modular route.
pub fn multimodular_average(rows: &[Vec<(usize, Q)>], reward: &[Q]) -> Q {
    let limit = reconstruction_bits(rows, reward);
    let mut modulus = BigInt::one();
    let mut residue = BigInt::zero();
    let mut last: Option<Q> = None;
    let mut agreed = 0;
    for p in Primes::new() {
        let field = Modular(p);
        let Some(image) = project(&field, rows, reward) else {
            continue;
        };
        let Some(avg) = eliminate(&field, &image.0, &image.1) else {
            continue;
        };
        // Does the current candidate already predict this residue?
        if let Some(c) = &last {
            if field.of(c) == Some(avg) {
                agreed += 1;
            } else {
                agreed = 0;
                last = None;
            }
        }
        crt_step(&mut residue, &mut modulus, avg, p);
        if last.is_none() {
            last = reconstruct(&residue, &modulus);
        }
        if last.is_some() && (agreed >= CONFIRMATIONS || modulus.bits() > limit) {
            return last.expect("checked above");
        }
        assert!(
            modulus.bits() <= limit + 64,
            "reconstruction failed within the determinant bound"
        );
    }
    unreachable!("the prime sequence is unbounded")
}

fn project(
    f: &Modular,
    rows: &[Vec<(usize, Q)>],
    reward: &[Q],
) -> Option<(Vec<Vec<(usize, u64)>>, Vec<u64>)> {
    let mut rs = Vec::with_capacity(rows.len());
    for row in rows {
        let mut r = Vec::with_capacity(row.len());
        for (t, p) in row {
            r.push((*t, f.of(p)?));
        }
        rs.push(r);
    }
    let w = reward
        .iter()
        .map(|x| f.of(x))
        .collect::<Option<Vec<u64>>>()?;
    Some((rs, w))
}

/// Bits of modulus after which reconstruction is guaranteed. The average is
/// a ratio of sums of cofactors of the row-scaled generator matrix, bounded
/// by Hadamard's inequality; the modulus must exceed twice the product of
/// the numerator and denominator bounds.
fn reconstruction_bits(rows: &[Vec<(usize, Q)>], reward: &[Q]) -> u64 {
    let n = rows.len() as u64;
    let mut hadamard = 0u64;
    let mut max_scale = 0u64;
    for (u, row) in rows.iter().enumerate() {
        let l = row
            .iter()
            .fold(BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()));
        max_scale = max_scale.max(l.bits());
        let mut entries: BTreeMap<usize, Q> = BTreeMap::new();
        *entries.entry(u).or_insert_with(Q::zero) += Q::one();
        for (t, p) in row {
            *entries.entry(*t).or_insert_with(Q::zero) -= p;
        }
        let sq = entries.values().fold(BigInt::zero(), |acc, x| {
            let v = (x * Q::from_integer(l.clone())).to_integer();
            acc + &v * &v
        });
        hadamard += sq.bits() / 2 + 1;
    }
    let lr = reward
        .iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let max_r = reward
        .iter()
        .map(|r| (r * Q::from_integer(lr.clone())).to_integer().abs().bits())
        .max()
        .unwrap_or(0);
    let log_n = 64 - n.leading_zeros() as u64;
    let num = log_n + max_r + max_scale + hadamard;
    let den = lr.bits() + log_n + max_scale + hadamard;
    num + den + 2
}

fn crt_step(residue: &mut BigInt, modulus: &mut BigInt, r: u64, p: u64) {
    let f = Modular(p);
    let cur = f.reduce(residue);
    let m_inv = f.inv(&f.reduce(modulus)).expect("distinct primes");
    let k = f.mul(&f.sub(&r, &cur), &m_inv);
    *residue += &*modulus * BigInt::from(k);
    *modulus *= BigInt::from(p);
}

/// The fraction `a/b` with `|a|, b < sqrt(m/2)` congruent to `r` mod `m`,
/// if one exists.
fn reconstruct(r: &BigInt, m: &BigInt) -> Option<Q> {
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), r.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let (qt, rem) = r0.div_rem(&r1);
        r0 = core::mem::replace(&mut r1, rem);
        let t2 = &t0 - &qt * &t1;
        t0 = core::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    Some(Q::new(r1, t1))
}

/// Descending primes below 2^62.
struct Primes(u64);

impl Primes {
    fn new() -> Self {
        Primes(1 << 62)
    }
}

impl Iterator for Primes {
    type Item = u64;
    fn next(&mut self) -> Option<u64> {
        loop {
            self.0 -= 1;
            if is_prime(self.0) {
                return Some(self.0);
            }
        }
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let f = Modular(n);
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = f.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = f.mul(&x, &x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
