//! Quantitative probabilistic bisimulation: checking a partition, building
//! the quotient, refining to the coarsest such partition, and generating
//! partitions from data and order abstractions.

mod syntactic;

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::hash::Hash;

use hashbrown::HashMap;
use num_traits::Zero;

use crate::num::Q;
use crate::solve::{Branch, Mdp, MdpAction, MdpState};

pub use syntactic::{
    abstraction_partition, check_data_abstraction, check_order_abstraction, directive_slots,
    AbstractionError,
};

/// Equivalence classes over the states of an MDP, numbered by first member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub class_of: Vec<usize>,
    pub n_classes: usize,
}

impl Partition {
    pub fn identity(n: usize) -> Self {
        Partition {
            class_of: (0..n).collect(),
            n_classes: n,
        }
    }

    /// States with equal keys share a class.
    pub fn from_keys<K: Hash + Eq>(keys: impl IntoIterator<Item = K>) -> Self {
        let mut ids: HashMap<K, usize> = HashMap::new();
        let mut class_of = Vec::new();
        for k in keys {
            let next = ids.len();
            class_of.push(*ids.entry(k).or_insert(next));
        }
        Partition {
            n_classes: ids.len(),
            class_of,
        }
    }

    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_classes];
        for (s, &c) in self.class_of.iter().enumerate() {
            out[c].push(s);
        }
        out
    }
}

/// Per action label: probability mass moved into each (class, weight) pair.
type Signature = Vec<(u64, Vec<(usize, Q, Q)>)>;

fn signature(st: &MdpState, class_of: &[usize]) -> Signature {
    let mut sig = Vec::with_capacity(st.actions.len());
    for a in &st.actions {
        let mut per: BTreeMap<(usize, &Q), Q> = BTreeMap::new();
        for b in &a.branches {
            *per.entry((class_of[b.target], &b.weight))
                .or_insert_with(Q::zero) += &b.prob;
        }
        sig.push((
            a.label,
            per.into_iter()
                .map(|((c, w), p)| (c, w.clone(), p))
                .collect(),
        ));
    }
    sig.sort();
    sig
}

/// Whether `p` is a quantitative probabilistic bisimulation of `m`: classes
/// do not mix bad and safe states; equivalent safe states enable the same
/// action labels and, under each label, move the same probability mass into
/// every class at every weight.
pub fn check_qpb(m: &Mdp, p: &Partition) -> bool {
    if p.class_of.len() != m.states.len() {
        return false;
    }
    let mut reps: Vec<Option<(bool, Option<Signature>)>> = vec![None; p.n_classes];
    for (s, st) in m.states.iter().enumerate() {
        let c = p.class_of[s];
        let sig = if st.bad {
            None
        } else {
            Some(signature(st, &p.class_of))
        };
        match &reps[c] {
            None => reps[c] = Some((st.bad, sig)),
            Some((bad, rep)) => {
                if *bad != st.bad || *rep != sig {
                    return false;
                }
            }
        }
    }
    true
}

/// The quotient MDP over the classes of `p`, which must pass [`check_qpb`].
pub fn quotient(m: &Mdp, p: &Partition) -> Option<Mdp> {
    if !check_qpb(m, p) {
        return None;
    }
    let mut states = Vec::with_capacity(p.n_classes);
    let mut rep = vec![usize::MAX; p.n_classes];
    for (s, &c) in p.class_of.iter().enumerate() {
        if rep[c] == usize::MAX {
            rep[c] = s;
        }
    }
    for (c, &s) in rep.iter().enumerate() {
        let st = &m.states[s];
        if st.bad {
            states.push(MdpState {
                bad: true,
                actions: vec![MdpAction {
                    label: crate::game::BAD_LABEL,
                    branches: vec![Branch::dirac(c, Q::zero())],
                }],
            });
            continue;
        }
        let sig = signature(st, &p.class_of);
        let actions = sig
            .into_iter()
            .map(|(label, per)| MdpAction {
                label,
                branches: per
                    .into_iter()
                    .map(|(t, w, pr)| Branch::new(t, pr, w))
                    .collect(),
            })
            .collect();
        states.push(MdpState {
            bad: false,
            actions,
        });
    }
    Some(Mdp {
        initial: p.class_of[m.initial],
        states,
    })
}

/// Coarsest quantitative probabilistic bisimulation, by signature
/// refinement from the bad/safe split.
pub fn minimize(m: &Mdp) -> Partition {
    let n = m.states.len();
    let mut p = Partition::from_keys(m.states.iter().map(|s| s.bad));
    loop {
        let refined = Partition::from_keys((0..n).map(|s| {
            let sig = if m.states[s].bad {
                None
            } else {
                Some(signature(&m.states[s], &p.class_of))
            };
            (p.class_of[s], sig)
        }));
        if refined.n_classes == p.n_classes {
            return p;
        }
        p = refined;
    }
}
