//! Strongly connected components (iterative Tarjan).

use alloc::vec;
use alloc::vec::Vec;

/// Compressed adjacency lists.
#[derive(Clone, Debug, Default)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Graph {
    pub fn from_lists(lists: &[Vec<usize>]) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for l in lists {
            targets.extend_from_slice(l);
            offsets.push(targets.len());
        }
        Graph { offsets, targets }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn succ(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Components in reverse topological order (every edge leaving a component
/// points to one listed earlier), plus the component index of each node.
pub struct Components {
    pub comps: Vec<Vec<usize>>,
    pub comp_of: Vec<usize>,
}

impl Components {
    /// A component is bottom when no edge leaves it.
    pub fn is_bottom(&self, g: &Graph, c: usize) -> bool {
        self.comps[c]
            .iter()
            .all(|&v| g.succ(v).iter().all(|&w| self.comp_of[w] == c))
    }

    /// Whether the component contains at least one edge (a cycle).
    pub fn is_cyclic(&self, g: &Graph, c: usize) -> bool {
        let comp = &self.comps[c];
        comp.len() > 1 || g.succ(comp[0]).contains(&comp[0])
    }
}

const UNSEEN: usize = usize::MAX;

pub fn tarjan(g: &Graph) -> Components {
    let n = g.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut comp_of = vec![UNSEEN; n];
    let mut counter = 0usize;
    let mut call: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let succ = g.succ(v);
            if *pos < succ.len() {
                let w = succ[*pos];
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp_of[w] = comps.len();
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    Components { comps, comp_of }
}

/// Nodes reachable from `start`, as a membership mask.
pub fn reachable(g: &Graph, start: usize) -> Vec<bool> {
    let mut seen = vec![false; g.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(v) = stack.pop() {
        for &w in g.succ(v) {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}
