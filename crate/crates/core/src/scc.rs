//! Strongly connected components and their shape.

use std::collections::BTreeSet;

use crate::system::TransitionSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SccKind {
    /// One state without a self-loop.
    SingletonNoLoop,
    /// A simple cycle: every member has exactly one edge inside the component.
    Cycle,
    /// Anything else; contains two distinct cycles.
    Other,
}

/// Condensation of a system. Components are numbered in reverse topological
/// order: every edge goes from a component to one with a smaller or equal id.
#[derive(Clone, Debug)]
pub struct Condensation {
    pub comp: Vec<usize>,
    pub members: Vec<Vec<usize>>,
    pub kinds: Vec<SccKind>,
    /// Successor components, excluding self.
    pub succ: Vec<BTreeSet<usize>>,
}

impl Condensation {
    pub fn of(s: &TransitionSystem) -> Self {
        let comp = tarjan(s);
        let k = comp.iter().copied().max().map_or(0, |m| m + 1);
        let mut members = vec![Vec::new(); k];
        for (v, &c) in comp.iter().enumerate() {
            members[c].push(v);
        }
        let mut inner = vec![0usize; s.num_states()];
        let mut succ = vec![BTreeSet::new(); k];
        for e in s.edges() {
            if comp[e.src] == comp[e.dst] {
                inner[e.src] += 1;
            } else {
                succ[comp[e.src]].insert(comp[e.dst]);
            }
        }
        let kinds = members
            .iter()
            .map(|m| {
                if m.len() == 1 && inner[m[0]] == 0 {
                    SccKind::SingletonNoLoop
                } else if m.iter().all(|&v| inner[v] == 1) {
                    SccKind::Cycle
                } else {
                    SccKind::Other
                }
            })
            .collect();
        Condensation { comp, members, kinds, succ }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// True iff `v` lies on some cycle.
    pub fn on_cycle(&self, v: usize) -> bool {
        self.kinds[self.comp[v]] != SccKind::SingletonNoLoop
    }
}

/// Component id per state (Tarjan, iterative). Ids come out in reverse
/// topological order.
pub fn tarjan(s: &TransitionSystem) -> Vec<usize> {
    let n = s.num_states();
    let succ: Vec<Vec<usize>> = (0..n).map(|v| s.out_edges(v).map(|e| e.dst).collect()).collect();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < succ[v].len() {
                let w = succ[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::SystemBuilder;

    #[test]
    fn kinds() {
        let mut b = SystemBuilder::new();
        let v: Vec<usize> = (0..5).map(|i| b.state(format!("s{i}"))).collect();
        b.edge(v[0], "a", v[1]);
        b.edge(v[1], "a", v[2]);
        b.edge(v[2], "a", v[1]);
        b.edge(v[2], "a", v[3]);
        b.edge(v[3], "a", v[3]);
        b.edge(v[3], "b", v[3]);
        b.edge(v[3], "a", v[4]);
        let s = b.build(v[0]);
        let c = Condensation::of(&s);
        assert_eq!(c.len(), 4);
        assert_eq!(c.kinds[c.comp[v[0]]], SccKind::SingletonNoLoop);
        assert_eq!(c.kinds[c.comp[v[1]]], SccKind::Cycle);
        assert_eq!(c.comp[v[1]], c.comp[v[2]]);
        assert_eq!(c.kinds[c.comp[v[3]]], SccKind::Other);
        assert_eq!(c.kinds[c.comp[v[4]]], SccKind::SingletonNoLoop);
        for e in s.edges() {
            assert!(c.comp[e.src] >= c.comp[e.dst]);
        }
    }

    #[test]
    fn self_loop_is_cycle() {
        let mut b = SystemBuilder::new();
        let x = b.state("x");
        b.edge(x, "a", x);
        let c = Condensation::of(&b.build(x));
        assert_eq!(c.kinds, vec![SccKind::Cycle]);
        assert!(c.on_cycle(x));
    }
}
