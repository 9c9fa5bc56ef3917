//! Bisimulation: partition refinement, a naive fixpoint oracle, quotients and
//! depth-bounded unravelling.
//!
//! The unary predicates compared by (prop) are the state color together with
//! every mark the state carries.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::system::{SystemBuilder, TransitionSystem};

/// Default state bound for [`naive_bisim`].
pub const NAIVE_BOUND: usize = 12;

/// Mark carried by the cut vertices of an unravelling.
pub const FRONTIER: &str = "frontier";

/// Outcome of a bisimilarity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BisimWitness {
    /// A bisimulation containing the pair of initial states, as pairs of
    /// (state of the left system, state of the right system).
    Related(BTreeSet<(usize, usize)>),
    /// The initial states are told apart by a formula of this modal depth.
    Distinguished { depth: usize },
}

impl BisimWitness {
    pub fn is_bisimilar(&self) -> bool {
        matches!(self, BisimWitness::Related(_))
    }

    pub fn relation(&self) -> Option<&BTreeSet<(usize, usize)>> {
        match self {
            BisimWitness::Related(r) => Some(r),
            BisimWitness::Distinguished { .. } => None,
        }
    }
}

/// Signature of the unary predicates holding at `v`.
fn prop_key(s: &TransitionSystem, v: usize) -> (Option<String>, Vec<String>) {
    let marks = s.marks().iter().filter(|(_, set)| set.contains(&v)).map(|(m, _)| m.clone()).collect();
    (s.color(v).map(str::to_owned), marks)
}

/// Flattened view of one or two systems as a single graph.
struct Sum<'a> {
    parts: Vec<&'a TransitionSystem>,
    offset: Vec<usize>,
    n: usize,
}

impl<'a> Sum<'a> {
    fn new(parts: Vec<&'a TransitionSystem>) -> Self {
        let mut offset = Vec::new();
        let mut n = 0;
        for p in &parts {
            offset.push(n);
            n += p.num_states();
        }
        Sum { parts, offset, n }
    }

    fn keys(&self) -> Vec<(Option<String>, Vec<String>)> {
        self.parts.iter().flat_map(|p| (0..p.num_states()).map(move |v| prop_key(p, v))).collect()
    }

    fn edges(&self) -> impl Iterator<Item = (usize, &str, usize)> + '_ {
        self.parts
            .iter()
            .zip(&self.offset)
            .flat_map(|(p, &o)| p.edges().iter().map(move |e| (e.src + o, e.label.as_str(), e.dst + o)))
    }
}

/// Coarsest stable partition of the sum, as a block id per state.
fn refine(sum: &Sum<'_>) -> Vec<usize> {
    let mut ids: BTreeMap<(Option<String>, Vec<String>), usize> = BTreeMap::new();
    let keys = sum.keys();
    for k in &keys {
        let next = ids.len();
        ids.entry(k.clone()).or_insert(next);
    }
    let mut block: Vec<usize> = keys.iter().map(|k| ids[k]).collect();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    for (v, &b) in block.iter().enumerate() {
        members[b].push(v);
    }
    let actions: BTreeSet<&str> = sum.edges().map(|(_, l, _)| l).collect();
    let actions: Vec<&str> = actions.into_iter().collect();
    let act_idx: HashMap<&str, usize> = actions.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let mut pred: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); sum.n]; actions.len()];
    for (s, l, d) in sum.edges() {
        pred[act_idx[l]][d].push(s);
    }
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    let mut queued: BTreeSet<(usize, usize)> = BTreeSet::new();
    for b in 0..members.len() {
        for a in 0..actions.len() {
            queue.push_back((a, b));
            queued.insert((a, b));
        }
    }
    let mut hit = vec![false; sum.n];
    while let Some((a, b)) = queue.pop_front() {
        queued.remove(&(a, b));
        let splitter = members[b].clone();
        let mut touched: Vec<usize> = Vec::new();
        for &t in &splitter {
            for &s in &pred[a][t] {
                if !hit[s] {
                    hit[s] = true;
                    touched.push(s);
                }
            }
        }
        let mut by_block: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &s in &touched {
            by_block.entry(block[s]).or_default().push(s);
        }
        for (c, inside) in by_block {
            if inside.len() < members[c].len() {
                let fresh = members.len();
                let (moved, kept): (Vec<usize>, Vec<usize>) = members[c].iter().partition(|&&v| hit[v]);
                for &v in &moved {
                    block[v] = fresh;
                }
                members[c] = kept;
                members.push(moved);
                for a2 in 0..actions.len() {
                    for blk in [c, fresh] {
                        if queued.insert((a2, blk)) {
                            queue.push_back((a2, blk));
                        }
                    }
                }
            }
        }
        for s in touched {
            hit[s] = false;
        }
    }
    block
}

/// Round-based refinement; returns the first round at which `x` and `y` are
/// separated, or `None` if they never are.
fn separation_depth(sum: &Sum<'_>, x: usize, y: usize) -> Option<usize> {
    let keys = sum.keys();
    let mut class: Vec<usize> = {
        let mut ids = BTreeMap::new();
        keys.iter()
            .map(|k| {
                let n = ids.len();
                *ids.entry(k.clone()).or_insert(n)
            })
            .collect()
    };
    let mut succ: Vec<Vec<(&str, usize)>> = vec![Vec::new(); sum.n];
    for (s, l, d) in sum.edges() {
        succ[s].push((l, d));
    }
    let mut count = class.iter().copied().collect::<BTreeSet<_>>().len();
    let mut round = 0;
    loop {
        if class[x] != class[y] {
            return Some(round);
        }
        let mut ids = BTreeMap::new();
        let next: Vec<usize> = (0..sum.n)
            .map(|v| {
                let out: BTreeSet<(&str, usize)> = succ[v].iter().map(|&(l, d)| (l, class[d])).collect();
                let n = ids.len();
                *ids.entry((class[v], out)).or_insert(n)
            })
            .collect();
        round += 1;
        if ids.len() == count {
            return None;
        }
        count = ids.len();
        class = next;
    }
}

/// Decides `s ∼ t` by partition refinement on the disjoint sum.
pub fn bisimilar(s: &TransitionSystem, t: &TransitionSystem) -> BisimWitness {
    let sum = Sum::new(vec![s, t]);
    let block = refine(&sum);
    let o = s.num_states();
    if block[s.initial()] != block[o + t.initial()] {
        let depth = separation_depth(&sum, s.initial(), o + t.initial()).expect("refinement separates initial states");
        return BisimWitness::Distinguished { depth };
    }
    let block = &block;
    let rel = (0..s.num_states())
        .flat_map(|x| (0..t.num_states()).filter(move |&y| block[x] == block[o + y]).map(move |y| (x, y)))
        .collect();
    BisimWitness::Related(rel)
}

/// Greatest fixpoint of the (prop)/(forth)/(back) refinement over the full
/// product relation.
pub fn naive_bisim(s: &TransitionSystem, t: &TransitionSystem) -> Result<BisimWitness> {
    naive_bisim_bounded(s, t, NAIVE_BOUND)
}

pub fn naive_bisim_bounded(s: &TransitionSystem, t: &TransitionSystem, bound: usize) -> Result<BisimWitness> {
    for sys in [s, t] {
        if sys.num_states() > bound {
            return Err(Error::OverBound { states: sys.num_states(), bound });
        }
    }
    let (n, m) = (s.num_states(), t.num_states());
    let mut rel = vec![vec![false; m]; n];
    for (x, row) in rel.iter_mut().enumerate() {
        for (y, cell) in row.iter_mut().enumerate() {
            *cell = prop_key(s, x) == prop_key(t, y);
        }
    }
    let mut round = 0;
    loop {
        if !rel[s.initial()][t.initial()] {
            return Ok(BisimWitness::Distinguished { depth: round });
        }
        let mut changed = false;
        let mut next = rel.clone();
        for x in 0..n {
            for y in 0..m {
                if !rel[x][y] {
                    continue;
                }
                let forth = s.out_edges(x).all(|e| t.out_edges(y).any(|f| f.label == e.label && rel[e.dst][f.dst]));
                let back = t.out_edges(y).all(|f| s.out_edges(x).any(|e| f.label == e.label && rel[e.dst][f.dst]));
                if !(forth && back) {
                    next[x][y] = false;
                    changed = true;
                }
            }
        }
        rel = next;
        round += 1;
        if !changed {
            break;
        }
    }
    let out = (0..n).flat_map(|x| (0..m).map(move |y| (x, y))).filter(|&(x, y)| rel[x][y]).collect();
    Ok(BisimWitness::Related(out))
}

/// Direct check that `rel` is a bisimulation between `s` and `t` relating
/// the initial states.
pub fn is_bisimulation(s: &TransitionSystem, t: &TransitionSystem, rel: &BTreeSet<(usize, usize)>) -> bool {
    if !rel.contains(&(s.initial(), t.initial())) {
        return false;
    }
    rel.iter().all(|&(x, y)| {
        x < s.num_states()
            && y < t.num_states()
            && prop_key(s, x) == prop_key(t, y)
            && s.out_edges(x).all(|e| t.out_edges(y).any(|f| f.label == e.label && rel.contains(&(e.dst, f.dst))))
            && t.out_edges(y).all(|f| s.out_edges(x).any(|e| f.label == e.label && rel.contains(&(e.dst, f.dst))))
    })
}

/// Bisimilarity class id per state of a single system (ids in first-seen
/// order of state index).
pub fn bisim_classes(s: &TransitionSystem) -> Vec<usize> {
    let block = refine(&Sum::new(vec![s]));
    let mut ids = HashMap::new();
    block
        .iter()
        .map(|b| {
            let n = ids.len();
            *ids.entry(*b).or_insert(n)
        })
        .collect()
}

/// Bisimulation quotient of the reachable part; states are named `q0, q1, ..`
/// in breadth-first order from the initial class.
pub fn quotient(s: &TransitionSystem) -> TransitionSystem {
    let r = s.restrict_reachable();
    let class = bisim_classes(&r);
    let k = class.iter().copied().max().map_or(0, |m| m + 1);
    let mut succ: Vec<BTreeSet<(String, usize)>> = vec![BTreeSet::new(); k];
    for e in r.edges() {
        succ[class[e.src]].insert((e.label.clone(), class[e.dst]));
    }
    let mut rep = vec![usize::MAX; k];
    for v in 0..r.num_states() {
        if rep[class[v]] == usize::MAX {
            rep[class[v]] = v;
        }
    }
    let mut order = vec![usize::MAX; k];
    let mut seq = Vec::new();
    let mut queue = VecDeque::from([class[r.initial()]]);
    order[class[r.initial()]] = 0;
    seq.push(class[r.initial()]);
    while let Some(c) = queue.pop_front() {
        for (_, d) in &succ[c] {
            if order[*d] == usize::MAX {
                order[*d] = seq.len();
                seq.push(*d);
                queue.push_back(*d);
            }
        }
    }
    let mut b = SystemBuilder::new();
    for (i, &c) in seq.iter().enumerate() {
        b.colored_state(format!("q{i}"), r.color(rep[c]));
    }
    for (i, &c) in seq.iter().enumerate() {
        for (l, d) in &succ[c] {
            b.edge(i, l.clone(), order[*d]);
        }
        for (m, set) in r.marks() {
            if set.contains(&rep[c]) {
                b.mark(m.clone(), i);
            }
        }
    }
    b.build(0)
}

/// Finite truncation of the unravelling.
#[derive(Clone, Debug)]
pub struct UnravelTree {
    pub system: TransitionSystem,
    pub depth: usize,
    /// Tree vertex to the state it copies.
    pub projection: Vec<usize>,
}

/// The tree of all paths from the initial state of length at most `depth`.
/// Vertices at exactly that depth carry the [`FRONTIER`] mark.
pub fn unravel(s: &TransitionSystem, depth: usize) -> UnravelTree {
    let mut b = SystemBuilder::new();
    let mut projection = vec![s.initial()];
    let root = b.colored_state("u0", s.color(s.initial()));
    let mut layer = vec![root];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &u in &layer {
            let v = projection[u];
            for e in s.out_edges(v) {
                let c = b.colored_state(format!("u{}", projection.len()), s.color(e.dst));
                projection.push(e.dst);
                b.edge(u, e.label.clone(), c);
                next.push(c);
            }
        }
        layer = next;
    }
    for &u in &layer {
        b.mark(FRONTIER, u);
    }
    for (u, &v) in projection.iter().enumerate() {
        for (m, set) in s.marks() {
            if set.contains(&v) {
                b.mark(m.clone(), u);
            }
        }
    }
    UnravelTree { system: b.build(root), depth, projection }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(labels: &[&str]) -> TransitionSystem {
        let mut b = SystemBuilder::new();
        let v: Vec<usize> = (0..labels.len()).map(|i| b.state(format!("s{i}"))).collect();
        for (i, l) in labels.iter().enumerate() {
            b.edge(v[i], *l, v[(i + 1) % labels.len()]);
        }
        b.build(v[0])
    }

    #[test]
    fn self_loop_vs_two_cycle() {
        let (a, b) = (cycle(&["a"]), cycle(&["a", "a"]));
        let w = bisimilar(&a, &b);
        assert!(is_bisimulation(&a, &b, w.relation().unwrap()));
        assert!(naive_bisim(&a, &b).unwrap().is_bisimilar());
    }

    #[test]
    fn different_labels() {
        let w = bisimilar(&cycle(&["a"]), &cycle(&["b"]));
        assert_eq!(w, BisimWitness::Distinguished { depth: 1 });
        assert_eq!(naive_bisim(&cycle(&["a"]), &cycle(&["b"])).unwrap(), w);
    }

    #[test]
    fn isolated_states() {
        let mut b = SystemBuilder::new();
        let x = b.state("x");
        let s = b.build(x);
        assert!(naive_bisim(&s, &s.clone()).unwrap().is_bisimilar());
        let r = naive_bisim(&cycle(&["a", "b"]), &cycle(&["a", "b"])).unwrap();
        assert!(r.relation().unwrap().contains(&(1, 1)));
    }

    #[test]
    fn naive_over_bound() {
        let big = cycle(&["a"; 13]);
        assert!(matches!(naive_bisim(&big, &big), Err(Error::OverBound { states: 13, bound: 12 })));
    }

    #[test]
    fn quotient_collapses() {
        assert_eq!(quotient(&cycle(&["a", "a"])).num_states(), 1);
        let mut b = SystemBuilder::new();
        let s = b.state("s");
        let t = b.state("t");
        b.edge(s, "a", s);
        b.edge(s, "a", t);
        b.edge(t, "a", t);
        let sys = b.build(s);
        let rel: BTreeSet<(usize, usize)> = [(s, t), (t, t), (s, s)].into_iter().collect();
        assert!(is_bisimulation(&sys, &sys.with_initial(t), &rel));
        let q = quotient(&sys);
        assert_eq!(q.num_states(), 1);
        assert!(bisimilar(&q, &sys).is_bisimilar());
    }

    #[test]
    fn minimal_system_is_kept() {
        let c = cycle(&["a", "b"]);
        assert!(quotient(&c).is_isomorphic(&c));
    }

    #[test]
    fn unravel_self_loop() {
        let t = unravel(&cycle(&["a"]), 3);
        assert_eq!(t.system.num_states(), 4);
        assert_eq!(t.system.marks()[FRONTIER].len(), 1);
        assert_eq!(unravel(&cycle(&["a"]), 0).system.num_states(), 1);
    }

    #[test]
    fn marks_matter() {
        let a = cycle(&["a"]);
        let mut b = SystemBuilder::new();
        let x = b.state("x");
        b.edge(x, "a", x);
        b.mark("m", x);
        assert_eq!(bisimilar(&a, &b.build(x)), BisimWitness::Distinguished { depth: 0 });
    }
}
