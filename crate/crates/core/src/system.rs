//! Finite pointed transition systems and their structural operations.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::{Color, Label};

/// Marker predicate added to the left summand of a disjoint union.
pub const LEFT: &str = "Left";
/// Marker predicate added to the right summand of a disjoint union.
pub const RIGHT: &str = "Right";

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: usize,
    pub label: Label,
    pub dst: usize,
}

/// A finite transition system `<S, (E_a), (P_i), s0>`.
///
/// States carry at most one color. Additional unary predicates that are not
/// colors (the `Left`/`Right` markers of a disjoint union, fusion markers,
/// unravelling frontiers) live in `marks` and may overlap freely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSystem {
    states: Vec<String>,
    index: HashMap<String, usize>,
    colors: Vec<Option<Color>>,
    edges: Vec<Edge>,
    succ: Vec<Vec<usize>>,
    initial: usize,
    marks: BTreeMap<String, BTreeSet<usize>>,
}

/// Index-based builder. State names must be unique; duplicate edges are
/// dropped on `build`.
#[derive(Clone, Debug, Default)]
pub struct SystemBuilder {
    states: Vec<String>,
    index: HashMap<String, usize>,
    colors: Vec<Option<Color>>,
    edges: Vec<Edge>,
    marks: BTreeMap<String, BTreeSet<usize>>,
}

impl SystemBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a state (or returns the existing one with that name).
    pub fn state(&mut self, name: impl Into<String>) -> usize {
        let name = name.into();
        if let Some(&i) = self.index.get(&name) {
            return i;
        }
        let i = self.states.len();
        self.index.insert(name.clone(), i);
        self.states.push(name);
        self.colors.push(None);
        i
    }

    pub fn colored_state(&mut self, name: impl Into<String>, color: Option<&str>) -> usize {
        let i = self.state(name);
        self.colors[i] = color.map(str::to_owned);
        i
    }

    pub fn set_color(&mut self, state: usize, color: Option<&str>) {
        self.colors[state] = color.map(str::to_owned);
    }

    pub fn edge(&mut self, src: usize, label: impl Into<Label>, dst: usize) {
        self.edges.push(Edge { src, label: label.into(), dst });
    }

    pub fn mark(&mut self, name: impl Into<String>, state: usize) {
        self.marks.entry(name.into()).or_default().insert(state);
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn build(self, initial: usize) -> TransitionSystem {
        assert!(initial < self.states.len(), "initial state out of range");
        let mut edges = self.edges;
        edges.sort();
        edges.dedup();
        let mut succ = vec![Vec::new(); self.states.len()];
        for (i, e) in edges.iter().enumerate() {
            succ[e.src].push(i);
        }
        let marks = self.marks.into_iter().filter(|(_, s)| !s.is_empty()).collect();
        TransitionSystem {
            states: self.states,
            index: self.index,
            colors: self.colors,
            edges,
            succ,
            initial,
            marks,
        }
    }
}

impl TransitionSystem {
    /// Validating constructor from named parts.
    pub fn from_parts<S, C, E>(states: S, initial: &str, colors: C, edges: E) -> Result<Self>
    where
        S: IntoIterator<Item = String>,
        C: IntoIterator<Item = (String, String)>,
        E: IntoIterator<Item = (String, String, String)>,
    {
        let mut b = SystemBuilder::new();
        for s in states {
            if b.contains(&s) {
                return Err(Error::Invalid(format!("duplicate state `{s}`")));
            }
            b.state(s);
        }
        let lookup = |b: &SystemBuilder, s: &str| {
            b.index
                .get(s)
                .copied()
                .ok_or_else(|| Error::Invalid(format!("undeclared state `{s}`")))
        };
        let init = lookup(&b, initial).map_err(|_| Error::Invalid(format!("initial state `{initial}` is not declared")))?;
        for (s, c) in colors {
            let i = lookup(&b, &s)?;
            if let Some(prev) = &b.colors[i] {
                if *prev != c {
                    return Err(Error::Invalid(format!("state `{s}` has two colors `{prev}` and `{c}`")));
                }
            }
            b.colors[i] = Some(c);
        }
        for (src, label, dst) in edges {
            let s = lookup(&b, &src)?;
            let d = lookup(&b, &dst)?;
            b.edge(s, label, d);
        }
        Ok(b.build(init))
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn state_name(&self, i: usize) -> &str {
        &self.states[i]
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn color(&self, i: usize) -> Option<&str> {
        self.colors[i].as_deref()
    }

    pub fn colors(&self) -> &[Option<Color>] {
        &self.colors
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn marks(&self) -> &BTreeMap<String, BTreeSet<usize>> {
        &self.marks
    }

    pub fn is_marked(&self, mark: &str, state: usize) -> bool {
        self.marks.get(mark).is_some_and(|s| s.contains(&state))
    }

    /// Outgoing edges of `state`, sorted by label then target.
    pub fn out_edges(&self, state: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.succ[state].iter().map(move |&i| &self.edges[i])
    }

    pub fn out_degree(&self, state: usize) -> usize {
        self.succ[state].len()
    }

    /// Sorted, de-duplicated action labels.
    pub fn actions(&self) -> BTreeSet<Label> {
        self.edges.iter().map(|e| e.label.clone()).collect()
    }

    /// Sorted set of colors in use.
    pub fn color_set(&self) -> BTreeSet<Color> {
        self.colors.iter().flatten().cloned().collect()
    }

    pub fn with_initial(&self, initial: usize) -> Self {
        let mut s = self.clone();
        s.initial = initial;
        s
    }

    /// `reach[s]` is true iff `s` is reachable from `from`.
    pub fn reachable_from(&self, from: usize) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(s) = stack.pop() {
            for e in self.out_edges(s) {
                if !seen[e.dst] {
                    seen[e.dst] = true;
                    stack.push(e.dst);
                }
            }
        }
        seen
    }

    pub fn reachable(&self) -> Vec<bool> {
        self.reachable_from(self.initial)
    }

    /// Sub-system induced by `keep`, preserving state names and order.
    pub fn induced(&self, keep: &[bool], initial: usize) -> Self {
        assert!(keep[initial]);
        let mut b = SystemBuilder::new();
        let mut map = vec![usize::MAX; self.num_states()];
        for s in 0..self.num_states() {
            if keep[s] {
                map[s] = b.colored_state(self.states[s].clone(), self.color(s));
            }
        }
        for e in &self.edges {
            if keep[e.src] && keep[e.dst] {
                b.edge(map[e.src], e.label.clone(), map[e.dst]);
            }
        }
        for (m, set) in &self.marks {
            for &s in set {
                if keep[s] {
                    b.mark(m.clone(), map[s]);
                }
            }
        }
        b.build(map[initial])
    }

    /// Restriction to the states reachable from the initial state.
    pub fn restrict_reachable(&self) -> Self {
        self.induced(&self.reachable(), self.initial)
    }

    /// The system rooted at `state`, restricted to what it reaches.
    pub fn rooted_at(&self, state: usize) -> Self {
        self.induced(&self.reachable_from(state), state)
    }

    /// Copy with every state name prefixed.
    pub fn prefixed(&self, prefix: &str) -> Self {
        let mut b = SystemBuilder::new();
        for s in 0..self.num_states() {
            b.colored_state(format!("{prefix}{}", self.states[s]), self.color(s));
        }
        for e in &self.edges {
            b.edge(e.src, e.label.clone(), e.dst);
        }
        for (m, set) in &self.marks {
            for &s in set {
                b.mark(m.clone(), s);
            }
        }
        b.build(self.initial)
    }

    /// Copy of this system into `b`; returns the index map.
    pub fn copy_into(&self, b: &mut SystemBuilder, prefix: &str) -> Vec<usize> {
        let map: Vec<usize> = (0..self.num_states())
            .map(|s| b.colored_state(format!("{prefix}{}", self.states[s]), self.color(s)))
            .collect();
        for e in &self.edges {
            b.edge(map[e.src], e.label.clone(), map[e.dst]);
        }
        for (m, set) in &self.marks {
            for &s in set {
                b.mark(m.clone(), map[s]);
            }
        }
        map
    }

    /// Same system with an extra subsystem attached at `host` by one edge
    /// labelled `label` leading to the attached system's initial state.
    pub fn attach(&self, host: usize, label: &str, sub: &TransitionSystem, prefix: &str) -> Self {
        let mut b = SystemBuilder::new();
        self.copy_into(&mut b, "");
        let map = sub.copy_into(&mut b, prefix);
        assert_eq!(b.len(), self.num_states() + sub.num_states(), "attachment prefix collides with host state names");
        b.edge(host, label, map[sub.initial]);
        b.build(self.initial)
    }

    /// Canonical relabelling by BFS from the initial state. Ties among
    /// successors are broken by action label, then by the target's prior
    /// discovery index, then by color. States unreachable from the initial
    /// state are appended in name order.
    ///
    /// Two systems with equal canonical forms are isomorphic. The converse
    /// holds whenever no state has two successors under the same label that
    /// are both undiscovered at the time it is expanded (e.g. for lassos).
    pub fn canonical_form(&self) -> TransitionSystem {
        let n = self.num_states();
        let mut order = Vec::with_capacity(n);
        let mut disc = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        disc[self.initial] = 0;
        order.push(self.initial);
        queue.push_back(self.initial);
        let visit = |start: usize, order: &mut Vec<usize>, disc: &mut Vec<usize>, queue: &mut VecDeque<usize>| {
            if disc[start] == usize::MAX {
                disc[start] = order.len();
                order.push(start);
                queue.push_back(start);
            }
            while let Some(s) = queue.pop_front() {
                let mut out: Vec<&Edge> = self.out_edges(s).collect();
                out.sort_by(|a, b| {
                    (&a.label, disc[a.dst], &self.colors[a.dst]).cmp(&(&b.label, disc[b.dst], &self.colors[b.dst]))
                });
                for e in out {
                    if disc[e.dst] == usize::MAX {
                        disc[e.dst] = order.len();
                        order.push(e.dst);
                        queue.push_back(e.dst);
                    }
                }
            }
        };
        visit(self.initial, &mut order, &mut disc, &mut queue);
        let mut rest: Vec<usize> = (0..n).filter(|&s| disc[s] == usize::MAX).collect();
        rest.sort_by(|&a, &b| self.states[a].cmp(&self.states[b]));
        for s in rest {
            visit(s, &mut order, &mut disc, &mut queue);
        }
        let mut b = SystemBuilder::new();
        for (i, &s) in order.iter().enumerate() {
            b.colored_state(format!("c{i}"), self.color(s));
        }
        for e in &self.edges {
            b.edge(disc[e.src], e.label.clone(), disc[e.dst]);
        }
        for (m, set) in &self.marks {
            for &s in set {
                b.mark(m.clone(), disc[s]);
            }
        }
        b.build(0)
    }

    /// Exact isomorphism test (initial state, colors, marks and labelled
    /// edges are preserved). Backtracking with colour-refinement pruning;
    /// intended for small systems.
    pub fn is_isomorphic(&self, other: &TransitionSystem) -> bool {
        if self.num_states() != other.num_states() || self.num_edges() != other.num_edges() {
            return false;
        }
        if self.canonical_form() == other.canonical_form() {
            return true;
        }
        let (ca, cb) = refine_pair(self, other);
        let mut ha: Vec<usize> = ca.clone();
        let mut hb: Vec<usize> = cb.clone();
        ha.sort_unstable();
        hb.sort_unstable();
        if ha != hb || ca[self.initial] != cb[other.initial] {
            return false;
        }
        let edges_b: std::collections::HashSet<(usize, &str, usize)> =
            other.edges.iter().map(|e| (e.src, e.label.as_str(), e.dst)).collect();
        let mut map = vec![usize::MAX; self.num_states()];
        let mut used = vec![false; other.num_states()];
        map[self.initial] = other.initial;
        used[other.initial] = true;
        let mut order: Vec<usize> = (0..self.num_states()).filter(|&s| s != self.initial).collect();
        order.sort_by_key(|&s| ca[s]);
        fn consistent(
            a: &TransitionSystem,
            edges_b: &std::collections::HashSet<(usize, &str, usize)>,
            map: &[usize],
            s: usize,
        ) -> bool {
            a.edges.iter().filter(|e| e.src == s || e.dst == s).all(|e| {
                let (ms, md) = (map[e.src], map[e.dst]);
                ms == usize::MAX || md == usize::MAX || edges_b.contains(&(ms, e.label.as_str(), md))
            })
        }
        fn go(
            a: &TransitionSystem,
            edges_b: &std::collections::HashSet<(usize, &str, usize)>,
            ca: &[usize],
            cb: &[usize],
            order: &[usize],
            k: usize,
            map: &mut Vec<usize>,
            used: &mut Vec<bool>,
        ) -> bool {
            if k == order.len() {
                return true;
            }
            let s = order[k];
            for t in 0..cb.len() {
                if used[t] || cb[t] != ca[s] {
                    continue;
                }
                map[s] = t;
                used[t] = true;
                if consistent(a, edges_b, map, s) && go(a, edges_b, ca, cb, order, k + 1, map, used) {
                    return true;
                }
                map[s] = usize::MAX;
                used[t] = false;
            }
            false
        }
        if !consistent(self, &edges_b, &map, self.initial) {
            return false;
        }
        go(self, &edges_b, &ca, &cb, &order, 0, &mut map, &mut used)
    }

    /// Maximal out-degree over all states.
    pub fn max_out_degree(&self) -> usize {
        (0..self.num_states()).map(|s| self.out_degree(s)).max().unwrap_or(0)
    }
}

/// Joint colour refinement over both systems; returns stable class ids.
fn refine_pair(a: &TransitionSystem, b: &TransitionSystem) -> (Vec<usize>, Vec<usize>) {
    let sig0 = |t: &TransitionSystem, s: usize, init: bool| {
        let marks: Vec<&String> = t.marks.iter().filter(|(_, set)| set.contains(&s)).map(|(m, _)| m).collect();
        format!("{:?}|{:?}|{}", t.colors[s], marks, init)
    };
    let mut ids: HashMap<String, usize> = HashMap::new();
    let intern = |k: String, ids: &mut HashMap<String, usize>| {
        let n = ids.len();
        *ids.entry(k).or_insert(n)
    };
    let mut ca: Vec<usize> = (0..a.num_states()).map(|s| intern(sig0(a, s, s == a.initial), &mut ids)).collect();
    let mut cb: Vec<usize> = (0..b.num_states()).map(|s| intern(sig0(b, s, s == b.initial), &mut ids)).collect();
    loop {
        let mut next_ids: HashMap<String, usize> = HashMap::new();
        let sig = |t: &TransitionSystem, c: &[usize], s: usize| {
            let mut out: Vec<(String, usize)> = t.out_edges(s).map(|e| (e.label.clone(), c[e.dst])).collect();
            let mut inc: Vec<(String, usize)> =
                t.edges.iter().filter(|e| e.dst == s).map(|e| (e.label.clone(), c[e.src])).collect();
            out.sort();
            inc.sort();
            format!("{}|{:?}|{:?}", c[s], out, inc)
        };
        let na: Vec<usize> = (0..a.num_states()).map(|s| intern(sig(a, &ca, s), &mut next_ids)).collect();
        let nb: Vec<usize> = (0..b.num_states()).map(|s| intern(sig(b, &cb, s), &mut next_ids)).collect();
        let before = ids.len();
        let stable = next_ids.len() == before;
        ids = next_ids;
        ca = na;
        cb = nb;
        if stable {
            return (ca, cb);
        }
    }
}

/// Disjoint union `A ⊕ B`: the carrier is the disjoint sum, `Left` marks the
/// states of `A`, `Right` those of `B`, and the initial state is `A`'s.
pub fn disjoint_union(a: &TransitionSystem, b: &TransitionSystem) -> TransitionSystem {
    let mut builder = SystemBuilder::new();
    let ma = a.copy_into(&mut builder, "L.");
    let mb = b.copy_into(&mut builder, "R.");
    for &s in &ma {
        builder.mark(LEFT, s);
    }
    for &s in &mb {
        builder.mark(RIGHT, s);
    }
    builder.build(ma[a.initial])
}

/// Merges all states in predicate `p` into one fresh state. `p` names a mark
/// if one exists, otherwise a color. Edges incident to merged states are
/// re-attached; the fresh state is initial iff the old initial was merged.
/// The merged states must agree on their color; marks are united.
pub fn fuse(a: &TransitionSystem, p: &str) -> Result<TransitionSystem> {
    let members: Vec<usize> = match a.marks.get(p) {
        Some(set) => set.iter().copied().collect(),
        None => (0..a.num_states()).filter(|&s| a.color(s) == Some(p)).collect(),
    };
    if members.is_empty() {
        return Err(Error::EmptyPredicate(p.to_owned()));
    }
    let color = a.color(members[0]);
    if let Some(&bad) = members.iter().find(|&&s| a.color(s) != color) {
        return Err(Error::ColorMismatch(format!(
            "fused states `{}` and `{}` carry different colors",
            a.state_name(members[0]),
            a.state_name(bad)
        )));
    }
    let in_p: Vec<bool> = (0..a.num_states()).map(|s| members.contains(&s)).collect();
    let mut fused_name = format!("fuse({p})");
    while a.state_index(&fused_name).is_some() {
        fused_name.push('\'');
    }
    let mut b = SystemBuilder::new();
    let mut map = vec![usize::MAX; a.num_states()];
    let mut fused = usize::MAX;
    for s in 0..a.num_states() {
        if in_p[s] {
            if fused == usize::MAX {
                fused = b.colored_state(fused_name.clone(), color);
            }
            map[s] = fused;
        } else {
            map[s] = b.colored_state(a.state_name(s).to_owned(), a.color(s));
        }
    }
    for e in a.edges() {
        b.edge(map[e.src], e.label.clone(), map[e.dst]);
    }
    for (m, set) in a.marks() {
        for &s in set {
            b.mark(m.clone(), map[s]);
        }
    }
    Ok(b.build(map[a.initial()]))
}

impl fmt::Display for TransitionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::format::system_to_json(self))
    }
}
