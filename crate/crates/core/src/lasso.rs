//! Lassos (a tail path ending in a loop) and hierarchical k-lassos.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::path::PointedPath;
use crate::system::{SystemBuilder, TransitionSystem};
use crate::Label;

/// Label used for attachment edges when none is given.
pub const DEFAULT_ATTACHMENT_LABEL: &str = "a";

/// A lasso with `tail` (length >= 0) and `loop_` (length >= 1), glued at the
/// last tail vertex, the first loop vertex and the last loop vertex.
///
/// Vertices are numbered `0..tail.len()` along the tail, then
/// `tail.len()..tail.len()+loop_.len()` around the loop, starting at the glue
/// vertex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lasso {
    tail: PointedPath,
    loop_: PointedPath,
}

impl Lasso {
    pub fn new(tail: PointedPath, loop_: PointedPath) -> Result<Self> {
        if loop_.is_empty() {
            return Err(Error::Invalid("lasso loop must have length >= 1".into()));
        }
        if tail.last_color() != loop_.first_color() || loop_.first_color() != loop_.last_color() {
            return Err(Error::ColorMismatch(format!(
                "lasso glue colors disagree: tail end {:?}, loop start {:?}, loop end {:?}",
                tail.last_color(),
                loop_.first_color(),
                loop_.last_color()
            )));
        }
        Ok(Self { tail, loop_ })
    }

    pub fn tail(&self) -> &PointedPath {
        &self.tail
    }

    pub fn loop_path(&self) -> &PointedPath {
        &self.loop_
    }

    pub fn num_vertices(&self) -> usize {
        self.tail.len() + self.loop_.len()
    }

    pub fn vertex_color(&self, i: usize) -> Option<&str> {
        if i < self.tail.len() {
            self.tail.colors()[i].as_deref()
        } else {
            self.loop_.colors()[i - self.tail.len()].as_deref()
        }
    }

    /// Successor vertex and label of main-lasso vertex `i`.
    pub fn next(&self, i: usize) -> (usize, &str) {
        let t = self.tail.len();
        if i < t {
            (i + 1, &self.tail.labels()[i])
        } else {
            let j = i - t;
            (t + (j + 1) % self.loop_.len(), &self.loop_.labels()[j])
        }
    }

    pub fn is_loop_vertex(&self, i: usize) -> bool {
        i >= self.tail.len()
    }

    /// The lasso starting at vertex `i` (its tail is the remaining tail).
    pub fn suffix(&self, i: usize) -> Lasso {
        let t = self.tail.len();
        if i < t {
            Lasso { tail: self.tail.slice(i, t), loop_: self.loop_.clone() }
        } else {
            Lasso { tail: PointedPath::unit(self.vertex_color(i)), loop_: self.rotated_loop(i - t) }
        }
    }

    /// The loop read from its `j`-th vertex.
    pub fn rotated_loop(&self, j: usize) -> PointedPath {
        let n = self.loop_.len();
        if j.is_multiple_of(n) {
            return self.loop_.clone();
        }
        let j = j % n;
        self.loop_.slice(j, n).concat(&self.loop_.slice(0, j)).expect("loop colors glue")
    }

    /// Same branch, with the loop unrolled `k` times (`k >= 1`).
    pub fn unroll(&self, k: usize) -> Lasso {
        Lasso { tail: self.tail.clone(), loop_: self.loop_.power(k).expect("loop is self-composable") }
    }

    /// Same branch, with the first `j` loop edges moved into the tail.
    pub fn shift(&self, j: usize) -> Lasso {
        let n = self.loop_.len();
        let mut tail = self.tail.clone();
        for s in 0..j {
            let k = s % n;
            tail = tail.concat(&self.loop_.slice(k, k + 1)).expect("loop colors glue");
        }
        Lasso { tail, loop_: self.rotated_loop(j) }
    }

    pub fn to_system(&self) -> TransitionSystem {
        KLasso::from(self.clone()).to_system()
    }
}

impl std::fmt::Display for Lasso {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})({})^w", self.tail, self.loop_)
    }
}

/// A sub-k-lasso hung off a main-lasso vertex by a single edge.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Attachment {
    pub label: Label,
    pub sub: KLasso,
}

/// A hierarchical lasso: a main lasso with lower-level k-lassos attached to
/// some of its vertices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KLasso {
    pub main: Lasso,
    pub attachments: BTreeMap<usize, Vec<Attachment>>,
}

impl From<Lasso> for KLasso {
    fn from(main: Lasso) -> Self {
        KLasso { main, attachments: BTreeMap::new() }
    }
}

impl KLasso {
    /// 1 for a plain lasso, otherwise one more than the deepest attachment.
    pub fn level(&self) -> usize {
        self.attachments.values().flatten().map(|a| a.sub.level() + 1).max().unwrap_or(1)
    }

    pub fn attach(&mut self, vertex: usize, sub: KLasso) {
        self.attach_with(vertex, DEFAULT_ATTACHMENT_LABEL, sub);
    }

    pub fn attach_with(&mut self, vertex: usize, label: &str, sub: KLasso) {
        assert!(vertex < self.main.num_vertices(), "attachment vertex out of range");
        self.attachments.entry(vertex).or_default().push(Attachment { label: label.to_owned(), sub });
    }

    /// Drops empty attachment lists.
    pub fn normalized(mut self) -> Self {
        self.attachments.retain(|_, v| !v.is_empty());
        self
    }

    pub fn num_states(&self) -> usize {
        self.main.num_vertices() + self.attachments.values().flatten().map(|a| a.sub.num_states()).sum::<usize>()
    }

    pub fn to_system(&self) -> TransitionSystem {
        let mut b = SystemBuilder::new();
        let root = self.build_into(&mut b, "");
        b.build(root)
    }

    fn build_into(&self, b: &mut SystemBuilder, prefix: &str) -> usize {
        let n = self.main.num_vertices();
        let v: Vec<usize> =
            (0..n).map(|i| b.colored_state(format!("{prefix}v{i}"), self.main.vertex_color(i))).collect();
        for i in 0..n {
            let (j, l) = self.main.next(i);
            b.edge(v[i], l.to_owned(), v[j]);
        }
        for (&i, atts) in &self.attachments {
            for (k, a) in atts.iter().enumerate() {
                let r = a.sub.build_into(b, &format!("{prefix}v{i}.{k}/"));
                b.edge(v[i], a.label.clone(), r);
            }
        }
        v[0]
    }
}

/// Splits a lasso-shaped system into its tail and loop.
pub fn lasso_decompose(s: &TransitionSystem) -> Result<Lasso> {
    if let Some(u) = s.reachable().iter().position(|r| !r) {
        return Err(Error::NotALasso(format!("state `{}` is unreachable", s.state_name(u))));
    }
    if let Some(bad) = (0..s.num_states()).find(|&v| s.out_degree(v) != 1) {
        return Err(Error::NotALasso(format!("state `{}` has out-degree {}", s.state_name(bad), s.out_degree(bad))));
    }
    let mut pos = HashMap::new();
    let mut path = Vec::new();
    let mut labels = Vec::new();
    let mut cur = s.initial();
    while !pos.contains_key(&cur) {
        pos.insert(cur, path.len());
        path.push(cur);
        let e = s.out_edges(cur).next().expect("out-degree 1");
        labels.push(e.label.clone());
        cur = e.dst;
    }
    let start = pos[&cur];
    let colors: Vec<Option<String>> = path.iter().map(|&v| s.color(v).map(str::to_owned)).collect();
    let tail = PointedPath::new(colors[..=start].to_vec(), labels[..start].to_vec())?;
    let mut loop_colors = colors[start..].to_vec();
    loop_colors.push(colors[start].clone());
    let loop_ = PointedPath::new(loop_colors, labels[start..].to_vec())?;
    Lasso::new(tail, loop_)
}

/// Recognizes a hierarchical lasso, choosing the decomposition with least
/// level. Fails on unreachable states, dead ends, and states with two
/// outgoing edges that both lie on cycles through them.
pub fn klasso_recognize(s: &TransitionSystem) -> Result<KLasso> {
    if let Some(u) = s.reachable().iter().position(|r| !r) {
        return Err(Error::NotAKLasso(format!("state `{}` is unreachable", s.state_name(u))));
    }
    Recognizer::new(s).from_root(s.initial())
}

pub(crate) struct Recognizer<'a> {
    s: &'a TransitionSystem,
    reach: HashMap<usize, Vec<bool>>,
}

impl<'a> Recognizer<'a> {
    pub(crate) fn new(s: &'a TransitionSystem) -> Self {
        Self { s, reach: HashMap::new() }
    }

    fn reach(&mut self, v: usize) -> &Vec<bool> {
        let s = self.s;
        self.reach.entry(v).or_insert_with(|| s.reachable_from(v))
    }

    /// `src -label-> dst` is the only edge entering the part reachable from
    /// `dst`, and that part does not reach back to `src`.
    pub(crate) fn detachable(&mut self, src: usize, label: &str, dst: usize) -> bool {
        let s = self.s;
        let r = self.reach(dst).clone();
        if r[src] {
            return false;
        }
        s.edges().iter().filter(|e| !r[e.src] && r[e.dst]).all(|e| e.src == src && e.dst == dst && e.label == label)
    }

    pub(crate) fn from_root(&mut self, root: usize) -> Result<KLasso> {
        let s = self.s;
        let mut pos: HashMap<usize, usize> = HashMap::new();
        let mut path = Vec::new();
        let mut labels: Vec<Label> = Vec::new();
        let mut attachments: BTreeMap<usize, Vec<Attachment>> = BTreeMap::new();
        let mut cur = root;
        while !pos.contains_key(&cur) {
            let idx = path.len();
            pos.insert(cur, idx);
            path.push(cur);
            let edges: Vec<_> = s.out_edges(cur).cloned().collect();
            if edges.is_empty() {
                return Err(Error::NotAKLasso(format!("state `{}` has no successor", s.state_name(cur))));
            }
            let mut fixed = Vec::new();
            let mut loose = Vec::new();
            for e in edges {
                if self.detachable(e.src, &e.label, e.dst) {
                    loose.push(e);
                } else {
                    fixed.push(e);
                }
            }
            if fixed.len() > 1 {
                return Err(Error::NotAKLasso(format!(
                    "state `{}` has {} successors that cannot be detached",
                    s.state_name(cur),
                    fixed.len()
                )));
            }
            let mut subs = Vec::with_capacity(loose.len());
            for e in &loose {
                subs.push(self.from_root(e.dst)?);
            }
            let main = match fixed.pop() {
                Some(e) => e,
                None => {
                    // the deepest detachable successor continues the main lasso
                    let mut best = 0;
                    for (i, sub) in subs.iter().enumerate() {
                        if sub.level() > subs[best].level() {
                            best = i;
                        }
                    }
                    subs.remove(best);
                    loose.remove(best)
                }
            };
            let atts: Vec<Attachment> =
                loose.into_iter().zip(subs).map(|(e, sub)| Attachment { label: e.label, sub }).collect();
            if !atts.is_empty() {
                attachments.insert(idx, atts);
            }
            labels.push(main.label);
            cur = main.dst;
        }
        let start = pos[&cur];
        let colors: Vec<Option<String>> = path.iter().map(|&v| s.color(v).map(str::to_owned)).collect();
        let tail = PointedPath::new(colors[..=start].to_vec(), labels[..start].to_vec())?;
        let mut loop_colors = colors[start..].to_vec();
        loop_colors.push(colors[start].clone());
        let loop_ = PointedPath::new(loop_colors, labels[start..].to_vec())?;
        Ok(KLasso { main: Lasso::new(tail, loop_)?, attachments })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word_lasso(tail: &[&str], lp: &[&str]) -> Lasso {
        Lasso::new(PointedPath::word(tail), PointedPath::word(lp)).unwrap()
    }

    #[test]
    fn self_loop_lasso() {
        let l = word_lasso(&[], &["a"]);
        let s = l.to_system();
        assert_eq!(s.num_states(), 1);
        assert_eq!(s.num_edges(), 1);
        let d = lasso_decompose(&s).unwrap();
        assert_eq!(d.tail().len(), 0);
        assert_eq!(d.loop_path().len(), 1);
    }

    #[test]
    fn tail_two_loop_three() {
        let l = word_lasso(&["a", "b"], &["a", "a", "b"]);
        let s = l.to_system();
        assert_eq!(s.num_states(), 5);
        assert_eq!(s.num_edges(), 5);
        assert_eq!(lasso_decompose(&s).unwrap(), l);
    }

    #[test]
    fn path_into_two_cycle_round_trip() {
        let l = word_lasso(&["a", "a"], &["b", "a"]);
        let d = lasso_decompose(&l.to_system()).unwrap();
        assert_eq!(d.tail().len(), 2);
        assert_eq!(d.loop_path().len(), 2);
        assert!(d.to_system().is_isomorphic(&l.to_system()));
    }

    #[test]
    fn out_degree_two_is_not_a_lasso() {
        let mut b = SystemBuilder::new();
        let s0 = b.state("s0");
        b.edge(s0, "a", s0);
        b.edge(s0, "b", s0);
        assert!(matches!(lasso_decompose(&b.build(s0)), Err(Error::NotALasso(_))));
    }

    #[test]
    fn glue_colors_must_agree() {
        let tail = PointedPath::edge(None, "a", Some("p"));
        let lp = PointedPath::edge(None, "a", None);
        assert!(matches!(Lasso::new(tail, lp), Err(Error::ColorMismatch(_))));
    }

    #[test]
    fn attachment_adds_one_edge() {
        let host = word_lasso(&["a"], &["a"]);
        let mut m = KLasso::from(host.clone());
        m.attach_with(0, "b", word_lasso(&[], &["a"]).into());
        let s = m.to_system();
        assert_eq!(m.level(), 2);
        assert_eq!(s.num_states(), host.num_vertices() + 1);
        assert_eq!(s.num_edges(), host.to_system().num_edges() + 1 + 1);
    }

    #[test]
    fn lasso_recognized_as_level_one() {
        let l = word_lasso(&["a", "b"], &["a"]);
        let k = klasso_recognize(&l.to_system()).unwrap();
        assert_eq!(k.level(), 1);
        assert_eq!(k.main, l);
    }

    #[test]
    fn tail_attachment_recognized_as_level_two() {
        let mut m = KLasso::from(word_lasso(&["a", "a"], &["b", "a"]));
        m.attach_with(1, "b", word_lasso(&["a"], &["b"]).into());
        let s = m.to_system();
        let k = klasso_recognize(&s).unwrap();
        assert_eq!(k.level(), 2);
        assert!(k.to_system().is_isomorphic(&s));
    }

    #[test]
    fn two_cycles_through_shared_state() {
        let mut b = SystemBuilder::new();
        let s0 = b.state("s0");
        let s1 = b.state("s1");
        b.edge(s0, "a", s0);
        b.edge(s0, "a", s1);
        b.edge(s1, "a", s0);
        assert!(matches!(klasso_recognize(&b.build(s0)), Err(Error::NotAKLasso(_))));
    }

    #[test]
    fn shift_and_unroll_keep_the_branch() {
        let l = word_lasso(&["a"], &["a", "b", "b"]);
        let s = l.shift(4);
        assert_eq!(s.tail().len(), 5);
        assert_eq!(s.loop_path().labels(), &["b".to_string(), "b".into(), "a".into()]);
        assert_eq!(l.unroll(2).loop_path().len(), 6);
    }
}
