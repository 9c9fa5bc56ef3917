//! Finite relational structures with named constants, the common ground for
//! transition systems, pointed paths and their unions.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::path::PointedPath;
use crate::system::{TransitionSystem, LEFT, RIGHT};

/// Largest universe a [`Structure`] can hold (sets are bitmasks).
pub const MAX_ELEMENTS: usize = 128;

/// Subset of a structure's universe, one bit per element.
pub type Mask = u128;

/// Unary predicate name under which a state color is stored.
pub fn color_pred(c: &str) -> String {
    format!("c:{c}")
}

/// Unary predicate name under which a mark is stored.
pub fn mark_pred(m: &str) -> String {
    format!("m:{m}")
}

/// A structure over elements `0..n` with labelled binary edges, unary
/// predicates and an ordered list of constants. Transition systems carry the
/// single constant `init`; pointed paths carry `first` and `last`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Structure {
    n: usize,
    edges: BTreeMap<String, Vec<Mask>>,
    unary: BTreeMap<String, Mask>,
    constants: Vec<usize>,
    init: Option<usize>,
}

impl Structure {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_ELEMENTS {
            return Err(Error::StructureTooLarge { size: n, bound: MAX_ELEMENTS, rank: 0 });
        }
        Ok(Self { n, edges: BTreeMap::new(), unary: BTreeMap::new(), constants: Vec::new(), init: None })
    }

    pub fn from_system(s: &TransitionSystem) -> Result<Self> {
        let mut st = Self::new(s.num_states())?;
        for e in s.edges() {
            st.add_edge(&e.label, e.src, e.dst);
        }
        for v in 0..s.num_states() {
            if let Some(c) = s.color(v) {
                st.add_unary(&color_pred(c), v);
            }
        }
        for (m, set) in s.marks() {
            for &v in set {
                st.add_unary(&mark_pred(m), v);
            }
        }
        st.constants = vec![s.initial()];
        st.init = Some(s.initial());
        Ok(st)
    }

    /// The path with its two end-points as constants and no initial state.
    pub fn from_path(p: &PointedPath) -> Result<Self> {
        let mut st = Self::new(p.len() + 1)?;
        for (i, l) in p.labels().iter().enumerate() {
            st.add_edge(l, i, i + 1);
        }
        for (i, c) in p.colors().iter().enumerate() {
            if let Some(c) = c {
                st.add_unary(&color_pred(c), i);
            }
        }
        st.constants = vec![0, p.len()];
        Ok(st)
    }

    pub fn add_edge(&mut self, label: &str, src: usize, dst: usize) {
        let n = self.n;
        self.edges.entry(label.to_owned()).or_insert_with(|| vec![0; n])[src] |= 1 << dst;
    }

    pub fn add_unary(&mut self, pred: &str, v: usize) {
        *self.unary.entry(pred.to_owned()).or_insert(0) |= 1 << v;
    }

    pub fn set_constants(&mut self, constants: Vec<usize>) {
        assert!(constants.iter().all(|&c| c < self.n));
        self.constants = constants;
    }

    pub fn set_init(&mut self, init: Option<usize>) {
        self.init = init;
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn constants(&self) -> &[usize] {
        &self.constants
    }

    pub fn init(&self) -> Option<usize> {
        self.init
    }

    pub fn edges(&self) -> &BTreeMap<String, Vec<Mask>> {
        &self.edges
    }

    pub fn unary(&self) -> &BTreeMap<String, Mask> {
        &self.unary
    }

    pub fn has_edge(&self, label: &str, src: usize, dst: usize) -> bool {
        self.edges.get(label).is_some_and(|s| s[src] >> dst & 1 == 1)
    }

    pub fn holds(&self, pred: &str, v: usize) -> bool {
        self.unary.get(pred).is_some_and(|m| m >> v & 1 == 1)
    }

    pub fn full_mask(&self) -> Mask {
        if self.n == MAX_ELEMENTS {
            Mask::MAX
        } else {
            (1 << self.n) - 1
        }
    }

    /// Disjoint union: `a`'s elements first, constants concatenated, `Left`
    /// and `Right` marks added, initial element taken from `a`.
    pub fn disjoint_union(a: &Structure, b: &Structure) -> Result<Structure> {
        let off = a.n;
        let mut u = Structure::new(a.n + b.n)?;
        for (part, o) in [(a, 0), (b, off)] {
            for (l, succ) in &part.edges {
                for (v, &m) in succ.iter().enumerate() {
                    for w in 0..part.n {
                        if m >> w & 1 == 1 {
                            u.add_edge(l, v + o, w + o);
                        }
                    }
                }
            }
            for (p, &m) in &part.unary {
                for v in 0..part.n {
                    if m >> v & 1 == 1 {
                        u.add_unary(p, v + o);
                    }
                }
            }
        }
        for v in 0..a.n {
            u.add_unary(&mark_pred(LEFT), v);
        }
        for v in 0..b.n {
            u.add_unary(&mark_pred(RIGHT), v + off);
        }
        u.constants = a.constants.iter().copied().chain(b.constants.iter().map(|&c| c + off)).collect();
        u.init = a.init;
        Ok(u)
    }

    /// Merges the elements satisfying unary predicate `pred` into one element.
    /// Predicates of merged elements are united; constants are redirected.
    pub fn fuse(&self, pred: &str) -> Result<Structure> {
        let p = self.unary.get(pred).copied().unwrap_or(0);
        if p == 0 {
            return Err(Error::EmptyPredicate(pred.to_owned()));
        }
        let first = p.trailing_zeros() as usize;
        let mut map = vec![0; self.n];
        let mut k = 0;
        for (v, slot) in map.iter_mut().enumerate() {
            if p >> v & 1 == 0 || v == first {
                *slot = k;
                k += 1;
            }
        }
        for v in 0..self.n {
            if p >> v & 1 == 1 {
                map[v] = map[first];
            }
        }
        let mut out = Structure::new(k)?;
        for (l, succ) in &self.edges {
            for (v, &m) in succ.iter().enumerate() {
                for w in 0..self.n {
                    if m >> w & 1 == 1 {
                        out.add_edge(l, map[v], map[w]);
                    }
                }
            }
        }
        for (q, &m) in &self.unary {
            for v in 0..self.n {
                if m >> v & 1 == 1 {
                    out.add_unary(q, map[v]);
                }
            }
        }
        out.constants = self.constants.iter().map(|&c| map[c]).collect();
        out.init = self.init.map(|i| map[i]);
        Ok(out)
    }

    /// Stable text key used for memoization.
    pub(crate) fn key(&self) -> String {
        format!("{:?}", self)
    }
}
