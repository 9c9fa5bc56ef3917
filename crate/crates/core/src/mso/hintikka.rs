//! Rank-m Hintikka types.
//!
//! The rank-0 type of a structure with distinguished elements `e_1..e_k`
//! (its constants followed by extension variables) and sets `X_1..X_l` is
//! the set of true atoms over them. The rank-(r+1) type is the pair of sets
//! of rank-r types obtained by naming one more element, respectively one
//! more set. Atoms mention predicate and label names, so types of structures
//! over different signatures are directly comparable.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mso::structure::{Mask, Structure};
use crate::path::PointedPath;
use crate::system::{fuse, TransitionSystem};

/// Resource limits for type computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Guards {
    pub max_rank: usize,
    /// Element bound at rank 0 and 1.
    pub max_size: usize,
    pub max_size_rank2: usize,
    pub max_size_rank3: usize,
    /// Longest representative path the path algebra may build.
    pub max_path_len: usize,
    /// Entries kept in the per-thread structure memo before it is flushed.
    pub cache_cap: usize,
}

impl Default for Guards {
    fn default() -> Self {
        Guards { max_rank: 3, max_size: 64, max_size_rank2: 14, max_size_rank3: 8, max_path_len: 12, cache_cap: 1 << 16 }
    }
}

impl Guards {
    pub fn size_bound(&self, rank: usize) -> usize {
        match rank {
            0 | 1 => self.max_size,
            2 => self.max_size_rank2,
            _ => self.max_size_rank3,
        }
    }

    pub fn check(&self, size: usize, rank: usize) -> Result<()> {
        if rank > self.max_rank {
            return Err(Error::RankTooHigh { rank, bound: self.max_rank });
        }
        let bound = self.size_bound(rank);
        if size > bound {
            return Err(Error::StructureTooLarge { size, bound, rank });
        }
        Ok(())
    }
}

/// An atomic statement about distinguished elements (by position) and sets.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Eq(u8, u8),
    Edge(Arc<str>, u8, u8),
    Unary(Arc<str>, u8),
    In(u8, u8),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Payload {
    Atoms { elems: u8, sets: u8, atoms: Vec<Atom> },
    Node { elems: Vec<TypeId>, sets: Vec<TypeId> },
}

#[derive(Debug)]
struct TypeNode {
    digest: u128,
    rank: u8,
    payload: Payload,
}

/// A Hintikka type: canonical nested-set encoding plus a 128-bit digest.
/// Equality is structural; the digest only short-cuts it.
#[derive(Clone)]
pub struct TypeId(Arc<TypeNode>);

impl PartialEq for TypeId {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.digest == other.0.digest && self.0.rank == other.0.rank && self.0.payload == other.0.payload)
    }
}

impl Eq for TypeId {}

impl PartialOrd for TypeId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TypeId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return std::cmp::Ordering::Equal;
        }
        (self.0.digest, self.0.rank)
            .cmp(&(other.0.digest, other.0.rank))
            .then_with(|| self.0.payload.cmp(&other.0.payload))
    }
}

impl Hash for TypeId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.digest.hash(state);
    }
}

impl fmt::Debug for TypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}#{:08x}", self.0.rank, (self.0.digest >> 96) as u32)
    }
}

impl fmt::Display for TypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl TypeId {
    pub fn rank(&self) -> usize {
        self.0.rank as usize
    }

    pub fn digest(&self) -> u128 {
        self.0.digest
    }

    /// Full digest as 32 hex digits.
    pub fn hex(&self) -> String {
        format!("{:032x}", self.0.digest)
    }

    /// True atoms of a rank-0 type.
    pub fn atoms(&self) -> Option<&[Atom]> {
        match &self.0.payload {
            Payload::Atoms { atoms, .. } => Some(atoms),
            Payload::Node { .. } => None,
        }
    }

    /// Types reachable by naming one more element (empty at rank 0).
    pub fn element_children(&self) -> &[TypeId] {
        match &self.0.payload {
            Payload::Node { elems, .. } => elems,
            Payload::Atoms { .. } => &[],
        }
    }

    /// Types reachable by naming one more set (empty at rank 0).
    pub fn set_children(&self) -> &[TypeId] {
        match &self.0.payload {
            Payload::Node { sets, .. } => sets,
            Payload::Atoms { .. } => &[],
        }
    }
}

fn put_str(h: &mut Sha256, s: &str) {
    h.update((s.len() as u32).to_be_bytes());
    h.update(s.as_bytes());
}

fn finish(h: Sha256) -> u128 {
    let out = h.finalize();
    let mut b = [0u8; 16];
    b.copy_from_slice(&out[..16]);
    u128::from_be_bytes(b)
}

fn digest_of(rank: u8, payload: &Payload) -> u128 {
    let mut h = Sha256::new();
    match payload {
        Payload::Atoms { elems, sets, atoms } => {
            h.update([b'A', rank, *elems, *sets]);
            for a in atoms {
                match a {
                    Atom::Eq(i, j) => h.update([0, *i, *j]),
                    Atom::Edge(l, i, j) => {
                        h.update([1, *i, *j]);
                        put_str(&mut h, l);
                    }
                    Atom::Unary(p, i) => {
                        h.update([2, *i]);
                        put_str(&mut h, p);
                    }
                    Atom::In(i, s) => h.update([3, *i, *s]),
                }
            }
        }
        Payload::Node { elems, sets } => {
            h.update([b'N', rank]);
            h.update((elems.len() as u32).to_be_bytes());
            for c in elems {
                h.update(c.0.digest.to_be_bytes());
            }
            h.update((sets.len() as u32).to_be_bytes());
            for c in sets {
                h.update(c.0.digest.to_be_bytes());
            }
        }
    }
    finish(h)
}

thread_local! {
    static INTERN: RefCell<HashMap<u128, Vec<TypeId>>> = RefCell::new(HashMap::new());
    static MEMO: RefCell<HashMap<(String, usize), TypeId>> = RefCell::new(HashMap::new());
}

fn intern(rank: u8, payload: Payload) -> TypeId {
    let digest = digest_of(rank, &payload);
    INTERN.with(|t| {
        let mut t = t.borrow_mut();
        let bucket = t.entry(digest).or_default();
        if let Some(found) = bucket.iter().find(|x| x.0.rank == rank && x.0.payload == payload) {
            return found.clone();
        }
        let id = TypeId(Arc::new(TypeNode { digest, rank, payload }));
        bucket.push(id.clone());
        id
    })
}

/// Drops this thread's memo tables.
pub fn clear_caches() {
    INTERN.with(|t| t.borrow_mut().clear());
    MEMO.with(|t| t.borrow_mut().clear());
}

struct Ctx<'a> {
    st: &'a Structure,
    labels: Vec<(Arc<str>, &'a [Mask])>,
    unary: Vec<(Arc<str>, Mask)>,
    local: HashMap<Vec<u64>, TypeId>,
    bits: Vec<u64>,
    naive_sets: bool,
}

impl<'a> Ctx<'a> {
    fn new(st: &'a Structure) -> Self {
        Ctx {
            st,
            labels: st.edges().iter().map(|(l, s)| (Arc::from(l.as_str()), s.as_slice())).collect(),
            unary: st.unary().iter().map(|(p, &m)| (Arc::from(p.as_str()), m)).collect(),
            local: HashMap::new(),
            bits: Vec::new(),
            naive_sets: false,
        }
    }

    fn rank0(&mut self, elts: &[usize], sets: &[Mask]) -> TypeId {
        let mut key = std::mem::take(&mut self.bits);
        key.clear();
        key.push(((elts.len() as u64) << 32) | sets.len() as u64);
        let mut word = 0u64;
        let mut nbits = 0;
        let mut push = |b: bool, key: &mut Vec<u64>| {
            word |= (b as u64) << nbits;
            nbits += 1;
            if nbits == 64 {
                key.push(word);
                word = 0;
                nbits = 0;
            }
        };
        let k = elts.len();
        for i in 0..k {
            for j in i + 1..k {
                push(elts[i] == elts[j], &mut key);
            }
        }
        for (_, succ) in &self.labels {
            for &x in elts {
                for &y in elts {
                    push(succ[x] >> y & 1 == 1, &mut key);
                }
            }
        }
        for (_, m) in &self.unary {
            for &x in elts {
                push(m >> x & 1 == 1, &mut key);
            }
        }
        for &x in elts {
            for &s in sets {
                push(s >> x & 1 == 1, &mut key);
            }
        }
        key.push(word);
        if let Some(t) = self.local.get(&key) {
            let t = t.clone();
            self.bits = key;
            return t;
        }
        let mut atoms = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                if elts[i] == elts[j] {
                    atoms.push(Atom::Eq(i as u8, j as u8));
                }
            }
        }
        for (l, succ) in &self.labels {
            for (i, &x) in elts.iter().enumerate() {
                for (j, &y) in elts.iter().enumerate() {
                    if succ[x] >> y & 1 == 1 {
                        atoms.push(Atom::Edge(l.clone(), i as u8, j as u8));
                    }
                }
            }
        }
        for (p, m) in &self.unary {
            for (i, &x) in elts.iter().enumerate() {
                if m >> x & 1 == 1 {
                    atoms.push(Atom::Unary(p.clone(), i as u8));
                }
            }
        }
        for (i, &x) in elts.iter().enumerate() {
            for (j, &s) in sets.iter().enumerate() {
                if s >> x & 1 == 1 {
                    atoms.push(Atom::In(i as u8, j as u8));
                }
            }
        }
        atoms.sort();
        let t = intern(0, Payload::Atoms { elems: k as u8, sets: sets.len() as u8, atoms });
        self.local.insert(key, t.clone());
        t
    }

    fn ty(&mut self, elts: &mut Vec<usize>, sets: &mut Vec<Mask>, r: usize) -> TypeId {
        if r == 0 {
            return self.rank0(elts, sets);
        }
        let n = self.st.len();
        let mut ec = Vec::with_capacity(n);
        for e in 0..n {
            elts.push(e);
            ec.push(self.ty(elts, sets, r - 1));
            elts.pop();
        }
        ec.sort();
        ec.dedup();
        // A rank-0 type only sees a set through the named elements, so at
        // rank 1 it suffices to range over subsets of those.
        let range = if r == 1 && !self.naive_sets {
            elts.iter().fold(0 as Mask, |m, &e| m | 1 << e)
        } else {
            self.st.full_mask()
        };
        let mut sc = Vec::new();
        let mut x = range;
        loop {
            sets.push(x);
            sc.push(self.ty(elts, sets, r - 1));
            sets.pop();
            if x == 0 {
                break;
            }
            x = (x - 1) & range;
        }
        sc.sort();
        sc.dedup();
        intern(r as u8, Payload::Node { elems: ec, sets: sc })
    }
}

/// Rank-`m` type of `st`, with default guards.
pub fn hintikka(st: &Structure, m: usize) -> Result<TypeId> {
    hintikka_with(st, m, &Guards::default())
}

pub fn hintikka_with(st: &Structure, m: usize, guards: &Guards) -> Result<TypeId> {
    guards.check(st.len(), m)?;
    let key = (st.key(), m);
    if let Some(t) = MEMO.with(|c| c.borrow().get(&key).cloned()) {
        return Ok(t);
    }
    let mut ctx = Ctx::new(st);
    let t = ctx.ty(&mut st.constants().to_vec(), &mut Vec::new(), m);
    MEMO.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() >= guards.cache_cap {
            c.clear();
            INTERN.with(|t| t.borrow_mut().clear());
        }
        c.insert(key, t.clone());
    });
    Ok(t)
}

/// Rank-`m` type of a transition system (constant: the initial state).
pub fn system_type(s: &TransitionSystem, m: usize) -> Result<TypeId> {
    system_type_with(s, m, &Guards::default())
}

pub fn system_type_with(s: &TransitionSystem, m: usize, guards: &Guards) -> Result<TypeId> {
    guards.check(s.num_states(), m)?;
    hintikka_with(&Structure::from_system(s)?, m, guards)
}

/// `S ≡_m T`.
pub fn equiv_m(s: &TransitionSystem, t: &TransitionSystem, m: usize) -> Result<bool> {
    Ok(system_type(s, m)? == system_type(t, m)?)
}

pub fn equiv_m_with(s: &TransitionSystem, t: &TransitionSystem, m: usize, guards: &Guards) -> Result<bool> {
    Ok(system_type_with(s, m, guards)? == system_type_with(t, m, guards)?)
}

/// Rank-`m` type of a path with both end-points named.
pub fn path_theory(p: &PointedPath, m: usize) -> Result<TypeId> {
    path_theory_with(p, m, &Guards::default())
}

pub fn path_theory_with(p: &PointedPath, m: usize, guards: &Guards) -> Result<TypeId> {
    guards.check(p.len() + 1, m)?;
    hintikka_with(&Structure::from_path(p)?, m, guards)
}

/// Whether `a ≡_m a2` implies `fuse(a, p) ≡_m fuse(a2, p)` on this instance.
pub fn fuse_equiv_check(a: &TransitionSystem, a2: &TransitionSystem, p: &str, m: usize) -> Result<bool> {
    if !equiv_m(a, a2, m)? {
        return Ok(true);
    }
    equiv_m(&fuse(a, p)?, &fuse(a2, p)?, m)
}

/// The same instance on structures, fusing unary predicate `pred`.
pub fn fuse_structure_equiv_check(a: &Structure, a2: &Structure, pred: &str, m: usize) -> Result<bool> {
    if hintikka(a, m)? != hintikka(a2, m)? {
        return Ok(true);
    }
    Ok(hintikka(&a.fuse(pred)?, m)? == hintikka(&a2.fuse(pred)?, m)?)
}

#[cfg(test)]
fn hintikka_naive(st: &Structure, m: usize) -> TypeId {
    let mut ctx = Ctx::new(st);
    ctx.naive_sets = true;
    ctx.ty(&mut st.constants().to_vec(), &mut Vec::new(), m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::SystemBuilder;

    fn cycle(n: usize, color_first: Option<&str>) -> TransitionSystem {
        let mut b = SystemBuilder::new();
        let v: Vec<usize> = (0..n).map(|i| b.state(format!("s{i}"))).collect();
        for i in 0..n {
            b.edge(v[i], "a", v[(i + 1) % n]);
        }
        b.set_color(v[0], color_first);
        b.build(v[0])
    }

    #[test]
    fn color_separates_at_rank_zero() {
        let p = cycle(1, Some("p"));
        let q = cycle(1, Some("q"));
        assert!(!equiv_m(&p, &q, 0).unwrap());
        assert!(equiv_m(&p, &p.prefixed("x"), 2).unwrap());
    }

    #[test]
    fn empty_path_names_one_point() {
        let t = path_theory(&PointedPath::unit(None), 0).unwrap();
        assert_eq!(t.atoms().unwrap(), &[Atom::Eq(0, 1)]);
    }

    #[test]
    fn rank_one_saturates_on_long_paths() {
        // from length 4 on, every inner vertex is either next to an end-point
        // or unrelated to both
        let a = path_theory(&PointedPath::word(&["a"; 4]), 1).unwrap();
        let b = path_theory(&PointedPath::word(&["a"; 5]), 1).unwrap();
        let c = path_theory(&PointedPath::word(&["a"; 3]), 1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn set_shortcut_matches_naive_enumeration() {
        for n in 1..6 {
            for m in 1..=2 {
                let st = Structure::from_system(&cycle(n, Some("p"))).unwrap();
                assert_eq!(hintikka(&st, m).unwrap(), hintikka_naive(&st, m), "n={n} m={m}");
                let p = Structure::from_path(&PointedPath::word(&vec!["a"; n])).unwrap();
                assert_eq!(hintikka(&p, m).unwrap(), hintikka_naive(&p, m));
            }
        }
    }

    #[test]
    fn guards() {
        let g = Guards::default();
        assert!(matches!(system_type_with(&cycle(1, None), 4, &g), Err(Error::RankTooHigh { .. })));
        assert!(matches!(system_type_with(&cycle(15, None), 2, &g), Err(Error::StructureTooLarge { .. })));
        assert!(matches!(system_type_with(&cycle(9, None), 3, &g), Err(Error::StructureTooLarge { .. })));
        assert!(system_type_with(&cycle(14, None), 2, &g).is_ok());
    }

    #[test]
    fn rank_refines() {
        let a = cycle(2, None);
        let b = cycle(3, None);
        assert!(equiv_m(&a, &b, 0).unwrap());
        assert!(!equiv_m(&a, &b, 3).unwrap());
    }

    #[test]
    fn fuse_with_unnamed_members_breaks_composition() {
        // P = {init, p}; the two systems differ only in the direction of the
        // edge between p and x, which rank 1 cannot see from init.
        let build = |forward: bool| {
            let mut b = SystemBuilder::new();
            let s0 = b.state("s0");
            let p = b.state("p");
            let x = b.state("x");
            if forward {
                b.edge(x, "a", p);
            } else {
                b.edge(p, "a", x);
            }
            b.mark("P", s0);
            b.mark("P", p);
            b.build(s0)
        };
        let (a, a2) = (build(true), build(false));
        assert!(equiv_m(&a, &a2, 1).unwrap());
        assert!(!fuse_equiv_check(&a, &a2, "P", 1).unwrap());
    }
}
