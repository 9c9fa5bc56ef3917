//! Nested branch types of hierarchical lassos.
//!
//! Types are computed on the finite system rather than on its unravelling:
//! subtrees of the unravelling are unravellings of states, so `tp^j` is a
//! function of the state. Level `j + 1` recolors every state by its base
//! color together with the set of `(label, tp^j)` of all of its successors,
//! and `tp^{j+1}` is the set of weak types of branches in that recoloring.
//!
//! Class ids and type ids are only meaningful inside one [`TypeSession`]: the
//! algebra of each level is generated by the letters that occur in the
//! session's systems.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::lasso::KLasso;
use crate::mso::Guards;
use crate::path::PointedPath;
use crate::semigroup::{PathAlgebra, TypePair};
use crate::system::{SystemBuilder, TransitionSystem};
use crate::{Color, Label};

/// `tp^level`: a set of conjugacy class ids of the level's session algebra.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NestedType {
    pub level: usize,
    pub classes: BTreeSet<usize>,
}

impl fmt::Display for NestedType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ks: Vec<String> = self.classes.iter().map(|k| format!("k{k}")).collect();
        write!(f, "tp{}{{{}}}", self.level, ks.join(","))
    }
}

/// Color of a state at level `j + 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Enriched {
    pub base: Option<Color>,
    /// `(label, type id at level j)` of every successor.
    pub succ: BTreeSet<(Label, usize)>,
}

struct Level {
    colors: Vec<Vec<Option<Color>>>,
    algebra: PathAlgebra,
    types: Vec<Vec<usize>>,
}

/// Joint type computation for a batch of systems.
pub struct TypeSession {
    rank: usize,
    guards: Guards,
    systems: Vec<TransitionSystem>,
    levels: Vec<Level>,
    /// Per level: interned type values.
    values: Vec<Vec<BTreeSet<usize>>>,
    value_ids: Vec<HashMap<BTreeSet<usize>, usize>>,
    /// Per level >= 1: interned enriched colors.
    enriched: Vec<Vec<Enriched>>,
    enriched_ids: Vec<HashMap<Enriched, usize>>,
}

pub(crate) fn enriched_name(level: usize, id: usize) -> String {
    format!("L{level}c{id}")
}

impl TypeSession {
    pub fn new(rank: usize, guards: &Guards) -> Self {
        TypeSession {
            rank,
            guards: *guards,
            systems: Vec::new(),
            levels: Vec::new(),
            values: Vec::new(),
            value_ids: Vec::new(),
            enriched: Vec::new(),
            enriched_ids: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn guards(&self) -> &Guards {
        &self.guards
    }

    /// Adds a system. Computed levels are discarded, since the algebras
    /// depend on every system in the session.
    pub fn add(&mut self, s: &TransitionSystem) -> usize {
        self.levels.clear();
        self.values.clear();
        self.value_ids.clear();
        self.enriched.clear();
        self.enriched_ids.clear();
        self.systems.push(s.clone());
        self.systems.len() - 1
    }

    pub fn system(&self, id: usize) -> &TransitionSystem {
        &self.systems[id]
    }

    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    /// Computes levels `0..=level`.
    pub fn ensure(&mut self, level: usize) -> Result<()> {
        while self.levels.len() <= level {
            let j = self.levels.len();
            let colors = if j == 0 {
                self.systems.iter().map(|s| s.colors().to_vec()).collect()
            } else {
                self.next_colors(j)
            };
            let algebra = level_algebra(&self.systems, &colors, self.rank, &self.guards)?;
            let mut types = Vec::with_capacity(self.systems.len());
            if self.values.len() <= j {
                self.values.push(Vec::new());
                self.value_ids.push(HashMap::new());
            }
            for (si, s) in self.systems.iter().enumerate() {
                let sets = branch_types(s, &colors[si], &algebra)?;
                let ids = sets
                    .into_iter()
                    .map(|set| {
                        let ids = &mut self.value_ids[j];
                        let vals = &mut self.values[j];
                        *ids.entry(set.clone()).or_insert_with(|| {
                            vals.push(set);
                            vals.len() - 1
                        })
                    })
                    .collect();
                types.push(ids);
            }
            self.levels.push(Level { colors, algebra, types });
        }
        Ok(())
    }

    fn next_colors(&mut self, j: usize) -> Vec<Vec<Option<Color>>> {
        while self.enriched.len() < j {
            self.enriched.push(Vec::new());
            self.enriched_ids.push(HashMap::new());
        }
        let prev = &self.levels[j - 1];
        let mut out = Vec::with_capacity(self.systems.len());
        for (si, s) in self.systems.iter().enumerate() {
            let mut row = Vec::with_capacity(s.num_states());
            for v in 0..s.num_states() {
                let e = Enriched {
                    base: s.color(v).map(str::to_owned),
                    succ: s.out_edges(v).map(|e| (e.label.clone(), prev.types[si][e.dst])).collect(),
                };
                let ids = &mut self.enriched_ids[j - 1];
                let vals = &mut self.enriched[j - 1];
                let id = *ids.entry(e.clone()).or_insert_with(|| {
                    vals.push(e);
                    vals.len() - 1
                });
                row.push(Some(enriched_name(j, id)));
            }
            out.push(row);
        }
        out
    }

    /// `tp^level` of a state.
    pub fn tp_at(&mut self, sys: usize, state: usize, level: usize) -> Result<NestedType> {
        let id = self.type_id(sys, state, level)?;
        Ok(NestedType { level, classes: self.values[level][id].clone() })
    }

    /// `tp^level` of the initial state.
    pub fn tp(&mut self, sys: usize, level: usize) -> Result<NestedType> {
        let init = self.systems[sys].initial();
        self.tp_at(sys, init, level)
    }

    /// Interned id of `tp^level` of a state; equal ids mean equal types.
    pub fn type_id(&mut self, sys: usize, state: usize, level: usize) -> Result<usize> {
        self.ensure(level)?;
        Ok(self.levels[level].types[sys][state])
    }

    pub fn type_value(&self, level: usize, id: usize) -> NestedType {
        NestedType { level, classes: self.values[level][id].clone() }
    }

    /// State colors of a system at a computed level.
    pub fn colors(&self, sys: usize, level: usize) -> &[Option<Color>] {
        &self.levels[level].colors[sys]
    }

    /// Algebra of a computed level.
    pub fn algebra(&self, level: usize) -> &PathAlgebra {
        &self.levels[level].algebra
    }

    /// Meaning of an enriched color name at `level >= 1`.
    pub fn enriched(&self, color: &str) -> Option<&Enriched> {
        let rest = color.strip_prefix('L')?;
        let (l, id) = rest.split_once('c')?;
        let l: usize = l.parse().ok()?;
        self.enriched.get(l.checked_sub(1)?)?.get(id.parse::<usize>().ok()?)
    }

    /// The system recolored at `level` (level 0 is the system itself).
    pub fn relabeled(&mut self, sys: usize, level: usize) -> Result<TransitionSystem> {
        self.ensure(level)?;
        let s = &self.systems[sys];
        let mut b = SystemBuilder::new();
        for v in 0..s.num_states() {
            b.colored_state(s.state_name(v), self.levels[level].colors[sys][v].as_deref());
        }
        for e in s.edges() {
            b.edge(e.src, e.label.clone(), e.dst);
        }
        Ok(b.build(s.initial()))
    }

    /// Human-readable rendering of an enriched color, recursively.
    pub fn describe_color(&self, color: Option<&str>) -> String {
        match color {
            None => "-".to_owned(),
            Some(c) => match self.enriched(c) {
                None => c.to_owned(),
                Some(e) => {
                    let items: Vec<String> = e.succ.iter().map(|(l, t)| format!("{l}:t{t}")).collect();
                    format!("{}[{}]", self.describe_color(e.base.as_deref()), items.join(" "))
                }
            },
        }
    }
}

fn level_algebra(
    systems: &[TransitionSystem],
    colors: &[Vec<Option<Color>>],
    m: usize,
    guards: &Guards,
) -> Result<PathAlgebra> {
    let mut gens = BTreeSet::new();
    let mut units = BTreeSet::new();
    for (s, cs) in systems.iter().zip(colors) {
        units.extend(cs.iter().cloned());
        for e in s.edges() {
            gens.insert((cs[e.src].clone(), e.label.clone(), cs[e.dst].clone()));
        }
    }
    let gens: Vec<PointedPath> =
        gens.into_iter().map(|(a, l, b)| PointedPath::edge(a.as_deref(), &l, b.as_deref())).collect();
    let units: Vec<Option<Color>> = units.into_iter().collect();
    PathAlgebra::build_generated(&gens, &units, m, guards)
}

/// Generator index of every edge.
fn edge_letters(s: &TransitionSystem, colors: &[Option<Color>], alg: &PathAlgebra) -> Result<Vec<Vec<(usize, usize)>>> {
    let mut out = vec![Vec::new(); s.num_states()];
    for e in s.edges() {
        let g = alg
            .generator(colors[e.src].as_deref(), &e.label, colors[e.dst].as_deref())
            .ok_or_else(|| Error::Invalid(format!("edge from `{}` is not a generator", s.state_name(e.src))))?;
        out[e.src].push((e.dst, g));
    }
    Ok(out)
}

/// Set of weak types of the infinite branches from every state.
///
/// Every ω-regular set of paths that is non-empty contains an ultimately
/// periodic path, so it suffices to combine the element of every finite path
/// `s -> w` with the element of every closed walk `w -> w`.
pub(crate) fn branch_types(
    s: &TransitionSystem,
    colors: &[Option<Color>],
    alg: &PathAlgebra,
) -> Result<Vec<BTreeSet<usize>>> {
    let n = s.num_states();
    let succ = edge_letters(s, colors, alg)?;
    let unit = |v: usize| alg.unit_for(colors[v].as_deref()).expect("every state color has a unit");
    let explore = |start: Vec<(usize, usize)>| -> HashSet<(usize, usize)> {
        let mut seen: HashSet<(usize, usize)> = start.iter().copied().collect();
        let mut queue: VecDeque<(usize, usize)> = start.into_iter().collect();
        while let Some((v, x)) = queue.pop_front() {
            for &(t, g) in &succ[v] {
                let y = alg.mul_generator(x, g).expect("edge letters compose");
                if seen.insert((t, y)) {
                    queue.push_back((t, y));
                }
            }
        }
        seen
    };
    let mut cycles: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for w in 0..n {
        let start = succ[w].iter().map(|&(t, g)| (t, alg.mul_generator(unit(w), g).expect("letter"))).collect();
        for (v, x) in explore(start) {
            if v == w {
                cycles[w].insert(x);
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    for v in 0..n {
        let mut set = BTreeSet::new();
        let mut pairs: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for (w, x) in explore(vec![(v, unit(v))]) {
            if !cycles[w].is_empty() {
                pairs.entry(w).or_default().insert(x);
            }
        }
        for (w, xs) in pairs {
            for &x in &xs {
                for &y in &cycles[w] {
                    set.insert(alg.class_of(TypePair { alpha: x, beta: y })?);
                }
            }
        }
        out.push(set);
    }
    Ok(out)
}

/// `tp^k_m(M)` for `k = level(M)`.
pub fn tp(m_lasso: &KLasso, m: usize) -> Result<NestedType> {
    tp_with(m_lasso, m, &Guards::default())
}

pub fn tp_with(m_lasso: &KLasso, m: usize, guards: &Guards) -> Result<NestedType> {
    let mut session = TypeSession::new(m, guards);
    let id = session.add(&m_lasso.to_system());
    session.tp(id, m_lasso.level())
}

/// `TP^{k-1}_m` on the finite presentation of `M`: the system of `M` with
/// every state recolored by its base color and the types of its successors.
/// Also returns the session, which interprets the new colors.
pub fn relabel_tp(m_lasso: &KLasso, m: usize, guards: &Guards) -> Result<(TransitionSystem, TypeSession)> {
    let mut session = TypeSession::new(m, guards);
    let id = session.add(&m_lasso.to_system());
    let s = session.relabeled(id, m_lasso.level())?;
    Ok((s, session))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lasso::Lasso;

    fn lasso(tail: &[&str], lp: &[&str]) -> Lasso {
        Lasso::new(PointedPath::word(tail), PointedPath::word(lp)).unwrap()
    }

    #[test]
    fn one_lasso_has_a_single_branch_type() {
        let t = tp(&KLasso::from(lasso(&["a"], &["b"])), 1).unwrap();
        assert_eq!(t.level, 1);
        assert_eq!(t.classes.len(), 1);
    }

    #[test]
    fn unrolling_preserves_tp() {
        let l = lasso(&["a"], &["b", "a"]);
        let mut s = TypeSession::new(1, &Guards::default());
        let x = s.add(&l.to_system());
        let y = s.add(&l.unroll(3).to_system());
        let z = s.add(&l.shift(1).to_system());
        let w = s.add(&lasso(&["a"], &["b"]).to_system());
        let t = s.tp(x, 1).unwrap();
        assert_eq!(t, s.tp(y, 1).unwrap());
        assert_eq!(t, s.tp(z, 1).unwrap());
        assert_ne!(t, s.tp(w, 1).unwrap());
    }

    #[test]
    fn two_branches_give_two_types() {
        let mut k = KLasso::from(lasso(&["a"], &["a"]));
        let p = Lasso::new(PointedPath::unit(Some("p")), PointedPath::edge(Some("p"), "b", Some("p"))).unwrap();
        k.attach_with(0, "a", KLasso::from(p));
        let mut s = TypeSession::new(1, &Guards::default());
        let id = s.add(&k.to_system());
        assert_eq!(s.tp(id, 0).unwrap().classes.len(), 2);
        assert_eq!(s.tp(id, 2).unwrap().classes.len(), 2);
    }

    #[test]
    fn duplicate_attachments_give_set_labels() {
        let mut one = KLasso::from(lasso(&["a"], &["a"]));
        one.attach_with(0, "a", KLasso::from(lasso(&[], &["b"])));
        let mut two = one.clone();
        two.attach_with(0, "a", KLasso::from(lasso(&[], &["b"])));
        let mut s = TypeSession::new(1, &Guards::default());
        let x = s.add(&one.to_system());
        let y = s.add(&two.to_system());
        let cx = s.relabeled(x, 1).unwrap();
        let cy = s.relabeled(y, 1).unwrap();
        assert_eq!(cx.color(0), cy.color(0));
        let e = s.enriched(cx.color(0).unwrap()).unwrap();
        assert_eq!(e.succ.len(), 2);
        assert_eq!(s.tp(x, 2).unwrap(), s.tp(y, 2).unwrap());
    }

    #[test]
    fn relabel_of_one_lasso_has_singleton_labels() {
        let (r, session) = relabel_tp(&KLasso::from(lasso(&["a"], &["b"])), 1, &Guards::default()).unwrap();
        for v in 0..r.num_states() {
            assert_eq!(session.enriched(r.color(v).unwrap()).unwrap().succ.len(), 1);
        }
    }

    #[test]
    fn dead_ends_contribute_nothing() {
        let s = TransitionSystem::from_parts(
            ["x".to_owned(), "y".to_owned()],
            "x",
            [],
            [("x".to_owned(), "a".to_owned(), "y".to_owned())],
        )
        .unwrap();
        let mut session = TypeSession::new(1, &Guards::default());
        let id = session.add(&s);
        assert!(session.tp(id, 0).unwrap().classes.is_empty());
    }
}
