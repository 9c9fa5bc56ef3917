//! Witness chains between hierarchical lassos: collapsing to a 1-lasso and
//! chains between lassos of equal nested type.
//!
//! Every step replaces one attached subsystem (a part entered by a single
//! edge) and lifts a chain for the replaced part into the whole system.
//! Bisimilarity lifts because the rest of the system is untouched, and
//! `≡_m` lifts by composition. The assembled chain is checked link by link
//! before it is returned.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::bisim::{bisim_classes, quotient};
use crate::error::{Error, Result};
use crate::hierarchy::types::TypeSession;
use crate::lasso::{klasso_recognize, lasso_decompose, Attachment, KLasso, Lasso};
use crate::mso::Guards;
use crate::path::PointedPath;
use crate::semigroup::{Link, PathAlgebra, WitnessChain};
use crate::system::{SystemBuilder, TransitionSystem};
use crate::{Color, Label};

/// A system with one attached subsystem cut out.
pub(crate) struct Hole {
    base: TransitionSystem,
    host: usize,
    label: Label,
    prefix: String,
}

impl Hole {
    /// Cuts out everything reachable from `dst`, which must be entered only
    /// through the edge `src -label-> dst` and must not reach `src`.
    pub(crate) fn cut(s: &TransitionSystem, src: usize, label: &str, dst: usize) -> Result<Hole> {
        let reach = s.reachable_from(dst);
        let entered_elsewhere = s
            .edges()
            .iter()
            .any(|e| !reach[e.src] && reach[e.dst] && !(e.src == src && e.dst == dst && e.label == label));
        if reach[src] || entered_elsewhere {
            return Err(Error::Invalid(format!("`{}` is not an attached subsystem", s.state_name(dst))));
        }
        let keep: Vec<bool> = reach.iter().map(|r| !r).collect();
        let base = s.induced(&keep, s.initial());
        let host = base.state_index(s.state_name(src)).expect("host is kept");
        let mut prefix = "h/".to_owned();
        while base.state_names().iter().any(|n| n.starts_with(&prefix)) {
            prefix.insert(0, 'h');
        }
        Ok(Hole { base, host, label: label.to_owned(), prefix })
    }

    /// The attachment hanging off main vertex `v` at index `i`.
    pub(crate) fn attachment(k: &KLasso, v: usize, i: usize) -> Result<Hole> {
        let s = k.to_system();
        let src = s.state_index(&main_name(v)).expect("main vertex");
        let dst = s.state_index(&attachment_root(v, i)).expect("attachment root");
        Hole::cut(&s, src, &k.attachments[&v][i].label, dst)
    }

    pub(crate) fn plug(&self, z: &TransitionSystem) -> TransitionSystem {
        self.base.attach(self.host, &self.label, z, &self.prefix)
    }

    pub(crate) fn lift(&self, c: &WitnessChain) -> WitnessChain {
        WitnessChain {
            rank: c.rank,
            systems: c.systems.iter().map(|z| self.plug(z)).collect(),
            links: c.links.clone(),
            unit_witness: c.unit_witness,
        }
    }
}

fn main_name(v: usize) -> String {
    format!("v{v}")
}

fn attachment_root(v: usize, i: usize) -> String {
    format!("v{v}.{i}/v0")
}

/// States where all outgoing edges carry one action and all branches from
/// the successors have one and the same weak type.
pub(crate) fn uniform_states(session: &mut TypeSession, sys: usize) -> Result<Vec<bool>> {
    session.ensure(0)?;
    let s = session.system(sys).clone();
    let mut out = Vec::with_capacity(s.num_states());
    for v in 0..s.num_states() {
        let labels: BTreeSet<&str> = s.out_edges(v).map(|e| e.label.as_str()).collect();
        let mut classes = BTreeSet::new();
        for e in s.out_edges(v) {
            classes.extend(session.tp_at(sys, e.dst, 0)?.classes);
        }
        out.push(labels.len() == 1 && classes.len() == 1);
    }
    Ok(out)
}


/// Collapses `k` to its main lasso by a verified chain. All branches from
/// the successors of every vertex must have one weak type, and every
/// outgoing edge of a vertex must carry the same action.
pub fn normalize_1lasso(k: &KLasso, m: usize, guards: &Guards) -> Result<(Lasso, WitnessChain)> {
    let s = k.to_system();
    let mut session = TypeSession::new(m, guards);
    let id = session.add(&s);
    let flags = uniform_states(&mut session, id)?;
    if let Some(v) = flags.iter().position(|f| !f) {
        return Err(Error::Precondition(format!(
            "branches from the successors of `{}` do not share one weak type and action",
            s.state_name(v)
        )));
    }
    let (l, chain) = collapse(k, session.algebra(0), m, guards)?;
    chain.check(guards).map_err(|e| Error::VerifyFailed(e.to_string()))?;
    Ok((l, chain))
}

/// The construction behind [`normalize_1lasso`], without the checks.
fn collapse(k: &KLasso, alg: &PathAlgebra, m: usize, guards: &Guards) -> Result<(Lasso, WitnessChain)> {
    let mut cur = k.clone().normalized();
    let mut chain = WitnessChain::new(m, cur.to_system());
    // deeper attachments first
    let positions: Vec<(usize, usize)> =
        cur.attachments.iter().flat_map(|(&v, atts)| (0..atts.len()).map(move |i| (v, i))).collect();
    for &(v, i) in &positions {
        let sub = cur.attachments[&v][i].sub.clone();
        if sub.level() >= 2 {
            let (l, c) = collapse(&sub, alg, m, guards)?;
            chain.extend(Hole::attachment(&cur, v, i)?.lift(&c));
            cur.attachments.get_mut(&v).expect("vertex")[i].sub = KLasso::from(l);
        }
    }
    // attachments on the loop become copies of the loop
    let loop_vertices: Vec<usize> =
        cur.attachments.keys().copied().filter(|&v| cur.main.is_loop_vertex(v)).collect();
    for &v in &loop_vertices {
        let (next, _) = cur.main.next(v);
        let target = cur.main.suffix(next);
        replace_all(&mut cur, &mut chain, v, &target, alg, guards)?;
    }
    if !loop_vertices.is_empty() {
        for v in &loop_vertices {
            cur.attachments.remove(v);
        }
        chain.push(Link::Bisim, cur.to_system());
    }
    // tail attachments, last vertex first
    while let Some(&v) = cur.attachments.keys().next_back() {
        let target = cur.main.suffix(v + 1);
        replace_all(&mut cur, &mut chain, v, &target, alg, guards)?;
        cur.attachments.remove(&v);
        chain.push(Link::Bisim, cur.to_system());
    }
    Ok((cur.main, chain))
}

/// Replaces every (level-1) attachment at `v` by `target`.
fn replace_all(
    cur: &mut KLasso,
    chain: &mut WitnessChain,
    v: usize,
    target: &Lasso,
    alg: &PathAlgebra,
    guards: &Guards,
) -> Result<()> {
    for i in 0..cur.attachments[&v].len() {
        let sub = cur.attachments[&v][i].sub.main.clone();
        if &sub == target {
            continue;
        }
        let c = alg.witness_chain(&sub, target, guards)?;
        chain.extend(Hole::attachment(cur, v, i)?.lift(&c));
        cur.attachments.get_mut(&v).expect("vertex")[i].sub = KLasso::from(target.clone());
    }
    Ok(())
}

/// The part of `k` from main vertex `w <= tail length` on.
fn suffix_klasso(k: &KLasso, w: usize) -> KLasso {
    let attachments = k.attachments.iter().filter(|(&v, _)| v >= w).map(|(&v, a)| (v - w, a.clone())).collect();
    KLasso { main: k.main.suffix(w), attachments }
}

/// The loop part of `k` read from loop vertex `j`, with its attachments.
fn loop_part_from(k: &KLasso, j: usize) -> KLasso {
    let t = k.main.tail().len();
    let n = k.main.loop_path().len();
    let attachments = k
        .attachments
        .iter()
        .filter(|(&v, _)| v >= t)
        .map(|(&v, a)| ((v - t + n - (j - t)) % n, a.clone()))
        .collect();
    KLasso { main: k.main.suffix(j), attachments }
}

/// `k` with the part from `w` on replaced by the plain lasso `l`.
fn join(k: &KLasso, w: usize, l: &Lasso) -> Result<KLasso> {
    let tail = k.main.tail().slice(0, w).concat(l.tail())?;
    let main = Lasso::new(tail, l.loop_path().clone())?;
    let attachments = k.attachments.iter().filter(|(&v, _)| v < w).map(|(&v, a)| (v, a.clone())).collect();
    Ok(KLasso { main, attachments })
}

/// Collapses the largest suffix of the main lasso that satisfies the
/// uniformity condition, then removes attachments just before it whose
/// type coincides with the main continuation.
fn prune(k: &KLasso, alg: &PathAlgebra, m: usize, guards: &Guards) -> Result<(KLasso, WitnessChain)> {
    let k = k.clone().normalized();
    let s = k.to_system();
    let mut session = TypeSession::new(m, guards);
    let id = session.add(&s);
    let flags = uniform_states(&mut session, id)?;
    let t = k.main.tail().len();
    let good = |w: usize| {
        let r = s.reachable_from(s.state_index(&main_name(w)).expect("main vertex"));
        r.iter().zip(&flags).all(|(&r, &f)| !r || f)
    };
    let mut chain = WitnessChain::new(m, s.clone());
    let Some(w) = (0..=t).find(|&w| good(w)) else {
        return Ok((k, chain));
    };
    let minimized = |sub: &KLasso| -> Result<(Lasso, WitnessChain)> {
        let (l, mut c) = if sub.attachments.is_empty() {
            (sub.main.clone(), WitnessChain::new(m, sub.to_system()))
        } else {
            collapse(sub, alg, m, guards)?
        };
        let small = lasso_decompose(&quotient(&l.to_system()))?;
        if small != l {
            c.push(Link::Bisim, small.to_system());
        }
        Ok((small, c))
    };
    if w == 0 {
        let (l, c) = minimized(&k)?;
        return Ok((KLasso::from(l), c));
    }
    let mut cur = k.clone();
    let sub = suffix_klasso(&k, w);
    let (l, c) = minimized(&sub)?;
    if c.systems.len() > 1 {
        let src = s.state_index(&main_name(w - 1)).expect("main vertex");
        let dst = s.state_index(&main_name(w)).expect("main vertex");
        let (_, label) = k.main.next(w - 1);
        chain.extend(Hole::cut(&s, src, label, dst)?.lift(&c));
        cur = join(&k, w, &l)?;
    }
    let v = w - 1;
    if cur.attachments.contains_key(&v) {
        let s1 = cur.to_system();
        let mut session = TypeSession::new(m, guards);
        let id = session.add(&s1);
        let main_tid = session.type_id(id, s1.state_index(&main_name(w)).expect("main vertex"), 1)?;
        let (_, main_label) = cur.main.next(v);
        let main_label = main_label.to_owned();
        let target = cur.main.suffix(w);
        let mut dropped = Vec::new();
        for i in 0..cur.attachments[&v].len() {
            let a = &cur.attachments[&v][i];
            let root = s1.state_index(&attachment_root(v, i)).expect("attachment root");
            if a.label != main_label || a.sub.level() != 1 || session.type_id(id, root, 1)? != main_tid {
                continue;
            }
            if a.sub.main != target {
                let c = alg.witness_chain(&a.sub.main, &target, guards)?;
                chain.extend(Hole::attachment(&cur, v, i)?.lift(&c));
                cur.attachments.get_mut(&v).expect("vertex")[i].sub = KLasso::from(target.clone());
            }
            dropped.push(i);
        }
        if !dropped.is_empty() {
            let atts = cur.attachments.get_mut(&v).expect("vertex");
            for &i in dropped.iter().rev() {
                atts.remove(i);
            }
            cur = cur.normalized();
            chain.push(Link::Bisim, cur.to_system());
        }
    }
    Ok((cur, chain))
}

/// The same unravelling read with another main branch: the branch that
/// leaves the main lasso at vertex `u` into its `i`-th attachment. The old
/// continuation becomes an attachment at `u`.
pub(crate) fn redecompose(k: &KLasso, u: usize, i: usize) -> Result<KLasso> {
    let att = &k.attachments[&u][i];
    let sub = &att.sub;
    let t = k.main.tail().len();
    let (next, main_label) = k.main.next(u);
    let prefix = if u < t {
        k.main.tail().slice(0, u)
    } else {
        k.main.tail().concat(&k.main.loop_path().slice(0, u - t))?
    };
    let edge = PointedPath::edge(k.main.vertex_color(u), &att.label, sub.main.vertex_color(0));
    let tail = prefix.concat(&edge)?.concat(sub.main.tail())?;
    let main = Lasso::new(tail, sub.main.loop_path().clone())?;
    let shift = prefix.len() + 1;
    let mut attachments: BTreeMap<usize, Vec<Attachment>> = BTreeMap::new();
    for (&v, atts) in &k.attachments {
        if v < u {
            attachments.insert(v, atts.clone());
        }
    }
    let mut here: Vec<Attachment> =
        k.attachments[&u].iter().enumerate().filter(|&(j, _)| j != i).map(|(_, a)| a.clone()).collect();
    let old = if u < t { suffix_klasso(k, next) } else { loop_part_from(k, next) };
    here.push(Attachment { label: main_label.to_owned(), sub: old.normalized() });
    attachments.insert(u, here);
    for (&v, atts) in &sub.attachments {
        attachments.insert(v + shift, atts.clone());
    }
    Ok(KLasso { main, attachments })
}

/// Main lasso of `k` recolored by base color and the set of
/// `(label, tp^1)` of the attachments, as interned names.
fn attachment_colored(
    k: &KLasso,
    sys: usize,
    session: &mut TypeSession,
    table: &mut AttTable,
) -> Result<Lasso> {
    let s = session.system(sys).clone();
    let n = k.main.num_vertices();
    let mut colors = Vec::with_capacity(n);
    for v in 0..n {
        let mut set = BTreeSet::new();
        for (i, a) in k.attachments.get(&v).map(Vec::as_slice).unwrap_or(&[]).iter().enumerate() {
            let root = s.state_index(&attachment_root(v, i)).expect("attachment root");
            set.insert((a.label.clone(), session.type_id(sys, root, 1)?));
        }
        colors.push(Some(table.intern(k.main.vertex_color(v).map(str::to_owned), set)));
    }
    recolor(&k.main, &colors)
}

fn recolor(l: &Lasso, colors: &[Option<Color>]) -> Result<Lasso> {
    let t = l.tail().len();
    let n = l.loop_path().len();
    let tail = PointedPath::new(colors[..=t].to_vec(), l.tail().labels().to_vec())?;
    let mut lc = colors[t..t + n].to_vec();
    lc.push(colors[t].clone());
    Lasso::new(tail, PointedPath::new(lc, l.loop_path().labels().to_vec())?)
}

#[derive(Default)]
struct AttTable {
    values: Vec<(Option<Color>, BTreeSet<(Label, usize)>)>,
    ids: HashMap<(Option<Color>, BTreeSet<(Label, usize)>), usize>,
}

impl AttTable {
    fn intern(&mut self, base: Option<Color>, set: BTreeSet<(Label, usize)>) -> String {
        let key = (base, set);
        let id = match self.ids.get(&key) {
            Some(&id) => id,
            None => {
                self.values.push(key.clone());
                self.ids.insert(key, self.values.len() - 1);
                self.values.len() - 1
            }
        };
        format!("A{id}")
    }

    fn get(&self, color: Option<&str>) -> Option<&(Option<Color>, BTreeSet<(Label, usize)>)> {
        self.values.get(color?.strip_prefix('A')?.parse::<usize>().ok()?)
    }
}

/// Replaces every attachment colored state by its base color plus one copy
/// of the representative of each listed type.
fn decode_colored(z: &TransitionSystem, table: &AttTable, reps: &BTreeMap<usize, KLasso>) -> Result<TransitionSystem> {
    let mut b = SystemBuilder::new();
    for v in 0..z.num_states() {
        let (base, _) = table
            .get(z.color(v))
            .ok_or_else(|| Error::Invalid(format!("state `{}` has no attachment color", z.state_name(v))))?;
        b.colored_state(z.state_name(v), base.as_deref());
    }
    for e in z.edges() {
        b.edge(e.src, e.label.clone(), e.dst);
    }
    for v in 0..z.num_states() {
        let (_, set) = table.get(z.color(v)).expect("checked above");
        for (j, (label, tid)) in set.iter().enumerate() {
            let rep = reps.get(tid).ok_or_else(|| Error::MissingRepresentative(format!("type t{tid}")))?;
            let map = rep.to_system().copy_into(&mut b, &format!("{}+{j}/", z.state_name(v)));
            b.edge(v, label.clone(), map[0]);
        }
    }
    Ok(b.build(z.initial()))
}

/// Chain from `sub` to the 1-lasso `rep` of equal `tp^1`.
fn representative_chain(
    sub: &KLasso,
    rep: &KLasso,
    alg: &PathAlgebra,
    m: usize,
    guards: &Guards,
) -> Result<WitnessChain> {
    if rep.level() > 1 {
        return Err(Error::LevelUnsupported(
            "two attachments of one type without a plain lasso representative".into(),
        ));
    }
    if sub.level() == 1 {
        return alg.witness_chain(&sub.main, &rep.main, guards);
    }
    let (l, mut c) = normalize_1lasso(sub, m, guards)?;
    if l != rep.main {
        c.extend(alg.witness_chain(&l, &rep.main, guards)?);
    }
    Ok(c)
}

/// Replaces every attachment by the representative of its type.
fn substitute(
    k: &KLasso,
    sys: usize,
    session: &mut TypeSession,
    reps: &BTreeMap<usize, KLasso>,
    alg: &PathAlgebra,
    m: usize,
    guards: &Guards,
) -> Result<(KLasso, WitnessChain)> {
    let s = session.system(sys).clone();
    let mut cur = k.clone();
    let mut chain = WitnessChain::new(m, s.clone());
    let positions: Vec<(usize, usize)> =
        k.attachments.iter().flat_map(|(&v, atts)| (0..atts.len()).map(move |i| (v, i))).collect();
    for (v, i) in positions {
        let root = s.state_index(&attachment_root(v, i)).expect("attachment root");
        let rep = &reps[&session.type_id(sys, root, 1)?];
        let sub = &k.attachments[&v][i].sub;
        if sub == rep {
            continue;
        }
        let c = representative_chain(sub, rep, alg, m, guards)?;
        chain.extend(Hole::attachment(&cur, v, i)?.lift(&c));
        cur.attachments.get_mut(&v).expect("vertex")[i].sub = rep.clone();
    }
    Ok((cur, chain))
}

/// A verified chain between hierarchical lassos of equal nested type, both
/// of level at most 2. Types are compared at the larger of the two levels.
pub fn tp_equiv_chain(a: &KLasso, b: &KLasso, m: usize, guards: &Guards) -> Result<WitnessChain> {
    if m == 0 {
        return Err(Error::Precondition("chains between nested types need rank at least 1".into()));
    }
    let level = a.level().max(b.level());
    if level > 2 {
        return Err(Error::LevelUnsupported(format!("level {level} (chains are built up to level 2)")));
    }
    let (sa, sb) = (a.to_system(), b.to_system());
    let mut session = TypeSession::new(m, guards);
    let ia = session.add(&sa);
    let ib = session.add(&sb);
    let (ta, tb) = (session.tp(ia, level)?, session.tp(ib, level)?);
    if ta != tb {
        return Err(Error::Precondition(format!("nested types differ: {ta} and {tb}")));
    }
    if a == b {
        return Ok(WitnessChain::new(m, sa));
    }
    let plain = session.algebra(0).clone();
    let chain = if level == 1 {
        plain.witness_chain(&a.main, &b.main, guards).map_err(|e| Error::VerifyFailed(e.to_string()))?
    } else {
        two_level_chain(a, b, &plain, m, guards)?
    };
    chain.check(guards).map_err(|e| Error::VerifyFailed(e.to_string()))?;
    Ok(chain)
}

/// Drops attachments bisimilar to a sibling or to the main continuation
/// with the same label. The result is bisimilar to `k`.
fn dedupe(k: &KLasso) -> KLasso {
    let s = k.to_system();
    let cls = bisim_classes(&s);
    let class = |name: &str| cls[s.state_index(name).expect("klasso state")];
    let mut out = k.clone();
    for (&v, atts) in &k.attachments {
        let (n, label) = k.main.next(v);
        let mut seen = BTreeSet::from([(label, class(&main_name(n)))]);
        let keep = atts
            .iter()
            .enumerate()
            .filter(|(i, a)| seen.insert((a.label.as_str(), class(&attachment_root(v, *i)))))
            .map(|(_, a)| a.clone())
            .collect();
        out.attachments.insert(v, keep);
    }
    out.normalized()
}

/// The bisimulation quotient when it is still a k-lasso of no greater level,
/// followed by [`prune`].
fn shrink(k: &KLasso, plain: &PathAlgebra, m: usize, guards: &Guards) -> Result<(KLasso, WitnessChain)> {
    let small = match klasso_recognize(&quotient(&k.to_system())) {
        Ok(q) if q.level() <= k.level() && q.num_states() < k.num_states() => q,
        _ => return prune(k, plain, m, guards),
    };
    let (p, c) = prune(&small, plain, m, guards)?;
    let mut chain = WitnessChain::new(m, k.to_system());
    chain.push(Link::Bisim, c.first().clone());
    chain.extend(c);
    Ok((p, chain))
}

fn two_level_chain(a: &KLasso, b: &KLasso, plain: &PathAlgebra, m: usize, guards: &Guards) -> Result<WitnessChain> {
    let (a0, mut ca) = shrink(a, plain, m, guards)?;
    let (b1, cb) = shrink(b, plain, m, guards)?;
    let a1 = dedupe(&a0);
    if a1 != a0 {
        ca.push(Link::Bisim, a1.to_system());
    }
    let mut candidates = vec![dedupe(&b1)];
    for (&u, atts) in &b1.attachments {
        for (i, att) in atts.iter().enumerate() {
            if att.sub.level() == 1 {
                candidates.push(dedupe(&redecompose(&b1, u, i)?));
            }
        }
    }
    let mut session = TypeSession::new(m, guards);
    let ia = session.add(&a1.to_system());
    let ids: Vec<usize> = candidates.iter().map(|c| session.add(&c.to_system())).collect();
    let mut table = AttTable::default();
    let la = attachment_colored(&a1, ia, &mut session, &mut table)?;
    let mut lbs = Vec::with_capacity(candidates.len());
    for (c, &id) in candidates.iter().zip(&ids) {
        lbs.push(attachment_colored(c, id, &mut session, &mut table)?);
    }
    let mut gens = BTreeSet::new();
    let mut units = BTreeSet::new();
    for l in std::iter::once(&la).chain(&lbs) {
        for p in [l.tail(), l.loop_path()] {
            units.extend(p.colors().iter().cloned());
            for j in 0..p.len() {
                gens.insert(p.slice(j, j + 1));
            }
        }
    }
    let gens: Vec<PointedPath> = gens.into_iter().collect();
    let units: Vec<Option<Color>> = units.into_iter().collect();
    let att_alg = PathAlgebra::build_generated(&gens, &units, m, guards)?;
    let wa = att_alg.weak_type(&la)?;
    let mut pick = None;
    for (j, lb) in lbs.iter().enumerate() {
        if att_alg.weak_type(lb)? == wa {
            pick = Some(j);
            break;
        }
    }
    let j = pick.ok_or_else(|| {
        Error::VerifyFailed("no branch of the second lasso matches the main branch of the first".into())
    })?;
    let chosen = &candidates[j];
    let mut reps: BTreeMap<usize, KLasso> = BTreeMap::new();
    for (k, id) in [(&a1, ia), (chosen, ids[j])] {
        let s = session.system(id).clone();
        for (&v, atts) in &k.attachments {
            for (i, att) in atts.iter().enumerate() {
                let root = s.state_index(&attachment_root(v, i)).expect("attachment root");
                let tid = session.type_id(id, root, 1)?;
                match reps.get(&tid) {
                    Some(r) if r.level() <= att.sub.level() => {}
                    _ => {
                        reps.insert(tid, att.sub.clone());
                    }
                }
            }
        }
    }
    let (a2, sa) = substitute(&a1, ia, &mut session, &reps, plain, m, guards)?;
    let (b2, sb) = substitute(chosen, ids[j], &mut session, &reps, plain, m, guards)?;
    let att_chain = att_alg.witness_chain(&la, &lbs[j], guards).map_err(|e| Error::VerifyFailed(e.to_string()))?;
    let mut decoded = WitnessChain::new(m, decode_colored(&att_chain.systems[0], &table, &reps)?);
    for (l, z) in att_chain.links.iter().zip(&att_chain.systems[1..]) {
        decoded.push(*l, decode_colored(z, &table, &reps)?);
    }
    decoded.unit_witness = att_chain.unit_witness;

    let mut chain = ca;
    chain.extend(sa);
    debug_assert!(a2.to_system().is_isomorphic(chain.last()));
    chain.push(Link::Bisim, decoded.first().clone());
    chain.extend(decoded);
    chain.push(Link::Bisim, b2.to_system());
    chain.extend(sb.reversed());
    if *chosen != b1 {
        chain.push(Link::Bisim, b1.to_system());
    }
    chain.extend(cb.reversed());
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::verify_chain;

    fn lasso(tail: &[&str], lp: &[&str]) -> Lasso {
        Lasso::new(PointedPath::word(tail), PointedPath::word(lp)).unwrap()
    }

    fn colored(tail: &[(Option<&str>, &str)], end: Option<&str>, lp: &[(Option<&str>, &str)]) -> Lasso {
        let path = |steps: &[(Option<&str>, &str)], last: Option<&str>| {
            let mut colors: Vec<Option<String>> = steps.iter().map(|(c, _)| c.map(str::to_owned)).collect();
            colors.push(last.map(str::to_owned));
            PointedPath::new(colors, steps.iter().map(|(_, l)| l.to_string()).collect()).unwrap()
        };
        let start = lp.first().map(|(c, _)| *c).unwrap_or(end);
        Lasso::new(path(tail, start), path(lp, start)).unwrap()
    }

    #[test]
    fn one_lasso_normalizes_to_itself() {
        let l = lasso(&["a"], &["a"]);
        let (n, c) = normalize_1lasso(&KLasso::from(l.clone()), 1, &Guards::default()).unwrap();
        assert_eq!(n, l);
        assert_eq!(c.systems.len(), 1);
    }

    #[test]
    fn loop_attachment_equal_to_cycle_collapses() {
        let mut k = KLasso::from(lasso(&["a"], &["a"]));
        k.attach_with(1, "a", KLasso::from(lasso(&[], &["a"])));
        let (n, c) = normalize_1lasso(&k, 1, &Guards::default()).unwrap();
        assert_eq!(n, lasso(&["a"], &["a"]));
        assert!(verify_chain(&c));
    }

    #[test]
    fn tail_attachment_collapses() {
        let mut k = KLasso::from(lasso(&["a", "a"], &["a"]));
        k.attach_with(0, "a", KLasso::from(lasso(&["a", "a"], &["a", "a"])));
        let (_, c) = normalize_1lasso(&k, 1, &Guards::default()).unwrap();
        assert!(verify_chain(&c));
        assert!(c.systems.len() > 2);
    }

    #[test]
    fn precondition_checked() {
        let mut k = KLasso::from(lasso(&["a"], &["a"]));
        let p = colored(&[], Some("p"), &[(Some("p"), "a")]);
        k.attach_with(0, "a", KLasso::from(p));
        assert!(matches!(normalize_1lasso(&k, 1, &Guards::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn equal_one_lassos_chain() {
        let a = KLasso::from(lasso(&["a"], &["b", "a"]));
        let b = KLasso::from(lasso(&["a", "b", "a"], &["b", "a"]));
        let c = tp_equiv_chain(&a, &b, 1, &Guards::default()).unwrap();
        assert!(verify_chain(&c));
        assert_eq!(tp_equiv_chain(&a, &a, 1, &Guards::default()).unwrap().systems.len(), 1);
    }

    #[test]
    fn representative_substitution_chain() {
        let p1 = colored(&[], Some("p"), &[(Some("p"), "b")]);
        let p2 = colored(&[(Some("p"), "b")], Some("p"), &[(Some("p"), "b"), (Some("p"), "b")]);
        let mut a = KLasso::from(lasso(&["a"], &["a"]));
        a.attach_with(0, "b", KLasso::from(p1));
        let mut b = KLasso::from(lasso(&["a"], &["a"]));
        b.attach_with(0, "b", KLasso::from(p2));
        let c = tp_equiv_chain(&a, &b, 1, &Guards::default()).unwrap();
        assert!(verify_chain(&c));
    }

    #[test]
    fn swapped_main_branch() {
        let p = colored(&[], Some("p"), &[(Some("p"), "a")]);
        let q = lasso(&[], &["a"]);
        let mut a = KLasso::from(Lasso::new(PointedPath::word(&["a"]), PointedPath::word(&["a"])).unwrap());
        a.attach_with(0, "a", KLasso::from(p.clone()));
        let main_b = Lasso::new(
            PointedPath::new(vec![None, Some("p".into())], vec!["a".into()]).unwrap(),
            p.loop_path().clone(),
        )
        .unwrap();
        let mut b = KLasso::from(main_b);
        b.attach_with(0, "a", KLasso::from(q));
        let c = tp_equiv_chain(&a, &b, 1, &Guards::default()).unwrap();
        assert!(verify_chain(&c));
    }

    #[test]
    fn differing_types_rejected() {
        let a = KLasso::from(lasso(&[], &["a"]));
        let mut b = KLasso::from(lasso(&[], &["a"]));
        b.attach_with(0, "b", KLasso::from(lasso(&[], &["b"])));
        assert!(matches!(tp_equiv_chain(&a, &b, 1, &Guards::default()), Err(Error::Precondition(_))));
    }
}
