//! Encodings that strip finite decorations off a skeleton, and the
//! matching decoders.
//!
//! A removed piece is stored as a system whose initial state stands for the
//! vertex it hung from; decoding glues the representative of every label
//! onto its vertex by identifying the two. Representatives are the concrete
//! pieces met first (vertex order, then edge order), so re-encoding a
//! decoded system gives back the same labels.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::hierarchy::chains::tp_equiv_chain;
use crate::hierarchy::types::{NestedType, TypeSession};
use crate::lasso::{klasso_recognize, Recognizer};
use crate::mso::{system_type_with, Guards, TypeId};
use crate::scc::Condensation;
use crate::semigroup::{Link, WitnessChain};
use crate::system::{Edge, SystemBuilder, TransitionSystem};
use crate::Color;

/// Type of a removed piece.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LabelKey {
    /// Rank-`m` theory of a finite tree hung from an uncolored root.
    Theory(TypeId),
    /// Nested type of a hierarchical lasso.
    Nested(NestedType),
}

impl fmt::Display for LabelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelKey::Theory(t) => write!(f, "{t}"),
            LabelKey::Nested(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EncodedSystem {
    pub rank: usize,
    pub skeleton: TransitionSystem,
    /// Per skeleton state.
    pub labels: Vec<BTreeSet<LabelKey>>,
    pub dictionary: BTreeMap<LabelKey, TransitionSystem>,
}

/// Interned `(color, label set)` pairs, named `E0`, `E1`, ...
#[derive(Clone, Debug, Default)]
pub struct LabelColors {
    values: Vec<(Option<Color>, BTreeSet<LabelKey>)>,
    ids: HashMap<(Option<Color>, BTreeSet<LabelKey>), usize>,
}

impl LabelColors {
    fn intern(&mut self, color: Option<&str>, set: &BTreeSet<LabelKey>) -> String {
        let key = (color.map(str::to_owned), set.clone());
        let next = self.values.len();
        let id = *self.ids.entry(key.clone()).or_insert(next);
        if id == next {
            self.values.push(key);
        }
        format!("E{id}")
    }

    fn get(&self, color: Option<&str>) -> Option<&(Option<Color>, BTreeSet<LabelKey>)> {
        self.values.get(color?.strip_prefix('E')?.parse::<usize>().ok()?)
    }
}

impl EncodedSystem {
    /// The skeleton recolored so each color carries the original color and
    /// the label set.
    pub fn label_colored(&self) -> (TransitionSystem, LabelColors) {
        let mut table = LabelColors::default();
        let mut b = SystemBuilder::new();
        for v in 0..self.skeleton.num_states() {
            let c = table.intern(self.skeleton.color(v), &self.labels[v]);
            b.colored_state(self.skeleton.state_name(v), Some(&c));
        }
        for e in self.skeleton.edges() {
            b.edge(e.src, e.label.clone(), e.dst);
        }
        (b.build(self.skeleton.initial()), table)
    }

    /// Inverse of [`label_colored`](Self::label_colored) for any system
    /// colored from `table`, reusing this dictionary.
    pub fn with_label_colored(&self, z: &TransitionSystem, table: &LabelColors) -> Result<EncodedSystem> {
        let mut b = SystemBuilder::new();
        let mut labels = Vec::with_capacity(z.num_states());
        for v in 0..z.num_states() {
            let (color, set) = table
                .get(z.color(v))
                .ok_or_else(|| Error::Invalid(format!("state `{}` carries no label color", z.state_name(v))))?;
            b.colored_state(z.state_name(v), color.as_deref());
            labels.push(set.clone());
        }
        for e in z.edges() {
            b.edge(e.src, e.label.clone(), e.dst);
        }
        Ok(EncodedSystem {
            rank: self.rank,
            skeleton: b.build(z.initial()),
            labels,
            dictionary: self.dictionary.clone(),
        })
    }

    pub fn report(&self) -> String {
        let s = &self.skeleton;
        let mut out = format!(
            "skeleton: {} states, {} edges\ndictionary: {} entries\n",
            s.num_states(),
            s.num_edges(),
            self.dictionary.len()
        );
        for (v, set) in self.labels.iter().enumerate() {
            if set.is_empty() {
                continue;
            }
            let keys: Vec<String> = set.iter().map(ToString::to_string).collect();
            out.push_str(&format!("label {}: {{{}}}\n", s.state_name(v), keys.join(", ")));
        }
        for (k, rep) in &self.dictionary {
            out.push_str(&format!("entry {k}: {} states\n", rep.num_states()));
        }
        out
    }
}

/// Copies `rep` into `b`, identifying its initial state with `host`.
fn glue(b: &mut SystemBuilder, host: usize, rep: &TransitionSystem, prefix: &str) {
    let map: Vec<usize> = (0..rep.num_states())
        .map(|v| if v == rep.initial() { host } else { b.colored_state(format!("{prefix}{}", rep.state_name(v)), rep.color(v)) })
        .collect();
    for e in rep.edges() {
        b.edge(map[e.src], e.label.clone(), map[e.dst]);
    }
}

/// Reattaches one representative per label at every skeleton state.
pub fn decode(e: &EncodedSystem) -> Result<TransitionSystem> {
    decode_parts(&e.skeleton, &e.labels, &e.dictionary)
}

/// [`decode`] over any key type, e.g. the opaque names of a serialized
/// encoding.
pub fn decode_parts<K: Ord + fmt::Display>(
    s: &TransitionSystem,
    labels: &[BTreeSet<K>],
    dictionary: &BTreeMap<K, TransitionSystem>,
) -> Result<TransitionSystem> {
    if labels.len() != s.num_states() {
        return Err(Error::Invalid(format!("{} label sets for {} skeleton states", labels.len(), s.num_states())));
    }
    let mut b = SystemBuilder::new();
    s.copy_into(&mut b, "");
    for (v, set) in labels.iter().enumerate() {
        for (j, key) in set.iter().enumerate() {
            let rep = dictionary.get(key).ok_or_else(|| Error::MissingRepresentative(key.to_string()))?;
            glue(&mut b, v, rep, &format!("{}+{j}/", s.state_name(v)));
        }
    }
    Ok(b.build(s.initial()))
}

/// `host` plus everything reachable from `edge.dst`, rooted at `host`.
fn piece(s: &TransitionSystem, host: usize, edge: &Edge, root_color: bool) -> TransitionSystem {
    let mut keep = s.reachable_from(edge.dst);
    keep[host] = true;
    let mut b = SystemBuilder::new();
    let mut map = vec![usize::MAX; s.num_states()];
    map[host] = b.colored_state(s.state_name(host), if root_color { s.color(host) } else { None });
    for v in (0..s.num_states()).filter(|&v| keep[v] && v != host) {
        map[v] = b.colored_state(s.state_name(v), s.color(v));
    }
    for e in s.edges() {
        if keep[e.src] && keep[e.dst] && (e.src != host || e.dst == edge.dst) {
            b.edge(map[e.src], e.label.clone(), map[e.dst]);
        }
    }
    b.build(map[host])
}

/// `s` with the piece behind `edge` replaced by `rep` glued at its host.
fn replace_piece(s: &TransitionSystem, edge: &Edge, rep: &TransitionSystem, prefix: &str) -> TransitionSystem {
    let base = cut_part(s, edge.src, Some(edge));
    let host = base.state_index(s.state_name(edge.src)).expect("host kept");
    let mut b = SystemBuilder::new();
    base.copy_into(&mut b, "");
    glue(&mut b, host, rep, prefix);
    b.build(base.initial())
}

/// `s` without the part hanging off `host`: the part behind `edge`, or
/// everything `host` reaches when no edge is given. `host` stays.
fn cut_part(s: &TransitionSystem, host: usize, edge: Option<&Edge>) -> TransitionSystem {
    let gone = s.reachable_from(edge.map_or(host, |e| e.dst));
    let mut b = SystemBuilder::new();
    let mut map = vec![usize::MAX; s.num_states()];
    for v in (0..s.num_states()).filter(|&v| v == host || !gone[v]) {
        map[v] = b.colored_state(s.state_name(v), s.color(v));
    }
    for e in s.edges() {
        let dropped = match edge {
            Some(x) => e == x,
            None => e.src == host,
        };
        if map[e.src] != usize::MAX && map[e.dst] != usize::MAX && !dropped {
            b.edge(map[e.src], e.label.clone(), map[e.dst]);
        }
    }
    b.build(map[s.initial()])
}

/// States from which a cycle is reachable.
fn infinite_part(s: &TransitionSystem) -> Vec<bool> {
    let cond = Condensation::of(s);
    // successors have smaller component ids
    let mut live = vec![false; cond.len()];
    for c in 0..cond.len() {
        live[c] = cond.on_cycle(cond.members[c][0]) || cond.succ[c].iter().any(|&d| live[d]);
    }
    (0..s.num_states()).map(|v| live[cond.comp[v]]).collect()
}

/// Edges from the skeleton into removed trees, in skeleton order.
fn tree_edges(s: &TransitionSystem, core: &[bool]) -> Vec<Edge> {
    (0..s.num_states())
        .filter(|&v| core[v])
        .flat_map(|v| s.out_edges(v).filter(|e| !core[e.dst]).cloned().collect::<Vec<_>>())
        .collect()
}

/// Strips the finite trees hanging off the states with an infinite future.
/// The rest must be a hierarchical lasso and the removed parts must be
/// trees.
pub fn encode_tree_extension(s: &TransitionSystem, m: usize, guards: &Guards) -> Result<EncodedSystem> {
    let s = s.restrict_reachable();
    let core = infinite_part(&s);
    if !core[s.initial()] {
        return Err(Error::NotRecognized("no infinite branch".into()));
    }
    let mut indeg = vec![0usize; s.num_states()];
    for e in s.edges() {
        indeg[e.dst] += 1;
    }
    if let Some(v) = (0..s.num_states()).find(|&v| !core[v] && indeg[v] != 1) {
        return Err(Error::NotRecognized(format!(
            "finite part at `{}` is entered {} times (unravel it first)",
            s.state_name(v),
            indeg[v]
        )));
    }
    let skeleton = s.induced(&core, s.initial());
    klasso_recognize(&skeleton).map_err(|e| Error::NotRecognized(format!("skeleton: {e}")))?;
    let mut labels = vec![BTreeSet::new(); skeleton.num_states()];
    let mut dictionary = BTreeMap::new();
    for (host, key, p) in typed_pieces(&s, &core, m, guards)? {
        let v = skeleton.state_index(s.state_name(host)).expect("skeleton state");
        labels[v].insert(key.clone());
        dictionary.entry(key).or_insert(p);
    }
    Ok(EncodedSystem { rank: m, skeleton, labels, dictionary })
}

fn typed_pieces(
    s: &TransitionSystem,
    core: &[bool],
    m: usize,
    guards: &Guards,
) -> Result<Vec<(usize, LabelKey, TransitionSystem)>> {
    tree_edges(s, core)
        .into_iter()
        .map(|e| {
            let p = piece(s, e.src, &e, false);
            Ok((e.src, LabelKey::Theory(system_type_with(&p, m, guards)?), p))
        })
        .collect()
}

/// Every finite piece hanging off the infinite part, with its label.
pub fn tree_pieces(s: &TransitionSystem, m: usize, guards: &Guards) -> Result<Vec<(LabelKey, TransitionSystem)>> {
    let s = s.restrict_reachable();
    let core = infinite_part(&s);
    Ok(typed_pieces(&s, &core, m, guards)?.into_iter().map(|(_, k, p)| (k, p)).collect())
}

/// Chain from `s` to the decoding of its encoding: one `≡_m` step per
/// piece that is not its own representative, then one bisimulation that
/// merges duplicates.
pub fn tree_extension_chain(s: &TransitionSystem, enc: &EncodedSystem, guards: &Guards) -> Result<WitnessChain> {
    let s = s.restrict_reachable();
    let core = infinite_part(&s);
    let mut cur = s.clone();
    let mut chain = WitnessChain::new(enc.rank, s.clone());
    for (i, e) in tree_edges(&s, &core).into_iter().enumerate() {
        let p = piece(&s, e.src, &e, false);
        let key = LabelKey::Theory(system_type_with(&p, enc.rank, guards)?);
        let rep = enc.dictionary.get(&key).ok_or_else(|| Error::MissingRepresentative(key.to_string()))?;
        if *rep == p {
            continue;
        }
        let edge = Edge {
            src: cur.state_index(s.state_name(e.src)).expect("host"),
            label: e.label.clone(),
            dst: cur.state_index(s.state_name(e.dst)).expect("piece root"),
        };
        cur = replace_piece(&cur, &edge, rep, &format!("{}+r{i}/", s.state_name(e.src)));
        chain.push(Link::EquivM, cur.clone());
    }
    chain.push(Link::Bisim, decode(enc)?);
    chain.check(guards).map_err(|e| Error::VerifyFailed(e.to_string()))?;
    Ok(chain)
}

struct GlassoShape {
    tree: Vec<bool>,
    /// Leaf and the edges splitting it into parts (`None`: the leaf lies on
    /// a cycle and is one part).
    leaves: Vec<(usize, Option<Vec<Edge>>)>,
}

fn glasso_node(
    s: &TransitionSystem,
    rec: &mut Recognizer<'_>,
    cond: &Condensation,
    v: usize,
    level: usize,
    shape: &mut GlassoShape,
) -> Result<()> {
    shape.tree[v] = true;
    let edges: Vec<Edge> = s.out_edges(v).cloned().collect();
    if edges.is_empty() {
        return Err(Error::NotRecognized(format!("state `{}` has no successor", s.state_name(v))));
    }
    let fits = |p: &TransitionSystem| klasso_recognize(p).is_ok_and(|k| k.level() <= level);
    if cond.on_cycle(v) {
        if fits(&s.rooted_at(v)) {
            shape.leaves.push((v, None));
            return Ok(());
        }
        return Err(Error::NotRecognized(format!(
            "the part from `{}` is not a lasso of level at most {level}",
            s.state_name(v)
        )));
    }
    if !edges.iter().all(|e| rec.detachable(e.src, &e.label, e.dst)) {
        return Err(Error::NotRecognized(format!("successors of `{}` share states", s.state_name(v))));
    }
    if edges.iter().all(|e| fits(&piece(s, v, e, true))) {
        shape.leaves.push((v, Some(edges)));
        return Ok(());
    }
    for e in &edges {
        glasso_node(s, rec, cond, e.dst, level, shape)?;
    }
    Ok(())
}

fn glasso_parts(s: &TransitionSystem, leaf: usize, split: &Option<Vec<Edge>>) -> Vec<TransitionSystem> {
    match split {
        None => vec![s.rooted_at(leaf)],
        Some(edges) => edges.iter().map(|e| piece(s, leaf, e, true)).collect(),
    }
}

struct TypedParts {
    s: TransitionSystem,
    skeleton: TransitionSystem,
    /// Leaf (in `s`), split, part index, part, key.
    parts: Vec<(usize, Option<Vec<Edge>>, usize, TransitionSystem, LabelKey)>,
}

fn typed_parts(s: &TransitionSystem, m: usize, level: usize, guards: &Guards) -> Result<TypedParts> {
    let s = s.restrict_reachable();
    let cond = Condensation::of(&s);
    let mut rec = Recognizer::new(&s);
    let mut shape = GlassoShape { tree: vec![false; s.num_states()], leaves: Vec::new() };
    glasso_node(&s, &mut rec, &cond, s.initial(), level, &mut shape)?;
    let skeleton = s.induced(&shape.tree, s.initial());
    let mut session = TypeSession::new(m, guards);
    let mut raw = Vec::new();
    for (leaf, split) in &shape.leaves {
        for (i, p) in glasso_parts(&s, *leaf, split).into_iter().enumerate() {
            let id = session.add(&p);
            raw.push((*leaf, split.clone(), i, p, id));
        }
    }
    let mut parts = Vec::with_capacity(raw.len());
    for (leaf, split, i, p, id) in raw {
        let key = LabelKey::Nested(session.tp(id, level)?);
        parts.push((leaf, split, i, p, key));
    }
    Ok(TypedParts { s, skeleton, parts })
}

fn glasso_encoding(t: &TypedParts, m: usize) -> EncodedSystem {
    let mut labels = vec![BTreeSet::new(); t.skeleton.num_states()];
    let mut dictionary = BTreeMap::new();
    for (leaf, _, _, p, key) in &t.parts {
        let v = t.skeleton.state_index(t.s.state_name(*leaf)).expect("leaf");
        labels[v].insert(key.clone());
        dictionary.entry(key.clone()).or_insert_with(|| p.clone());
    }
    EncodedSystem { rank: m, skeleton: t.skeleton.clone(), labels, dictionary }
}

/// Reads `s` as a finite tree whose leaves carry hierarchical lassos of
/// level at most `level`; each leaf is split into one lasso per outgoing
/// edge. Leaves come as early as possible. Nested types in the labels are
/// numbered per encoding.
pub fn encode_glasso(s: &TransitionSystem, m: usize, level: usize, guards: &Guards) -> Result<EncodedSystem> {
    Ok(glasso_encoding(&typed_parts(s, m, level, guards)?, m))
}

/// Encodes `s` as in [`encode_glasso`] and connects it to the decoding:
/// every part is turned into its representative by a lifted nested-type
/// chain, then duplicates are merged by one bisimulation.
pub fn glasso_chain(
    s: &TransitionSystem,
    m: usize,
    level: usize,
    guards: &Guards,
) -> Result<(EncodedSystem, WitnessChain)> {
    let t = typed_parts(s, m, level, guards)?;
    let enc = glasso_encoding(&t, m);
    let s = &t.s;
    let mut cur = s.clone();
    let mut chain = WitnessChain::new(m, s.clone());
    for (leaf, split, i, p, key) in &t.parts {
        let rep = &enc.dictionary[key];
        if rep == p {
            continue;
        }
        let sub = tp_equiv_chain(&klasso_recognize(p)?, &klasso_recognize(rep)?, m, guards)?;
        let host_name = s.state_name(*leaf);
        let host = cur.state_index(host_name).expect("leaf");
        let edge = split.as_ref().map(|edges| {
            let e = &edges[*i];
            Edge { src: host, label: e.label.clone(), dst: cur.state_index(s.state_name(e.dst)).expect("part root") }
        });
        let base = cut_part(&cur, host, edge.as_ref());
        let host = base.state_index(host_name).expect("leaf");
        for (j, z) in sub.systems.iter().enumerate().skip(1) {
            let mut b = SystemBuilder::new();
            base.copy_into(&mut b, "");
            glue(&mut b, host, z, &format!("{host_name}+p{i}.{j}/"));
            cur = b.build(base.initial());
            chain.push(sub.links[j - 1], cur.clone());
        }
    }
    chain.push(Link::Bisim, decode(&enc)?);
    chain.check(guards).map_err(|e| Error::VerifyFailed(e.to_string()))?;
    Ok((enc, chain))
}

/// Unfolds every acyclic stretch into a tree and copies each strongly
/// connected part once per entry, so that every cyclic part is entered by
/// a single edge. Fails once more than `max_states` states are produced.
pub fn partial_unravel(s: &TransitionSystem, max_states: usize) -> Result<TransitionSystem> {
    struct Ctx<'a> {
        s: &'a TransitionSystem,
        cond: Condensation,
        b: SystemBuilder,
        used: HashMap<usize, usize>,
        max: usize,
    }
    impl Ctx<'_> {
        fn fresh(&mut self, v: usize) -> Result<usize> {
            if self.b.len() >= self.max {
                return Err(Error::GuardExceeded(format!("partial unravelling exceeds {} states", self.max)));
            }
            let k = self.used.entry(v).or_insert(0);
            let name = if *k == 0 { self.s.state_name(v).to_owned() } else { format!("{}'{k}", self.s.state_name(v)) };
            *k += 1;
            Ok(self.b.colored_state(name, self.s.color(v)))
        }

        fn go(&mut self, v: usize) -> Result<usize> {
            let s = self.s;
            if !self.cond.on_cycle(v) {
                let id = self.fresh(v)?;
                for e in s.out_edges(v) {
                    let c = self.go(e.dst)?;
                    self.b.edge(id, e.label.clone(), c);
                }
                return Ok(id);
            }
            let c = self.cond.comp[v];
            let members = self.cond.members[c].clone();
            let mut map = HashMap::new();
            for &x in &members {
                map.insert(x, self.fresh(x)?);
            }
            for &x in &members {
                for e in s.out_edges(x) {
                    let target = match map.get(&e.dst) {
                        Some(&t) => t,
                        None => self.go(e.dst)?,
                    };
                    self.b.edge(map[&x], e.label.clone(), target);
                }
            }
            Ok(map[&v])
        }
    }
    let mut ctx = Ctx { s, cond: Condensation::of(s), b: SystemBuilder::new(), used: HashMap::new(), max: max_states };
    let root = ctx.go(s.initial())?;
    Ok(ctx.b.build(root))
}
