//! Seeded random instances: systems, paths, lassos, hierarchical lassos,
//! partners of equal type and tree extensions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hierarchy::chains::redecompose;
use crate::lasso::{Attachment, KLasso, Lasso};
use crate::path::PointedPath;
use crate::semigroup::PathAlgebra;
use crate::system::{SystemBuilder, TransitionSystem};
use crate::{Color, Label};

pub type GenRng = ChaCha8Rng;

pub fn rng(seed: u64) -> GenRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Actions and colors to draw from; a state is uncolored with the same
/// odds as each color.
#[derive(Clone, Debug)]
pub struct Alphabet {
    pub actions: Vec<Label>,
    pub colors: Vec<Color>,
}

impl Alphabet {
    pub fn new<A: AsRef<str>, C: AsRef<str>>(actions: &[A], colors: &[C]) -> Self {
        Alphabet {
            actions: actions.iter().map(|a| a.as_ref().to_owned()).collect(),
            colors: colors.iter().map(|c| c.as_ref().to_owned()).collect(),
        }
    }

    pub fn action(&self, rng: &mut GenRng) -> Label {
        self.actions.choose(rng).expect("at least one action").clone()
    }

    pub fn color(&self, rng: &mut GenRng) -> Option<Color> {
        let k = rng.gen_range(0..=self.colors.len());
        self.colors.get(k).cloned()
    }
}

/// `1..=max_states` states `s0, s1, ...` (initial `s0`); every possible
/// edge is present with probability `edge_prob`.
pub fn system(rng: &mut GenRng, alpha: &Alphabet, max_states: usize, edge_prob: f64) -> TransitionSystem {
    let n = rng.gen_range(1..=max_states);
    let mut b = SystemBuilder::new();
    for i in 0..n {
        let c = alpha.color(rng);
        b.colored_state(format!("s{i}"), c.as_deref());
    }
    for v in 0..n {
        for a in &alpha.actions {
            for w in 0..n {
                if rng.gen_bool(edge_prob) {
                    b.edge(v, a.clone(), w);
                }
            }
        }
    }
    b.build(0)
}

/// A system bisimilar to `s`: one state is split into two copies sharing
/// its successors, with incoming edges spread over both.
pub fn bisimilar_variant(rng: &mut GenRng, s: &TransitionSystem) -> TransitionSystem {
    let n = s.num_states();
    let v = rng.gen_range(0..n);
    let mut b = SystemBuilder::new();
    s.copy_into(&mut b, "");
    let copy = b.colored_state(format!("{}'", s.state_name(v)), s.color(v));
    for e in s.edges() {
        if e.src == v {
            b.edge(copy, e.label.clone(), e.dst);
        }
        if e.dst == v && rng.gen_bool(0.5) {
            b.edge(e.src, e.label.clone(), copy);
        }
    }
    b.build(s.initial())
}

/// A copy of `s` with one random edge added or removed.
pub fn mutate(rng: &mut GenRng, s: &TransitionSystem, alpha: &Alphabet) -> TransitionSystem {
    let drop = if s.num_edges() > 0 && rng.gen_bool(0.5) { Some(rng.gen_range(0..s.num_edges())) } else { None };
    let mut out = SystemBuilder::new();
    for v in 0..s.num_states() {
        out.colored_state(s.state_name(v), s.color(v));
    }
    for (i, e) in s.edges().iter().enumerate() {
        if Some(i) != drop {
            out.edge(e.src, e.label.clone(), e.dst);
        }
    }
    if drop.is_none() {
        let n = s.num_states();
        out.edge(rng.gen_range(0..n), alpha.action(rng), rng.gen_range(0..n));
    }
    out.build(s.initial())
}

pub fn path(rng: &mut GenRng, alpha: &Alphabet, len: usize) -> PointedPath {
    let colors = (0..=len).map(|_| alpha.color(rng)).collect();
    let labels = (0..len).map(|_| alpha.action(rng)).collect();
    PointedPath::new(colors, labels).expect("lengths match")
}

/// Tail length `0..=max_tail`, loop length `1..=max_loop`.
pub fn lasso(rng: &mut GenRng, alpha: &Alphabet, max_tail: usize, max_loop: usize) -> Lasso {
    let t = rng.gen_range(0..=max_tail);
    let l = rng.gen_range(1..=max_loop);
    let tail = path(rng, alpha, t);
    let mut lp = path(rng, alpha, l);
    let glue = tail.last_color().map(str::to_owned);
    lp = lp.map_colors(|i, c| if i == 0 || i == l { glue.clone() } else { c.map(str::to_owned) });
    Lasso::new(tail, lp).expect("glue colors agree")
}

/// A hierarchical lasso of level exactly `level` with at most `max_atts`
/// attachments per level.
pub fn klasso(rng: &mut GenRng, alpha: &Alphabet, level: usize, max_tail: usize, max_loop: usize, max_atts: usize) -> KLasso {
    let mut k = KLasso::from(lasso(rng, alpha, max_tail, max_loop));
    if level <= 1 {
        return k;
    }
    let count = rng.gen_range(1..=max_atts.max(1));
    for i in 0..count {
        let sub_level = if i == 0 { level - 1 } else { rng.gen_range(1..level) };
        let sub = klasso(rng, alpha, sub_level, max_tail, max_loop, max_atts);
        let v = rng.gen_range(0..k.main.num_vertices());
        let a = alpha.action(rng);
        k.attach_with(v, &a, sub);
    }
    k
}

/// Paths with the same element as `p`: the representative, `p` itself and
/// whatever a random search over short paths finds.
fn same_element_paths(rng: &mut GenRng, alg: &PathAlgebra, alpha: &Alphabet, p: &PointedPath) -> Result<Vec<PointedPath>> {
    let e = alg.element_of_path(p)?;
    let mut out = vec![p.clone(), alg.representative(e).clone()];
    for _ in 0..60 {
        let len = rng.gen_range(0..=p.len() + 3);
        let mut q = path(rng, alpha, len);
        let (first, last) = (p.first_color().map(str::to_owned), p.last_color().map(str::to_owned));
        q = q.map_colors(|i, c| {
            if i == 0 {
                first.clone()
            } else if i == len {
                last.clone()
            } else {
                c.map(str::to_owned)
            }
        });
        if len == 0 && first != last {
            continue;
        }
        if alg.element_of_path(&q)? == e {
            out.push(q);
        }
    }
    Ok(out)
}

fn prefer_other(rng: &mut GenRng, candidates: &[PointedPath], p: &PointedPath) -> PointedPath {
    let others: Vec<&PointedPath> = candidates.iter().filter(|q| *q != p).collect();
    match others.choose(rng) {
        Some(q) => (*q).clone(),
        None => p.clone(),
    }
}

/// A lasso with the same strong type as `l` in `alg`.
pub fn strong_partner(rng: &mut GenRng, alg: &PathAlgebra, alpha: &Alphabet, l: &Lasso) -> Result<Lasso> {
    let tails = same_element_paths(rng, alg, alpha, l.tail())?;
    let loops: Vec<PointedPath> =
        same_element_paths(rng, alg, alpha, l.loop_path())?.into_iter().filter(|p| !p.is_empty()).collect();
    let tail = prefer_other(rng, &tails, l.tail());
    let lp = prefer_other(rng, &loops, l.loop_path());
    Lasso::new(tail, lp)
}

/// A lasso with the same weak type as `l` in `alg`: a rotation or
/// unrolling, a strong partner of one, or a random lasso found by search.
pub fn weak_partner(rng: &mut GenRng, alg: &PathAlgebra, alpha: &Alphabet, l: &Lasso) -> Result<Lasso> {
    let w = alg.weak_type(l)?;
    let mut cands = vec![l.unroll(rng.gen_range(1..=3)).shift(rng.gen_range(0..=3))];
    cands.push(strong_partner(rng, alg, alpha, &cands[0])?);
    for _ in 0..80 {
        let c = lasso(rng, alpha, l.tail().len() + 2, l.loop_path().len() + 2);
        if alg.weak_type(&c)? == w {
            cands.push(c);
            break;
        }
    }
    Ok(cands.choose(rng).expect("nonempty").clone())
}

/// Same unravelling with the main lasso replaced by `main`, whose vertex
/// `i` stands for vertex `old(i)` of `k`.
fn remap(k: &KLasso, main: Lasso) -> KLasso {
    let t = k.main.tail().len();
    let n = k.main.loop_path().len();
    let mut out = KLasso::from(main);
    for i in 0..out.main.num_vertices() {
        let old = if i < t { i } else { t + (i - t) % n };
        if let Some(atts) = k.attachments.get(&old) {
            out.attachments.insert(i, atts.clone());
        }
    }
    out
}

/// A hierarchical lasso with the same nested type as `k`, built from
/// moves that keep the unravelling up to bisimulation (unrolling,
/// shifting, duplicating an attachment, switching the main branch) and
/// from replacing plain attachments by weak partners.
pub fn nested_partner(rng: &mut GenRng, alg: &PathAlgebra, alpha: &Alphabet, k: &KLasso) -> Result<KLasso> {
    let mut cur = k.clone();
    for _ in 0..rng.gen_range(1..=3) {
        let positions: Vec<(usize, usize)> =
            cur.attachments.iter().flat_map(|(&v, a)| (0..a.len()).map(move |i| (v, i))).collect();
        match rng.gen_range(0..5) {
            0 => {
                let main = cur.main.unroll(rng.gen_range(1..=2)).shift(rng.gen_range(0..=2));
                cur = remap(&cur, main);
            }
            1 if !positions.is_empty() => {
                let &(v, i) = positions.choose(rng).expect("nonempty");
                let a = cur.attachments[&v][i].clone();
                cur.attachments.get_mut(&v).expect("vertex").push(a);
            }
            2 if !positions.is_empty() => {
                let &(v, i) = positions.choose(rng).expect("nonempty");
                if cur.attachments[&v][i].sub.level() == 1 {
                    cur = redecompose(&cur, v, i)?;
                }
            }
            _ if !positions.is_empty() => {
                let &(v, i) = positions.choose(rng).expect("nonempty");
                let Attachment { label, sub } = cur.attachments[&v][i].clone();
                if sub.level() == 1 {
                    let p = weak_partner(rng, alg, alpha, &sub.main)?;
                    cur.attachments.get_mut(&v).expect("vertex")[i] = Attachment { label, sub: KLasso::from(p) };
                }
            }
            _ => {}
        }
    }
    Ok(cur)
}

/// A finite tree of depth `0..=max_depth` whose leaves carry one or two
/// hierarchical lassos of level at most `level`, glued at their first
/// vertex. Lassos sharing a leaf have a nonempty tail.
pub fn glasso(rng: &mut GenRng, alpha: &Alphabet, level: usize, max_depth: usize) -> TransitionSystem {
    let mut b = SystemBuilder::new();
    let color = alpha.color(rng);
    let root = b.colored_state("r", color.as_deref());
    grow(rng, alpha, &mut b, (root, color), "r", level, max_depth);
    b.build(root)
}

fn grow(
    rng: &mut GenRng,
    alpha: &Alphabet,
    b: &mut SystemBuilder,
    (v, color): (usize, Option<Color>),
    name: &str,
    level: usize,
    depth: usize,
) {
    if depth > 0 && rng.gen_bool(0.5) {
        for j in 0..rng.gen_range(1..=2) {
            let child = format!("{name}.{j}");
            let cc = alpha.color(rng);
            let c = b.colored_state(child.clone(), cc.as_deref());
            b.edge(v, alpha.action(rng), c);
            grow(rng, alpha, b, (c, cc), &child, level, depth - 1);
        }
        return;
    }
    let count = rng.gen_range(1..=2);
    for j in 0..count {
        let lvl = rng.gen_range(1..=level.max(1));
        let mut k = klasso(rng, alpha, lvl, 2, 2, 1);
        if count > 1 && k.main.tail().is_empty() {
            let edge = PointedPath::edge(None, &alpha.action(rng), k.main.vertex_color(0));
            k = remap_prefixed(&k, edge);
        }
        // glue vertex 0 onto `v`
        let s = k.to_system();
        let rep = recolor_root(&s, color.as_deref());
        let prefix = format!("{name}/{j}:");
        let map: Vec<usize> = (0..rep.num_states())
            .map(|x| if x == rep.initial() { v } else { b.colored_state(format!("{prefix}{}", rep.state_name(x)), rep.color(x)) })
            .collect();
        for e in rep.edges() {
            b.edge(map[e.src], e.label.clone(), map[e.dst]);
        }
    }
}

/// `k` with one edge prepended to its main lasso.
fn remap_prefixed(k: &KLasso, edge: PointedPath) -> KLasso {
    let tail = edge.concat(k.main.tail()).expect("edge ends at the first vertex");
    let main = Lasso::new(tail, k.main.loop_path().clone()).expect("glue unchanged");
    KLasso { main, attachments: k.attachments.iter().map(|(&v, a)| (v + 1, a.clone())).collect() }
}

fn recolor_root(s: &TransitionSystem, color: Option<&str>) -> TransitionSystem {
    let mut b = SystemBuilder::new();
    for v in 0..s.num_states() {
        let c = if v == s.initial() { color } else { s.color(v) };
        b.colored_state(s.state_name(v), c);
    }
    for e in s.edges() {
        b.edge(e.src, e.label.clone(), e.dst);
    }
    b.build(s.initial())
}

/// `base` with `1..=max_trees` finite trees of `1..=3` states hung off
/// random states.
pub fn with_trees(rng: &mut GenRng, alpha: &Alphabet, base: &TransitionSystem, max_trees: usize) -> TransitionSystem {
    let mut b = SystemBuilder::new();
    base.copy_into(&mut b, "");
    for t in 0..rng.gen_range(1..=max_trees.max(1)) {
        let host = rng.gen_range(0..base.num_states());
        let mut nodes = vec![host];
        for j in 0..rng.gen_range(1..=3) {
            let parent = *nodes.choose(rng).expect("nonempty");
            let c = b.colored_state(format!("t{t}.{j}"), alpha.color(rng).as_deref());
            b.edge(parent, alpha.action(rng), c);
            nodes.push(c);
        }
    }
    b.build(base.initial())
}

/// Some lasso with a weak type different from `l`'s, if a short search
/// finds one.
pub fn weak_stranger(rng: &mut GenRng, alg: &PathAlgebra, alpha: &Alphabet, l: &Lasso) -> Result<Lasso> {
    let w = alg.weak_type(l)?;
    for _ in 0..200 {
        let c = lasso(rng, alpha, 3, 3);
        if alg.weak_type(&c)? != w {
            return Ok(c);
        }
    }
    Err(Error::Precondition("every sampled lasso has the same weak type".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisim::bisimilar;
    use crate::hierarchy::{encode_glasso, encode_tree_extension};
    use crate::lasso::klasso_recognize;
    use crate::mso::Guards;
    use crate::semigroup::Signature;

    fn alpha() -> Alphabet {
        Alphabet::new(&["a", "b"], &["p"])
    }

    #[test]
    fn same_seed_same_output() {
        let a = system(&mut rng(5), &alpha(), 8, 0.3);
        let b = system(&mut rng(5), &alpha(), 8, 0.3);
        assert_eq!(a, b);
    }

    #[test]
    fn variants_are_bisimilar() {
        let mut r = rng(11);
        for _ in 0..200 {
            let s = system(&mut r, &alpha(), 6, 0.3);
            let t = bisimilar_variant(&mut r, &s);
            assert!(t.num_states() <= s.num_states() + 1);
            assert!(bisimilar(&s, &t).is_bisimilar(), "{s}\n{t}");
        }
    }

    #[test]
    fn partners_keep_their_types() {
        let alg = PathAlgebra::build(&Signature::new(&["a", "b"], &["p"]), 1).unwrap();
        let mut r = rng(2);
        for _ in 0..100 {
            let l = lasso(&mut r, &alpha(), 3, 3);
            let s = strong_partner(&mut r, &alg, &alpha(), &l).unwrap();
            assert_eq!(alg.strong_pair(&l).unwrap(), alg.strong_pair(&s).unwrap());
            let w = weak_partner(&mut r, &alg, &alpha(), &l).unwrap();
            assert_eq!(alg.weak_type(&l).unwrap(), alg.weak_type(&w).unwrap());
        }
    }

    #[test]
    fn klassos_have_bounded_level() {
        let mut r = rng(4);
        for level in 1..=3 {
            for _ in 0..50 {
                let k = klasso(&mut r, &alpha(), level, 2, 2, 2);
                let rec = klasso_recognize(&k.to_system()).unwrap();
                assert!(rec.level() <= level);
            }
        }
    }

    #[test]
    fn generalised_lassos_are_recognized() {
        let mut r = rng(9);
        let guards = Guards::default();
        for i in 0..60 {
            let level = 1 + i % 2;
            let g = glasso(&mut r, &alpha(), level, 1);
            encode_glasso(&g, 0, level, &guards).unwrap();
            let t = with_trees(&mut r, &alpha(), &g, 2);
            let e = encode_tree_extension(&t, 0, &guards).unwrap();
            assert_eq!(e.skeleton.num_states(), g.num_states());
        }
    }
}
