//! Property drivers with brute-force oracles. The acceptance tests run them
//! at full sample counts; `bisimso selftest` runs them scaled down.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bisim::{bisimilar, is_bisimulation, naive_bisim, quotient};
use crate::error::{Error, Result};
use crate::gen::{self, Alphabet, GenRng};
use crate::hierarchy::{
    cb_rank, decode, encode_glasso, encode_tree_extension, partial_unravel, tp_equiv_chain, tree_extension_chain, tree_pieces, CBValue,
    EncodedSystem, LabelColors, LabelKey, TypeSession,
};
use crate::lasso::lasso_decompose;
use crate::mso::{evaluate, path_theory, system_type, Assignment, Formula, Guards, Structure, TypeId, Value};
use crate::path::PointedPath;
use crate::scc::{Condensation, SccKind};
use crate::semigroup::{verify_chain, PathAlgebra, Signature, WitnessChain};
use crate::system::{disjoint_union, SystemBuilder, TransitionSystem};

/// Outcome of one property run.
#[derive(Clone, Debug)]
pub struct Report {
    pub name: String,
    pub samples: usize,
    pub failures: usize,
    /// Generated instances that did not meet the property's hypothesis.
    pub skipped: usize,
    pub elapsed: Duration,
    pub limit: Option<Duration>,
    /// Counters worth printing (e.g. how many pairs were non-trivial).
    pub notes: Vec<String>,
    /// The first few failures.
    pub examples: Vec<String>,
}

impl Report {
    fn new(name: &str, limit: Option<Duration>) -> Self {
        Report {
            name: name.to_owned(),
            samples: 0,
            failures: 0,
            skipped: 0,
            elapsed: Duration::ZERO,
            limit,
            notes: Vec::new(),
            examples: Vec::new(),
        }
    }

    fn fail(&mut self, what: impl Into<String>) {
        self.failures += 1;
        if self.examples.len() < 5 {
            self.examples.push(what.into());
        }
    }

    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.samples += 1;
        if !ok {
            self.fail(what());
        }
    }

    fn finish(mut self, start: Instant) -> Self {
        self.elapsed = start.elapsed();
        self
    }

    pub fn within_limit(&self) -> bool {
        self.limit.is_none_or(|l| self.elapsed <= l)
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.samples > 0 && self.within_limit()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {} samples, {} failures, {} skipped, {:.2}s",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.samples,
            self.failures,
            self.skipped,
            self.elapsed.as_secs_f64()
        )?;
        if let Some(l) = self.limit {
            write!(f, " (limit {}s)", l.as_secs())?;
        }
        for n in &self.notes {
            write!(f, "; {n}")?;
        }
        for e in &self.examples {
            write!(f, "\n    {e}")?;
        }
        Ok(())
    }
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

/// Partition refinement against the naive greatest fixpoint.
pub fn bisim_oracle(seed: u64, pairs: usize) -> Report {
    let start = Instant::now();
    let mut r = Report::new("bisimulation oracle", secs(10));
    let mut rng = gen::rng(seed);
    let mut related = 0;
    for i in 0..pairs {
        let actions = &["a", "b"][..rng.gen_range(1..=2)];
        let colors = &["p", "q"][..rng.gen_range(0..=2)];
        let alpha = Alphabet::new(actions, colors);
        let (a, b) = match i % 3 {
            0 => (gen::system(&mut rng, &alpha, 8, 0.2), gen::system(&mut rng, &alpha, 8, 0.2)),
            1 => {
                let a = gen::system(&mut rng, &alpha, 7, 0.2);
                let b = gen::bisimilar_variant(&mut rng, &a);
                (a, b)
            }
            _ => {
                let a = gen::system(&mut rng, &alpha, 7, 0.2);
                let b = gen::bisimilar_variant(&mut rng, &a);
                let b = gen::mutate(&mut rng, &b, &alpha);
                (a, b)
            }
        };
        let fast = bisimilar(&a, &b);
        let slow = match naive_bisim(&a, &b) {
            Ok(w) => w,
            Err(e) => {
                r.fail(format!("pair {i}: oracle error {e}"));
                continue;
            }
        };
        related += usize::from(slow.is_bisimilar());
        let relation_ok = fast.relation().is_none_or(|rel| is_bisimulation(&a, &b, rel));
        r.expect(fast.is_bisimilar() == slow.is_bisimilar() && relation_ok, || {
            format!("pair {i}: refinement says {}, oracle says {}", fast.is_bisimilar(), slow.is_bisimilar())
        });
    }
    r.notes.push(format!("{related} bisimilar pairs"));
    r.finish(start)
}

/// Rank-1 sentences whose Boolean combinations cover every rank-1 sentence
/// with the constant `c` (the initial state), for one action `a` and one
/// color `p`: complete descriptions of `c`, of `c` with one element and of
/// `c` with one set.
pub fn rank1_sentences() -> Vec<Formula> {
    fn complete(atoms: &[Formula], mask: usize) -> Formula {
        Formula::And(
            atoms
                .iter()
                .enumerate()
                .map(|(i, a)| if mask >> i & 1 == 1 { a.clone() } else { Formula::Not(Box::new(a.clone())) })
                .collect(),
        )
    }
    let var = |s: &str| s.to_owned();
    let edge = |x: &str, y: &str| Formula::Edge(var("a"), var(x), var(y));
    let at_c = [edge("c", "c"), Formula::Color(var("p"), var("c"))];
    let with_x = [
        edge("c", "x"),
        edge("x", "c"),
        edge("x", "x"),
        Formula::Color(var("p"), var("x")),
        Formula::Eq(var("x"), var("c")),
        Formula::Init(var("x")),
    ];
    let with_set = [Formula::In(var("c"), var("X"))];
    let mut out = Vec::new();
    for m in 0..1 << at_c.len() {
        out.push(complete(&at_c, m));
    }
    for m in 0..1 << with_x.len() {
        out.push(Formula::Exists(var("x"), Box::new(complete(&with_x, m))));
    }
    for m in 0..1 << with_set.len() {
        out.push(Formula::ExistsSet(var("X"), Box::new(complete(&with_set, m))));
    }
    out
}

/// Every system with `1..=max_states` states over one action and one color,
/// initial state first.
pub fn all_small_systems(max_states: usize) -> Vec<TransitionSystem> {
    let mut out = Vec::new();
    for n in 1..=max_states {
        for edges in 0u32..1 << (n * n) {
            for colors in 0u32..1 << n {
                let mut b = SystemBuilder::new();
                for v in 0..n {
                    b.colored_state(format!("s{v}"), (colors >> v & 1 == 1).then_some("p"));
                }
                for k in 0..n * n {
                    if edges >> k & 1 == 1 {
                        b.edge(k / n, "a", k % n);
                    }
                }
                out.push(b.build(0));
            }
        }
    }
    out
}

/// Induced `≡_1` against the truth values of [`rank1_sentences`].
pub fn rank1_enumeration(max_states: usize) -> Report {
    let start = Instant::now();
    let mut r = Report::new("rank-1 types vs sentence enumeration", secs(60));
    let sentences = rank1_sentences();
    let mut by_type: HashMap<TypeId, (Vec<bool>, usize)> = HashMap::new();
    let mut by_truth: HashMap<Vec<bool>, (TypeId, usize)> = HashMap::new();
    for (i, s) in all_small_systems(max_states).iter().enumerate() {
        let t = match system_type(s, 1) {
            Ok(t) => t,
            Err(e) => {
                r.samples += 1;
                r.fail(format!("system {i}: {e}"));
                continue;
            }
        };
        let mut env = Assignment::new();
        env.insert("c".into(), Value::Element(s.initial()));
        let truth: Result<Vec<bool>> = sentences.iter().map(|f| evaluate(f, s, &env)).collect();
        let truth = match truth {
            Ok(t) => t,
            Err(e) => {
                r.samples += 1;
                r.fail(format!("system {i}: {e}"));
                continue;
            }
        };
        let (t_truth, j) = by_type.entry(t.clone()).or_insert((truth.clone(), i)).clone();
        let (truth_t, k) = by_truth.entry(truth.clone()).or_insert((t.clone(), i)).clone();
        r.expect(t_truth == truth && truth_t == t, || {
            if t_truth != truth {
                format!("systems {j} and {i} have one type but differ on a sentence")
            } else {
                format!("systems {k} and {i} agree on all sentences but have different types")
            }
        });
    }
    r.notes.push(format!("{} sentences, {} types", sentences.len(), by_type.len()));
    r.finish(start)
}

fn type_buckets<T: Clone>(items: &[T], key: impl Fn(&T) -> Result<TypeId>) -> Result<Vec<Vec<T>>> {
    let mut map: BTreeMap<TypeId, Vec<T>> = BTreeMap::new();
    for it in items {
        map.entry(key(it)?).or_default().push(it.clone());
    }
    Ok(map.into_values().collect())
}

/// Two members of one random bucket (possibly the same one).
fn pick_pair<T: Clone>(rng: &mut GenRng, buckets: &[Vec<T>]) -> (T, T, bool) {
    let b = buckets.choose(rng).expect("nonempty");
    let i = rng.gen_range(0..b.len());
    let j = rng.gen_range(0..b.len());
    (b[i].clone(), b[j].clone(), i != j)
}

fn path_pool(rng: &mut GenRng, max_len: usize, count: usize) -> Vec<PointedPath> {
    let alpha = Alphabet::new(&["a", "b"], &["p"]);
    (0..count).map(|_| {
        let len = rng.gen_range(0..=max_len);
        gen::path(rng, &alpha, len)
    }).collect()
}

/// Composition for disjoint union, for fusion of the glue points of two
/// pointed paths, and for concatenation; ranks cycle through 0, 1, 2.
pub fn composition(seed: u64, samples: usize) -> Vec<Report> {
    let mut rng = gen::rng(seed);
    let mut out = Vec::new();

    let start = Instant::now();
    let mut r = Report::new("composition: disjoint union", None);
    let alpha = Alphabet::new(&["a"], &["p"]);
    let pool: Vec<TransitionSystem> = (0..400).map(|_| gen::system(&mut rng, &alpha, 4, 0.3)).collect();
    let mut buckets = Vec::new();
    for m in 0..=2 {
        buckets.push(type_buckets(&pool, |s| system_type(s, m)).expect("pool within guards"));
    }
    let mut distinct = 0;
    for i in 0..samples {
        let m = i % 3;
        let (a, a2, d1) = pick_pair(&mut rng, &buckets[m]);
        let (b, b2, d2) = pick_pair(&mut rng, &buckets[m]);
        distinct += usize::from(d1 || d2);
        let lhs = system_type(&disjoint_union(&a, &b), m);
        let rhs = system_type(&disjoint_union(&a2, &b2), m);
        match (lhs, rhs) {
            (Ok(x), Ok(y)) => r.expect(x == y, || format!("m={m}: {a} + {b} vs {a2} + {b2}")),
            (Err(e), _) | (_, Err(e)) => r.fail(format!("m={m}: {e}")),
        }
    }
    r.notes.push(format!("{distinct} instances with a non-identical replacement"));
    out.push(r.finish(start));

    let paths = path_pool(&mut rng, 5, 300);
    let mut pbuckets = Vec::new();
    for m in 0..=2 {
        pbuckets.push(type_buckets(&paths, |p| path_theory(p, m)).expect("paths within guards"));
    }

    let start = Instant::now();
    let mut r = Report::new("composition: fusion of glue points", None);
    let mut distinct = 0;
    for i in 0..samples {
        let m = i % 3;
        let (p, p2, d1) = pick_pair(&mut rng, &pbuckets[m]);
        let (q, q2, d2) = pick_pair(&mut rng, &pbuckets[m]);
        distinct += usize::from(d1 || d2);
        let glued = |x: &PointedPath, y: &PointedPath| -> Result<(TypeId, TypeId)> {
            let mut u = Structure::disjoint_union(&Structure::from_path(x)?, &Structure::from_path(y)?)?;
            u.add_unary("G", x.len());
            u.add_unary("G", x.len() + 1);
            Ok((crate::mso::hintikka(&u, m)?, crate::mso::hintikka(&u.fuse("G")?, m)?))
        };
        match (glued(&p, &q), glued(&p2, &q2)) {
            (Ok((u1, f1)), Ok((u2, f2))) => {
                r.expect(u1 == u2 && f1 == f2, || format!("m={m}: {p} | {q} vs {p2} | {q2}"));
            }
            (Err(e), _) | (_, Err(e)) => r.fail(format!("m={m}: {e}")),
        }
    }
    r.notes.push(format!("{distinct} instances with a non-identical replacement"));
    out.push(r.finish(start));

    let start = Instant::now();
    let mut r = Report::new("composition: concatenation", None);
    let mut distinct = 0;
    let mut attempts = 0;
    while r.samples + r.failures < samples && attempts < samples * 20 {
        attempts += 1;
        let m = attempts % 3;
        let (p, p2, d1) = pick_pair(&mut rng, &pbuckets[m]);
        let (q, q2, d2) = pick_pair(&mut rng, &pbuckets[m]);
        if p.last_color() != q.first_color() {
            continue;
        }
        distinct += usize::from(d1 || d2);
        let lhs = p.concat(&q).and_then(|x| path_theory(&x, m));
        let rhs = p2.concat(&q2).and_then(|x| path_theory(&x, m));
        match (lhs, rhs) {
            (Ok(x), Ok(y)) => r.expect(x == y, || format!("m={m}: {p} + {q} vs {p2} + {q2}")),
            (Err(e), _) | (_, Err(e)) => r.fail(format!("m={m}: {e}")),
        }
    }
    r.notes.push(format!("{distinct} instances with a non-identical replacement"));
    out.push(r.finish(start));
    out
}

/// Signatures checked for semigroup integrity: up to two actions and up to
/// two colors.
pub fn supported_signatures() -> Vec<Signature> {
    let mut out = Vec::new();
    for acts in [&["a"][..], &["a", "b"][..]] {
        for cols in [&[][..], &["p"][..], &["p", "q"][..]] {
            out.push(Signature::new(acts, cols));
        }
    }
    out
}

/// Conjugacy on linked pairs `(αβ^π, β^π)` as a bit matrix, computed from
/// all factorizations of idempotents.
fn conjugacy_matrix(alg: &PathAlgebra) -> Result<(Vec<(usize, usize)>, Vec<Vec<u64>>)> {
    let mut nodes: Vec<(usize, usize)> = Vec::new();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    for p in alg.composable_pairs() {
        let l = alg.linked(p)?;
        index.entry(l).or_insert_with(|| {
            nodes.push(l);
            nodes.len() - 1
        });
    }
    let k = nodes.len();
    let words = k.div_ceil(64);
    let mut by_idem: HashMap<usize, Vec<usize>> = HashMap::new();
    for (a, &(_, e)) in nodes.iter().enumerate() {
        by_idem.entry(e).or_default().push(a);
    }
    let mut rel = vec![vec![0u64; words]; k];
    let n = alg.len();
    for xi in 0..n {
        for eta in 0..n {
            let Some(e) = alg.mul(xi, eta) else { continue };
            let Some(sources) = by_idem.get(&e) else { continue };
            let Some(f) = alg.mul(eta, xi) else { continue };
            for &a in sources {
                let (s, _) = nodes[a];
                if let Some(t) = alg.mul(s, xi) {
                    if let Some(&b) = index.get(&(t, f)) {
                        rel[a][b / 64] |= 1 << (b % 64);
                    }
                }
            }
        }
    }
    Ok((nodes, rel))
}

fn bit(row: &[u64], b: usize) -> bool {
    row[b / 64] >> (b % 64) & 1 == 1
}

/// Checks one algebra; returns failure descriptions.
pub fn algebra_integrity(alg: &PathAlgebra, rng: &mut GenRng) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    let n = alg.len();
    if n <= 800 {
        if let Err(e) = alg.check_closure() {
            bad.push(format!("closure: {e}"));
        }
    } else {
        for _ in 0..20_000 {
            let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let (px, py) = (alg.representative(x), alg.representative(y));
            let ok = match (px.concat(py), alg.mul(x, y)) {
                (Ok(c), Some(z)) => path_theory(&c, alg.rank())? == *alg.type_of(z),
                (Err(_), None) => true,
                _ => false,
            };
            if !ok {
                bad.push(format!("closure: e{x}·e{y}"));
                break;
            }
        }
    }
    if let Some((x, y, z)) = alg.find_non_associative() {
        bad.push(format!("not associative at (e{x}, e{y}, e{z})"));
    }
    for e in 0..n {
        if !alg.is_self_composable(e) {
            continue;
        }
        let (p, pi) = alg.idempotent_power(e)?;
        let mut pow = e;
        let mut least = None;
        for k in 1..=n + 1 {
            if alg.mul(pow, pow) == Some(pow) {
                least = Some((pow, k));
                break;
            }
            pow = alg.mul(pow, e).expect("powers compose");
        }
        if least != Some((p, pi)) {
            bad.push(format!("idempotent power of e{e}: got (e{p}, {pi}), expected {least:?}"));
        }
    }
    let (nodes, rel) = conjugacy_matrix(alg)?;
    for a in 0..nodes.len() {
        if !bit(&rel[a], a) {
            bad.push(format!("conjugacy not reflexive at {:?}", nodes[a]));
        }
        for b in 0..nodes.len() {
            if !bit(&rel[a], b) {
                continue;
            }
            if !bit(&rel[b], a) {
                bad.push(format!("conjugacy not symmetric: {:?} {:?}", nodes[a], nodes[b]));
            }
            if rel[b].iter().zip(&rel[a]).any(|(rb, ra)| rb & !ra != 0) {
                bad.push(format!("conjugacy not transitive through {:?} {:?}", nodes[a], nodes[b]));
            }
        }
        if bad.len() > 5 {
            return Ok(bad);
        }
    }
    // the algebra's classes are exactly the relation's classes
    let index: HashMap<(usize, usize), usize> = nodes.iter().enumerate().map(|(a, &l)| (l, a)).collect();
    let mut class_node: HashMap<usize, usize> = HashMap::new();
    for p in alg.composable_pairs() {
        let a = index[&alg.linked(p)?];
        let c = alg.class_of(p)?;
        let b = *class_node.entry(c).or_insert(a);
        if !bit(&rel[a], b) {
            bad.push(format!("class {c} mixes unrelated pairs ⟨e{},e{}⟩", p.alpha, p.beta));
            break;
        }
    }
    if class_node.len() != alg.classes().len() {
        bad.push("a class has no member".into());
    }
    let mut seen: HashMap<usize, usize> = HashMap::new();
    for (&c, &a) in &class_node {
        for (&c2, &a2) in &class_node {
            if c < c2 && bit(&rel[a], a2) {
                bad.push(format!("classes {c} and {c2} are conjugate"));
            }
        }
        seen.insert(c, a);
    }
    Ok(bad)
}

/// Closure, associativity, idempotent powers and conjugacy for every
/// supported signature at ranks `0..=max_rank`.
pub fn semigroup_integrity(max_rank: usize, seed: u64) -> Report {
    let start = Instant::now();
    let mut r = Report::new("semigroup integrity", secs(120));
    let mut rng = gen::rng(seed);
    for m in 0..=max_rank {
        for sig in supported_signatures() {
            let name = format!("m={m} {sig}");
            match PathAlgebra::build(&sig, m).and_then(|alg| Ok((algebra_integrity(&alg, &mut rng)?, alg.len()))) {
                Ok((bad, n)) => {
                    r.notes.push(format!("{name}: {n} elements"));
                    r.expect(bad.is_empty(), || format!("{name}: {}", bad.join("; ")));
                }
                Err(e) => {
                    r.samples += 1;
                    r.fail(format!("{name}: {e}"));
                }
            }
        }
    }
    r.finish(start)
}

fn lasso_algebra() -> PathAlgebra {
    PathAlgebra::build(&Signature::new(&["a", "b"], &["p"]), 1).expect("small algebra")
}

fn lasso_alphabet() -> Alphabet {
    Alphabet::new(&["a", "b"], &["p"])
}

/// Lassos of equal strong type are `≡_1`.
pub fn strong_type_lemma(seed: u64, samples: usize) -> Report {
    let start = Instant::now();
    let mut r = Report::new("equal strong types are equivalent", None);
    let mut rng = gen::rng(seed);
    let (alg, alpha) = (lasso_algebra(), lasso_alphabet());
    let mut distinct = 0;
    for i in 0..samples {
        let l = gen::lasso(&mut rng, &alpha, 3, 3);
        let res = gen::strong_partner(&mut rng, &alg, &alpha, &l).and_then(|l2| {
            if alg.strong_pair(&l)? != alg.strong_pair(&l2)? {
                return Err(Error::Precondition("partner has another strong type".into()));
            }
            Ok((crate::mso::equiv_m(&l.to_system(), &l2.to_system(), 1)?, l2))
        });
        match res {
            Ok((eq, l2)) => {
                distinct += usize::from(l2 != l);
                r.expect(eq, || format!("sample {i}: {l} vs {l2}"));
            }
            Err(e) => r.fail(format!("sample {i}: {e}")),
        }
    }
    r.notes.push(format!("{distinct} pairs of different lassos"));
    r.finish(start)
}

/// Lassos of equal weak type get witness chains whose links all hold.
pub fn weak_type_chains(seed: u64, samples: usize) -> Report {
    let start = Instant::now();
    let mut r = Report::new("witness chains for equal weak types", secs(300));
    let mut rng = gen::rng(seed);
    let (alg, alpha) = (lasso_algebra(), lasso_alphabet());
    let guards = Guards::default();
    let mut distinct = 0;
    for i in 0..samples {
        let l = gen::lasso(&mut rng, &alpha, 3, 3);
        let res = gen::weak_partner(&mut rng, &alg, &alpha, &l)
            .and_then(|l2| Ok((alg.witness_chain(&l, &l2, &guards)?, l2)));
        match res {
            Ok((chain, l2)) => {
                distinct += usize::from(alg.strong_pair(&l).ok() != alg.strong_pair(&l2).ok());
                let want = if l == l2 { 1 } else { 6 };
                r.expect(verify_chain(&chain) && chain.systems.len() == want, || format!("sample {i}: {l} vs {l2}"));
            }
            Err(e) => r.fail(format!("sample {i}: {e}")),
        }
    }
    r.notes.push(format!("{distinct} pairs with different strong types"));
    r.finish(start)
}

/// Pairs of 2-lassos of equal nested type get verified chains.
pub fn nested_type_chains(seed: u64, samples: usize) -> Report {
    let start = Instant::now();
    let mut r = Report::new("chains for equal nested types (level 2, rank 1)", None);
    let mut rng = gen::rng(seed);
    let (alg, alpha) = (lasso_algebra(), lasso_alphabet());
    // attachment letters make longer representatives than plain actions
    let guards = Guards { max_path_len: 64, max_size: 128, ..Guards::default() };
    let (mut attempts, mut distinct, mut deep, mut other_type) = (0, 0, 0, 0);
    while r.samples < samples && attempts < samples * 10 {
        attempts += 1;
        let k = gen::klasso(&mut rng, &alpha, 2, 2, 2, 2);
        let k2 = match gen::nested_partner(&mut rng, &alg, &alpha, &k) {
            Ok(k2) if k2.level() <= 2 => k2,
            _ => {
                r.skipped += 1;
                deep += 1;
                continue;
            }
        };
        let mut session = TypeSession::new(1, &guards);
        let a = session.add(&k.to_system());
        let b = session.add(&k2.to_system());
        match (session.tp(a, 2), session.tp(b, 2)) {
            (Ok(x), Ok(y)) if x == y => {}
            (Ok(_), Ok(_)) => {
                r.skipped += 1;
                other_type += 1;
                continue;
            }
            (Err(e), _) | (_, Err(e)) => {
                r.samples += 1;
                r.fail(format!("{e}"));
                continue;
            }
        }
        distinct += usize::from(k != k2);
        let n = r.samples;
        match tp_equiv_chain(&k, &k2, 1, &guards) {
            Ok(chain) => {
                let checked = chain.check(&guards);
                r.expect(checked.is_ok(), || format!("pair {n}: {}", checked.unwrap_err()))
            }
            Err(e) => {
                r.samples += 1;
                r.fail(format!("pair {n}: {e}\n      {:?}\n      {:?}", k, k2));
            }
        }
    }
    r.notes.push(format!(
        "{distinct} pairs of different lassos; skipped {deep} partners above level 2, {other_type} of another type"
    ));
    r.finish(start)
}

/// Longest chain of cycle components, from the transitive closure of the
/// edge relation; `None` when some reachable component is neither trivial
/// nor a simple cycle.
pub fn cb_rank_closure_oracle(s: &TransitionSystem) -> Option<usize> {
    let n = s.num_states();
    let mut r = vec![vec![false; n]; n];
    for e in s.edges() {
        r[e.src][e.dst] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    let reach: Vec<bool> = (0..n).map(|v| v == s.initial() || r[s.initial()][v]).collect();
    let mut reps = Vec::new();
    for v in (0..n).filter(|&v| reach[v] && r[v][v]) {
        let comp: Vec<usize> = (0..n).filter(|&w| w == v || (r[v][w] && r[w][v])).collect();
        let inner = s.edges().iter().filter(|e| comp.contains(&e.src) && comp.contains(&e.dst)).count();
        if inner != comp.len() {
            return None;
        }
        if comp[0] == v {
            reps.push(v);
        }
    }
    let mut order = reps.clone();
    // a component reaching more components comes first
    order.sort_by_key(|&v| std::cmp::Reverse(reps.iter().filter(|&&w| r[v][w]).count()));
    let mut best: HashMap<usize, usize> = HashMap::new();
    for &v in order.iter().rev() {
        let below = reps.iter().filter(|&&w| w != v && r[v][w] && !r[w][v]).map(|w| best[w]).max().unwrap_or(0);
        best.insert(v, below + 1);
    }
    Some(best.values().copied().max().unwrap_or(0).saturating_sub(1))
}

fn has_other_component(s: &TransitionSystem) -> bool {
    let c = Condensation::of(s);
    let reach = s.reachable();
    (0..c.len()).any(|k| c.kinds[k] == SccKind::Other && c.members[k].iter().any(|&v| reach[v]))
}

/// Cantor–Bendixson ranks against the closure oracle, hand cases, and
/// agreement with structural recognition after quotient and unravelling.
pub fn cb_rank_check(seed: u64, samples: usize) -> Report {
    let start = Instant::now();
    let mut r = Report::new("Cantor-Bendixson rank", None);
    let sys = |edges: &[(usize, usize)]| {
        let mut b = SystemBuilder::new();
        let n = edges.iter().map(|&(x, y)| x.max(y) + 1).max().unwrap_or(1);
        for v in 0..n {
            b.state(format!("s{v}"));
        }
        for (i, &(x, y)) in edges.iter().enumerate() {
            b.edge(x, if i % 2 == 0 { "a" } else { "b" }, y);
        }
        b.build(0)
    };
    for (name, s, want) in [
        ("self-loop", sys(&[(0, 0)]), CBValue::Finite(0)),
        ("two chained cycles", sys(&[(0, 0), (0, 1), (1, 1)]), CBValue::Finite(1)),
        ("double self-loop", sys(&[(0, 0), (0, 0)]), CBValue::Infinite),
    ] {
        let got = cb_rank(&s).value;
        r.expect(got == want, || format!("{name}: got {got}, expected {want}"));
    }
    let mut rng = gen::rng(seed);
    let alpha = Alphabet::new(&["a"], &[] as &[&str]);
    let mut infinite = 0;
    let mut unravelled = 0;
    for i in 0..samples {
        let n = rng.gen_range(1..=12);
        let mut b = SystemBuilder::new();
        for v in 0..n {
            b.state(format!("s{v}"));
        }
        for v in 0..n {
            for w in 0..n {
                if rng.gen_bool(if w > v { 0.25 } else { 0.06 }) {
                    b.edge(v, alpha.action(&mut rng), w);
                }
            }
        }
        let s = b.build(0);
        let got = cb_rank(&s).value;
        let want = cb_rank_closure_oracle(&s).map_or(CBValue::Infinite, CBValue::Finite);
        infinite += usize::from(want == CBValue::Infinite);
        r.expect(got == want && (got == CBValue::Infinite) == has_other_component(&s), || {
            format!("graph {i}: got {got}, oracle {want}")
        });
        // recognition on the quotient after unravelling
        let q = quotient(&s);
        let qrank = cb_rank(&q).value;
        match partial_unravel(&q, 400) {
            Ok(u) => {
                unravelled += 1;
                let guards = Guards::default();
                let glasso = |skel: &TransitionSystem, level| encode_glasso(skel, 0, level, &guards).is_ok();
                let rec = encode_tree_extension(&u, 0, &guards).map(|e| e.skeleton);
                let ok = match (qrank, &rec) {
                    (CBValue::Infinite, rec) => rec.is_err(),
                    (CBValue::Finite(k), Ok(skel)) => glasso(skel, k + 1) && (k == 0 || !glasso(skel, k)),
                    (CBValue::Finite(_), Err(Error::NotRecognized(m))) => m == "no infinite branch",
                    (CBValue::Finite(_), Err(_)) => false,
                };
                r.expect(ok, || format!("graph {i}: quotient rank {qrank}, recognition {:?}", rec.map(|s| s.num_states())));
            }
            Err(_) => r.skipped += 1,
        }
    }
    r.notes.push(format!("{infinite} infinite, {unravelled} unravelled quotients"));
    r.finish(start)
}

/// Decodes every system of a chain between label-colored skeletons.
fn decode_chain(enc: &EncodedSystem, table: &LabelColors, c: &WitnessChain) -> Result<WitnessChain> {
    let mut out = WitnessChain::new(c.rank, decode(&enc.with_label_colored(c.first(), table)?)?);
    for (l, z) in c.links.iter().zip(&c.systems[1..]) {
        out.push(*l, decode(&enc.with_label_colored(z, table)?)?);
    }
    Ok(out)
}

/// E1 (re-encoding a decoding gives the same skeleton and labels) and E3
/// (a verified chain from a system to the decoding of its encoding) on
/// tree extensions of generalised lassos of level at most 2; E2 on
/// encodings of lassos whose colored skeletons are joined by a witness
/// chain, decoded link by link; E4 where a label has two pieces.
pub fn encoding_axioms(seed: u64, samples: usize, e2_samples: usize) -> Report {
    let start = Instant::now();
    let mut r = Report::new("encoding axioms", None);
    let mut rng = gen::rng(seed);
    let alpha = Alphabet::new(&["a", "b"], &["p"]);
    let guards = Guards::default();
    let mut e4 = 0;
    for i in 0..samples {
        let level = 1 + i % 2;
        let base = gen::glasso(&mut rng, &alpha, level, 1);
        let s = gen::with_trees(&mut rng, &alpha, &base, 2);
        let res = (|| -> Result<(bool, bool, Option<bool>)> {
            let enc = encode_tree_extension(&s, 1, &guards)?;
            let d = decode(&enc)?;
            let again = encode_tree_extension(&d, 1, &guards)?;
            let e1 = again.skeleton == enc.skeleton && again.labels == enc.labels;
            let e3 = verify_chain(&tree_extension_chain(&s, &enc, &guards)?);
            // E4: swap one representative for another piece of its type
            let mut alt = enc.clone();
            let other = alternative_piece(&s, &enc)?;
            let e4 = match other {
                Some((key, piece)) => {
                    alt.dictionary.insert(key, piece);
                    Some(crate::mso::equiv_m(&decode(&enc)?, &decode(&alt)?, 1)?)
                }
                None => None,
            };
            Ok((e1, e3, e4))
        })();
        match res {
            Ok((e1, e3, e4_ok)) => {
                r.expect(e1, || format!("sample {i}: E1 fails"));
                r.expect(e3, || format!("sample {i}: E3 chain does not verify"));
                if let Some(ok) = e4_ok {
                    e4 += 1;
                    r.expect(ok, || format!("sample {i}: E4 fails"));
                }
            }
            Err(e) => {
                r.samples += 1;
                r.fail(format!("sample {i}: {e}\n      {s}"));
            }
        }
    }
    let mut e2 = 0;
    for i in 0..e2_samples {
        let l = gen::lasso(&mut rng, &alpha, 2, 3);
        let s = gen::with_trees(&mut rng, &alpha, &l.to_system(), 2);
        let res = (|| -> Result<bool> {
            let enc = encode_tree_extension(&s, 1, &guards)?;
            let (z, table) = enc.label_colored();
            let lz = lasso_decompose(&z)?;
            let lz2 = lz.unroll(rng.gen_range(1..=2)).shift(rng.gen_range(0..=2));
            let letters: Vec<PointedPath> = [lz.tail(), lz.loop_path()]
                .iter()
                .flat_map(|p| (0..p.len()).map(|j| p.slice(j, j + 1)).collect::<Vec<_>>())
                .collect();
            let units: Vec<Option<String>> = z.colors().to_vec();
            let alg = PathAlgebra::build_generated(&letters, &units, 1, &guards)?;
            let chain = alg.witness_chain(&lz, &lz2, &guards)?;
            Ok(verify_chain(&decode_chain(&enc, &table, &chain)?))
        })();
        match res {
            Ok(ok) => {
                e2 += 1;
                r.expect(ok, || format!("E2 sample {i}: decoded chain does not verify"));
            }
            Err(e) => {
                r.samples += 1;
                r.fail(format!("E2 sample {i}: {e}"));
            }
        }
    }
    r.notes.push(format!("{e2} E2 pairs, {e4} E4 pairs"));
    r.finish(start)
}

/// A piece of `s` that has the same label as, but differs from, the
/// dictionary's representative.
fn alternative_piece(s: &TransitionSystem, enc: &EncodedSystem) -> Result<Option<(LabelKey, TransitionSystem)>> {
    for (key, p) in tree_pieces(s, enc.rank, &Guards::default())? {
        if enc.dictionary.get(&key).is_some_and(|rep| *rep != p) {
            return Ok(Some((key, p)));
        }
    }
    Ok(None)
}

/// Every check at `fraction` of the acceptance sample counts.
pub fn all(seed: u64, fraction: f64) -> Vec<Report> {
    let n = |full: usize| ((full as f64 * fraction).ceil() as usize).max(1);
    let mut out = vec![bisim_oracle(seed, n(1000)), rank1_enumeration(if fraction >= 1.0 { 3 } else { 2 })];
    out.extend(composition(seed, n(500)));
    out.push(semigroup_integrity(if fraction >= 1.0 { 1 } else { 0 }, seed));
    out.push(strong_type_lemma(seed, n(300)));
    out.push(weak_type_chains(seed, n(500)));
    out.push(nested_type_chains(seed, n(100)));
    out.push(cb_rank_check(seed, n(1000)));
    out.push(encoding_axioms(seed, n(200), n(50)));
    out
}
