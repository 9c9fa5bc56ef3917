//! The partial semigroup of pointed-path types.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mso::{path_theory_with, Guards, TypeId};
use crate::path::PointedPath;
use crate::system::TransitionSystem;
use crate::{Color, Label};

/// Action alphabet and color set. "No color" is always available.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub actions: Vec<Label>,
    #[serde(default)]
    pub colors: Vec<Color>,
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "actions {{{}}} colors {{{}}}", self.actions.join(","), self.colors.join(","))
    }
}

impl Signature {
    pub fn new<A: AsRef<str>, C: AsRef<str>>(actions: &[A], colors: &[C]) -> Self {
        let actions: BTreeSet<Label> = actions.iter().map(|a| a.as_ref().to_owned()).collect();
        let colors: BTreeSet<Color> = colors.iter().map(|c| c.as_ref().to_owned()).collect();
        Signature { actions: actions.into_iter().collect(), colors: colors.into_iter().collect() }
    }

    /// Smallest signature covering all given systems.
    pub fn of_systems<'a>(systems: impl IntoIterator<Item = &'a TransitionSystem>) -> Self {
        let mut actions = BTreeSet::new();
        let mut colors = BTreeSet::new();
        for s in systems {
            actions.extend(s.actions());
            colors.extend(s.color_set());
        }
        Signature { actions: actions.into_iter().collect(), colors: colors.into_iter().collect() }
    }

    pub fn of_paths<'a>(paths: impl IntoIterator<Item = &'a PointedPath>) -> Self {
        let mut actions = BTreeSet::new();
        let mut colors = BTreeSet::new();
        for p in paths {
            actions.extend(p.labels().iter().cloned());
            colors.extend(p.colors().iter().flatten().cloned());
        }
        Signature { actions: actions.into_iter().collect(), colors: colors.into_iter().collect() }
    }

    pub fn union(&self, other: &Signature) -> Signature {
        let actions: BTreeSet<Label> = self.actions.iter().chain(&other.actions).cloned().collect();
        let colors: BTreeSet<Color> = self.colors.iter().chain(&other.colors).cloned().collect();
        Signature { actions: actions.into_iter().collect(), colors: colors.into_iter().collect() }
    }

    /// `None` followed by the colors in order.
    pub fn color_options(&self) -> Vec<Option<Color>> {
        std::iter::once(None).chain(self.colors.iter().cloned().map(Some)).collect()
    }

    pub fn contains_path(&self, p: &PointedPath) -> bool {
        p.labels().iter().all(|l| self.actions.contains(l))
            && p.colors().iter().flatten().all(|c| self.colors.contains(c))
    }
}

/// A composable pair of elements `⟨α, β⟩`: `β` composes with itself and `α`
/// composes with `β`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TypePair {
    pub alpha: usize,
    pub beta: usize,
}

/// One conjugacy class of composable pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugacyClass {
    pub id: usize,
    /// Least member by element index.
    pub representative: TypePair,
    /// Distinct `(αβ^π, β^π)` values of the members.
    pub linked: Vec<(usize, usize)>,
    /// Number of composable pairs in the class.
    pub size: usize,
}

/// Closure of the path types generated by a set of single-edge paths at
/// rank `m`, with its partial product table.
#[derive(Clone, Debug)]
pub struct PathAlgebra {
    rank: usize,
    signature: Signature,
    guards: Guards,
    generators: Vec<PointedPath>,
    gen_index: HashMap<(Option<Color>, Label, Option<Color>), usize>,
    types: Vec<TypeId>,
    reps: Vec<PointedPath>,
    words: Vec<Vec<usize>>,
    index: HashMap<TypeId, usize>,
    units: Vec<usize>,
    unit_of: HashMap<Option<Color>, usize>,
    right: Vec<Vec<usize>>,
    table: Vec<Vec<Option<usize>>>,
    idempotents: Vec<Option<(usize, usize)>>,
    classes: Vec<ConjugacyClass>,
    class_of_linked: HashMap<(usize, usize), usize>,
}

fn letter(g: &PointedPath) -> (Option<Color>, Label, Option<Color>) {
    (g.colors()[0].clone(), g.labels()[0].clone(), g.colors()[1].clone())
}

impl PathAlgebra {
    /// All path types over `signature`: every single-edge path is a
    /// generator and every color (including none) has a unit.
    pub fn build(signature: &Signature, m: usize) -> Result<Self> {
        Self::build_with(signature, m, &Guards::default())
    }

    pub fn build_with(signature: &Signature, m: usize, guards: &Guards) -> Result<Self> {
        let sig = Signature::new(&signature.actions, &signature.colors);
        let options = sig.color_options();
        let mut gens = Vec::new();
        for c1 in &options {
            for a in &sig.actions {
                for c2 in &options {
                    gens.push(PointedPath::edge(c1.as_deref(), a, c2.as_deref()));
                }
            }
        }
        let mut alg = Self::build_generated(&gens, &options, m, guards)?;
        alg.signature = sig;
        Ok(alg)
    }

    /// Closure from the given single-edge paths and the units of the given
    /// colors (plus every end-point color of a generator), breadth first, so
    /// every element's representative is its shortlex-least path.
    ///
    /// Products are read off the right Cayley graph: `x · y` is `x` right
    /// multiplied by the letters of `y`'s representative, which is sound by
    /// composition; [`PathAlgebra::check_closure`] re-derives every product
    /// from the concatenated representatives.
    pub fn build_generated(
        generators: &[PointedPath],
        unit_colors: &[Option<Color>],
        m: usize,
        guards: &Guards,
    ) -> Result<Self> {
        let mut gens: Vec<PointedPath> = generators.to_vec();
        if let Some(bad) = gens.iter().find(|g| g.len() != 1) {
            return Err(Error::Invalid(format!("generator `{bad}` is not a single edge")));
        }
        gens.sort_by(|a, b| (a.labels(), a.colors()).cmp(&(b.labels(), b.colors())));
        gens.dedup();
        let mut colors: BTreeSet<Option<Color>> = unit_colors.iter().cloned().collect();
        for g in &gens {
            colors.insert(g.colors()[0].clone());
            colors.insert(g.colors()[1].clone());
        }
        let mut alg = PathAlgebra {
            rank: m,
            signature: Signature::of_paths(&gens),
            guards: *guards,
            gen_index: gens.iter().enumerate().map(|(i, g)| (letter(g), i)).collect(),
            generators: gens,
            types: Vec::new(),
            reps: Vec::new(),
            words: Vec::new(),
            index: HashMap::new(),
            units: Vec::new(),
            unit_of: HashMap::new(),
            right: Vec::new(),
            table: Vec::new(),
            idempotents: Vec::new(),
            classes: Vec::new(),
            class_of_linked: HashMap::new(),
        };
        for c in &colors {
            let u = PointedPath::unit(c.as_deref());
            let t = path_theory_with(&u, m, guards)?;
            let i = match alg.index.get(&t) {
                Some(&i) => i,
                None => alg.push(t, u, Vec::new()),
            };
            alg.units.push(i);
            alg.unit_of.insert(c.clone(), i);
        }
        let mut by_start: HashMap<Option<Color>, Vec<usize>> = HashMap::new();
        for (i, g) in alg.generators.iter().enumerate() {
            by_start.entry(g.colors()[0].clone()).or_default().push(i);
        }
        let mut next = 0;
        while next < alg.reps.len() {
            let rep = alg.reps[next].clone();
            let mut row = vec![usize::MAX; alg.generators.len()];
            let last = rep.last_color().map(str::to_owned);
            for &gi in by_start.get(&last).map(Vec::as_slice).unwrap_or(&[]) {
                let p = rep.concat(&alg.generators[gi])?;
                let t = path_theory_with(&p, m, guards)?;
                row[gi] = match alg.index.get(&t) {
                    Some(&i) => i,
                    None => {
                        if p.len() > guards.max_path_len {
                            return Err(Error::GuardExceeded(format!(
                                "path algebra at rank {m} needs representatives longer than {}",
                                guards.max_path_len
                            )));
                        }
                        let mut w = alg.words[next].clone();
                        w.push(gi);
                        alg.push(t, p, w)
                    }
                };
            }
            alg.right.push(row);
            next += 1;
        }
        alg.fill_table();
        alg.idempotents = (0..alg.len()).map(|e| alg.compute_idempotent(e)).collect();
        alg.compute_classes()?;
        Ok(alg)
    }

    fn push(&mut self, t: TypeId, p: PointedPath, word: Vec<usize>) -> usize {
        let i = self.types.len();
        self.index.insert(t.clone(), i);
        self.types.push(t);
        self.reps.push(p);
        self.words.push(word);
        i
    }

    fn fill_table(&mut self) {
        let n = self.len();
        self.table = vec![vec![None; n]; n];
        for x in 0..n {
            for y in 0..n {
                if self.reps[x].last_color() != self.reps[y].first_color() {
                    continue;
                }
                let mut z = x;
                for &g in &self.words[y] {
                    z = self.right[z][g];
                }
                self.table[x][y] = Some(z);
            }
        }
    }

    pub fn generators(&self) -> &[PointedPath] {
        &self.generators
    }

    /// Index of a single-edge generator.
    pub fn generator(&self, from: Option<&str>, label: &str, to: Option<&str>) -> Option<usize> {
        self.gen_index.get(&(from.map(str::to_owned), label.to_owned(), to.map(str::to_owned))).copied()
    }

    /// `x · g` for generator `g`, if composable.
    pub fn mul_generator(&self, x: usize, g: usize) -> Option<usize> {
        let z = self.right[x][g];
        (z != usize::MAX).then_some(z)
    }

    pub fn unit_for(&self, color: Option<&str>) -> Option<usize> {
        self.unit_of.get(&color.map(str::to_owned)).copied()
    }

    /// Element of a path over the generators, by right multiplication.
    pub fn element_by_letters(&self, p: &PointedPath) -> Result<usize> {
        let mut z = self
            .unit_for(p.first_color())
            .ok_or_else(|| Error::Invalid(format!("no unit for the start color of `{p}`")))?;
        for i in 0..p.len() {
            let g = self
                .generator(p.colors()[i].as_deref(), &p.labels()[i], p.colors()[i + 1].as_deref())
                .ok_or_else(|| Error::Invalid(format!("edge {i} of `{p}` is not a generator")))?;
            z = self.mul_generator(z, g).expect("generator composes after matching color");
        }
        Ok(z)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn type_of(&self, e: usize) -> &TypeId {
        &self.types[e]
    }

    pub fn representative(&self, e: usize) -> &PointedPath {
        &self.reps[e]
    }

    pub fn units(&self) -> &[usize] {
        &self.units
    }

    pub fn is_unit(&self, e: usize) -> bool {
        self.units.contains(&e)
    }

    pub fn first_color(&self, e: usize) -> Option<&str> {
        self.reps[e].first_color()
    }

    pub fn last_color(&self, e: usize) -> Option<&str> {
        self.reps[e].last_color()
    }

    /// Element of a type, if the type belongs to the algebra.
    pub fn element(&self, t: &TypeId) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// Element of the type of path `p`.
    pub fn element_of_path(&self, p: &PointedPath) -> Result<usize> {
        let t = path_theory_with(p, self.rank, &self.guards)?;
        self.element(&t)
            .ok_or_else(|| Error::Invalid(format!("path `{p}` is not over the algebra's signature")))
    }

    /// `x · y`, if the end color of `x` matches the start color of `y`.
    pub fn mul(&self, x: usize, y: usize) -> Option<usize> {
        self.table[x][y]
    }

    pub fn table(&self) -> &[Vec<Option<usize>>] {
        &self.table
    }

    pub fn is_self_composable(&self, e: usize) -> bool {
        self.table[e][e].is_some()
    }

    /// `(e^π, π)` for the least `π` with `e^π · e^π = e^π`.
    pub fn idempotent_power(&self, e: usize) -> Result<(usize, usize)> {
        self.idempotents[e].ok_or_else(|| Error::NotComposable(format!("e{e} does not compose with itself")))
    }

    fn compute_idempotent(&self, e: usize) -> Option<(usize, usize)> {
        self.table[e][e]?;
        let mut p = e;
        for n in 1..=self.len() + 1 {
            let sq = self.table[p][p].expect("powers stay self-composable");
            if sq == p {
                return Some((p, n));
            }
            p = self.table[p][e].expect("powers stay composable");
        }
        unreachable!("a finite semigroup has an idempotent power")
    }

    pub fn is_idempotent(&self, e: usize) -> bool {
        self.table[e][e] == Some(e)
    }

    pub fn is_composable_pair(&self, p: TypePair) -> bool {
        self.table[p.beta][p.beta].is_some() && self.table[p.alpha][p.beta].is_some()
    }

    /// All composable pairs in index order.
    pub fn composable_pairs(&self) -> Vec<TypePair> {
        let mut out = Vec::new();
        for alpha in 0..self.len() {
            for beta in 0..self.len() {
                let p = TypePair { alpha, beta };
                if self.is_composable_pair(p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// `(αβ^π, β^π)`; conjugacy only depends on this pair.
    pub fn linked(&self, p: TypePair) -> Result<(usize, usize)> {
        if !self.is_composable_pair(p) {
            return Err(Error::NotComposable(format!("⟨e{}, e{}⟩ is not a composable pair", p.alpha, p.beta)));
        }
        let (e, _) = self.idempotent_power(p.beta)?;
        let s = self.table[p.alpha][e].expect("alpha composes with beta^pi");
        Ok((s, e))
    }

    /// Search order for conjugacy witnesses: non-units by index, then units.
    fn witness_order(&self) -> Vec<usize> {
        (0..self.len()).filter(|e| !self.is_unit(*e)).chain(self.units.iter().copied()).collect()
    }

    /// A witness `(ξ, η)` with `γδ^π = αβ^π ξ`, `β^π = ξ η`, `δ^π = η ξ`.
    pub fn conjugate(&self, p: TypePair, q: TypePair) -> Result<Option<(usize, usize)>> {
        let (s, e) = self.linked(p)?;
        let (t, f) = self.linked(q)?;
        Ok(self.conjugate_linked((s, e), (t, f)))
    }

    pub fn conjugate_linked(&self, (s, e): (usize, usize), (t, f): (usize, usize)) -> Option<(usize, usize)> {
        let order = self.witness_order();
        for &xi in &order {
            if self.table[s][xi] != Some(t) {
                continue;
            }
            for &eta in &order {
                if self.table[xi][eta] == Some(e) && self.table[eta][xi] == Some(f) {
                    return Some((xi, eta));
                }
            }
        }
        None
    }

    /// Union-find over linked pairs using the factorizations of each
    /// idempotent, then a check that the relation is an equivalence.
    fn compute_classes(&mut self) -> Result<()> {
        let pairs = self.composable_pairs();
        let mut linked_of: Vec<(usize, usize)> = Vec::with_capacity(pairs.len());
        let mut nodes: Vec<(usize, usize)> = Vec::new();
        let mut node_id: HashMap<(usize, usize), usize> = HashMap::new();
        for &p in &pairs {
            let l = self.linked(p)?;
            linked_of.push(l);
            node_id.entry(l).or_insert_with(|| {
                nodes.push(l);
                nodes.len() - 1
            });
        }
        let mut factors: HashMap<usize, Vec<(usize, usize)>> = nodes.iter().map(|&(_, e)| (e, Vec::new())).collect();
        for (xi, row) in self.table.iter().enumerate() {
            for (eta, z) in row.iter().enumerate() {
                if let Some(v) = z.and_then(|z| factors.get_mut(&z)) {
                    v.push((xi, eta));
                }
            }
        }
        // relation R(a) as node sets
        let k = nodes.len();
        let mut rel: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
        for (a, &(s, e)) in nodes.iter().enumerate() {
            for &(xi, eta) in &factors[&e] {
                let (Some(t), Some(f)) = (self.table[s][xi], self.table[eta][xi]) else { continue };
                if let Some(&b) = node_id.get(&(t, f)) {
                    rel[a].insert(b);
                }
            }
        }
        for a in 0..k {
            if !rel[a].contains(&a) {
                return Err(Error::NotEquivalence(format!("linked pair {:?} is not related to itself", nodes[a])));
            }
            for &b in &rel[a] {
                if !rel[b].contains(&a) {
                    return Err(Error::NotEquivalence(format!(
                        "{:?} relates to {:?} but not conversely",
                        nodes[a], nodes[b]
                    )));
                }
                if !rel[b].is_subset(&rel[a]) {
                    return Err(Error::NotEquivalence(format!(
                        "relation is not transitive through {:?} and {:?}",
                        nodes[a], nodes[b]
                    )));
                }
            }
        }
        let mut class_of_node = vec![usize::MAX; k];
        let mut classes: Vec<ConjugacyClass> = Vec::new();
        for (i, &p) in pairs.iter().enumerate() {
            let a = node_id[&linked_of[i]];
            if class_of_node[a] == usize::MAX {
                let id = classes.len();
                for &b in &rel[a] {
                    class_of_node[b] = id;
                }
                let linked = rel[a].iter().map(|&b| nodes[b]).collect();
                classes.push(ConjugacyClass { id, representative: p, linked, size: 0 });
            }
            classes[class_of_node[a]].size += 1;
        }
        self.class_of_linked = nodes.iter().enumerate().map(|(a, &l)| (l, class_of_node[a])).collect();
        self.classes = classes;
        Ok(())
    }

    pub fn classes(&self) -> &[ConjugacyClass] {
        &self.classes
    }

    /// Composable pairs of a class, in index order.
    pub fn members(&self, class: usize) -> Vec<TypePair> {
        let linked: BTreeSet<(usize, usize)> = self.classes[class].linked.iter().copied().collect();
        self.composable_pairs().into_iter().filter(|&p| self.linked(p).is_ok_and(|l| linked.contains(&l))).collect()
    }

    /// Conjugacy class id of a composable pair.
    pub fn class_of(&self, p: TypePair) -> Result<usize> {
        let l = self.linked(p)?;
        Ok(self.class_of_linked[&l])
    }

    /// Closure check: every defined product is an element whose type is the
    /// type of the concatenated representatives.
    pub fn check_closure(&self) -> Result<()> {
        for x in 0..self.len() {
            for y in 0..self.len() {
                let composable = self.reps[x].last_color() == self.reps[y].first_color();
                match (composable, self.table[x][y]) {
                    (false, None) => {}
                    (true, Some(z)) => {
                        let t = path_theory_with(&self.reps[x].concat(&self.reps[y])?, self.rank, &self.guards)?;
                        if t != self.types[z] {
                            return Err(Error::VerifyFailed(format!("e{x}·e{y} recorded as e{z} but has another type")));
                        }
                    }
                    _ => return Err(Error::VerifyFailed(format!("definedness of e{x}·e{y} disagrees with colors"))),
                }
            }
        }
        for (e, r) in self.reps.iter().enumerate() {
            if path_theory_with(r, self.rank, &self.guards)? != self.types[e] {
                return Err(Error::VerifyFailed(format!("representative of e{e} has another type")));
            }
        }
        Ok(())
    }

    /// Exhaustive associativity check; returns the first violating triple.
    pub fn find_non_associative(&self) -> Option<(usize, usize, usize)> {
        let n = self.len();
        for x in 0..n {
            for y in 0..n {
                let Some(xy) = self.table[x][y] else { continue };
                for z in 0..n {
                    let Some(yz) = self.table[y][z] else { continue };
                    if self.table[xy][z] != self.table[x][yz] {
                        return Some((x, y, z));
                    }
                }
            }
        }
        None
    }

    /// Deterministic text listing of the algebra.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let sig = &self.signature;
        let _ = writeln!(out, "path algebra rank {}", self.rank);
        let _ = writeln!(out, "actions: {}", sig.actions.join(" "));
        let _ = writeln!(out, "colors: {}", if sig.colors.is_empty() { "-".to_owned() } else { sig.colors.join(" ") });
        let _ = writeln!(out, "elements: {}", self.len());
        for (e, r) in self.reps.iter().enumerate() {
            let unit = if self.is_unit(e) { "  [unit]" } else { "" };
            let _ = writeln!(out, "  e{e} = {r}{unit}");
        }
        let _ = writeln!(out, "product:");
        for (x, row) in self.table.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|c| c.map_or("-".to_owned(), |z| format!("e{z}"))).collect();
            let _ = writeln!(out, "  e{x}: {}", cells.join(" "));
        }
        let _ = writeln!(out, "idempotent powers:");
        for (e, ip) in self.idempotents.iter().enumerate() {
            if let Some((p, n)) = ip {
                let _ = writeln!(out, "  e{e}^{n} = e{p}");
            }
        }
        let _ = writeln!(out, "conjugacy classes: {}", self.classes.len());
        for c in &self.classes {
            let linked: Vec<String> = c.linked.iter().map(|(s, e)| format!("(e{s},e{e})")).collect();
            let _ = writeln!(
                out,
                "  k{}: rep <e{},e{}> members {} linked {}",
                c.id,
                c.representative.alpha,
                c.representative.beta,
                c.size,
                linked.join(" ")
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_letter(m: usize) -> PathAlgebra {
        PathAlgebra::build(&Signature::new(&["a"], &[] as &[&str]), m).unwrap()
    }

    #[test]
    fn rank_zero_one_letter_has_three_elements() {
        let alg = one_letter(0);
        assert_eq!(alg.len(), 3);
        assert_eq!(alg.units(), &[0]);
        assert_eq!(alg.representative(1).len(), 1);
        assert_eq!(alg.representative(2).len(), 2);
        for x in 0..3 {
            assert_eq!(alg.mul(0, x), Some(x));
            assert_eq!(alg.mul(x, 0), Some(x));
        }
        assert_eq!(alg.idempotent_power(1).unwrap(), (2, 2));
        assert_eq!(alg.idempotent_power(2).unwrap(), (2, 1));
    }

    #[test]
    fn closure_and_associativity() {
        for m in 0..=1 {
            let alg = PathAlgebra::build(&Signature::new(&["a", "b"], &["p"]), m).unwrap();
            alg.check_closure().unwrap();
            assert_eq!(alg.find_non_associative(), None);
        }
    }

    #[test]
    fn conjugacy_reflexive_with_idempotent_witness() {
        let alg = one_letter(1);
        for p in alg.composable_pairs() {
            let (xi, eta) = alg.conjugate(p, p).unwrap().expect("reflexive");
            let (_, e) = alg.linked(p).unwrap();
            assert_eq!(alg.mul(xi, eta), Some(e));
        }
    }

    #[test]
    fn different_letters_are_not_conjugate() {
        let alg = PathAlgebra::build(&Signature::new(&["a", "b"], &[] as &[&str]), 1).unwrap();
        let a = alg.element_of_path(&PointedPath::word(&["a"])).unwrap();
        let b = alg.element_of_path(&PointedPath::word(&["b"])).unwrap();
        let u = alg.units()[0];
        let pa = TypePair { alpha: u, beta: a };
        let pb = TypePair { alpha: u, beta: b };
        assert_eq!(alg.conjugate(pa, pb).unwrap(), None);
        assert_ne!(alg.class_of(pa).unwrap(), alg.class_of(pb).unwrap());
    }

    #[test]
    fn tail_absorbs_one_loop() {
        let alg = PathAlgebra::build(&Signature::new(&["a", "b"], &[] as &[&str]), 1).unwrap();
        let alpha = alg.element_of_path(&PointedPath::word(&["a"])).unwrap();
        let beta = alg.element_of_path(&PointedPath::word(&["b", "a"])).unwrap();
        let ab = alg.mul(alpha, beta).unwrap();
        let p = TypePair { alpha, beta };
        let q = TypePair { alpha: ab, beta };
        assert!(alg.conjugate(p, q).unwrap().is_some());
        assert_eq!(alg.class_of(p).unwrap(), alg.class_of(q).unwrap());
    }

    #[test]
    fn generated_subalgebra_matches_full_products() {
        let full = PathAlgebra::build(&Signature::new(&["a", "b"], &["p"]), 1).unwrap();
        let gens = [PointedPath::edge(Some("p"), "a", None), PointedPath::edge(None, "b", Some("p"))];
        let sub = PathAlgebra::build_generated(&gens, &[], 1, &Guards::default()).unwrap();
        sub.check_closure().unwrap();
        assert!(sub.len() < full.len());
        for x in 0..sub.len() {
            for y in 0..sub.len() {
                let fx = full.element(sub.type_of(x)).unwrap();
                let fy = full.element(sub.type_of(y)).unwrap();
                let fz = sub.mul(x, y).map(|z| full.element(sub.type_of(z)).unwrap());
                assert_eq!(full.mul(fx, fy), fz);
            }
        }
        let p = PointedPath::edge(Some("p"), "a", None).concat(&PointedPath::edge(None, "b", Some("p"))).unwrap();
        assert_eq!(sub.element_by_letters(&p).unwrap(), sub.element_of_path(&p).unwrap());
        assert!(sub.element_by_letters(&PointedPath::word(&["a"])).is_err());
    }

    #[test]
    fn classes_partition_pairs() {
        let alg = PathAlgebra::build(&Signature::new(&["a"], &["p"]), 1).unwrap();
        let total: usize = alg.classes().iter().map(|c| c.size).sum();
        assert_eq!(total, alg.composable_pairs().len());
        for c in alg.classes() {
            let ms = alg.members(c.id);
            assert_eq!(ms.len(), c.size);
            assert_eq!(ms[0], c.representative);
        }
        let dump = alg.dump();
        assert!(dump.starts_with("path algebra rank 1\n"));
    }
}
