use std::collections::BTreeMap;

use bisimso_core::gen::{self, Alphabet, GenRng};
use bisimso_core::hierarchy::TypeSession;
use bisimso_core::mso::{evaluate, parse_formula, path_theory, system_type, Assignment, Formula, Guards, TypeId, Value};
use bisimso_core::path::PointedPath;
use bisimso_core::semigroup::{PathAlgebra, Signature};
use bisimso_core::system::{SystemBuilder, TransitionSystem};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn alpha() -> Alphabet {
    Alphabet::new(&["a", "b"], &["p"])
}

fn shuffled(rng: &mut GenRng, s: &TransitionSystem) -> TransitionSystem {
    let mut order: Vec<usize> = (0..s.num_states()).collect();
    order.shuffle(rng);
    let mut b = SystemBuilder::new();
    let mut map = vec![0; s.num_states()];
    for &v in &order {
        map[v] = b.colored_state(format!("r{v}"), s.color(v));
    }
    for e in s.edges() {
        b.edge(map[e.src], e.label.clone(), map[e.dst]);
    }
    b.build(map[s.initial()])
}

fn lasso_algebra() -> PathAlgebra {
    PathAlgebra::build(&Signature::new(&["a", "b"], &["p"]), 1).unwrap()
}

/// Rank-1 properties of the initial state `c` that bisimulation preserves.
fn corpus() -> Vec<Formula> {
    [
        "(color p c)",
        "(exists x (edge a c x))",
        "(exists x (and (edge a c x) (color p x)))",
        "(forall x (not (edge b c x)))",
        "(forall x (or (not (edge a c x)) (color p x)))",
        "(exists x (and (edge b c x) (not (color p x))))",
    ]
    .iter()
    .map(|t| parse_formula(t).unwrap())
    .collect()
}

fn truths(s: &TransitionSystem) -> Vec<bool> {
    let mut env = Assignment::new();
    env.insert("c".into(), Value::Element(s.initial()));
    corpus().iter().map(|f| evaluate(f, s, &env).unwrap()).collect()
}

#[test]
fn equal_types_agree_at_lower_ranks() {
    // long uncolored paths collide at every rank; colored short ones vary
    let mut paths: Vec<PointedPath> = (0..=12).map(|n| PointedPath::word(&vec!["a"; n])).collect();
    for n in 0..=3 {
        for mask in 0u32..1 << (n + 1) {
            let colors = (0..=n).map(|i| (mask >> i & 1 == 1).then(|| "p".to_owned())).collect();
            paths.push(PointedPath::new(colors, vec!["a".to_owned(); n]).unwrap());
        }
    }
    let types: Vec<Vec<TypeId>> = paths.iter().map(|p| (0..=2).map(|m| path_theory(p, m).unwrap()).collect()).collect();
    let mut collisions = 0;
    for i in 0..types.len() {
        for j in i + 1..types.len() {
            for m in 1..=2 {
                if types[i][m] == types[j][m] {
                    collisions += usize::from(m == 2);
                    for k in 0..m {
                        assert_eq!(types[i][k], types[j][k], "{} vs {}", paths[i], paths[j]);
                    }
                }
            }
        }
    }
    assert!(collisions > 0);
}

#[test]
fn replacing_an_attached_subsystem() {
    let mut rng = gen::rng(17);
    let a = alpha();
    let pool: Vec<TransitionSystem> = (0..300).map(|_| gen::system(&mut rng, &a, 4, 0.3)).collect();
    for m in 0..=1 {
        let mut buckets: BTreeMap<TypeId, Vec<&TransitionSystem>> = BTreeMap::new();
        for s in &pool {
            buckets.entry(system_type(s, m).unwrap()).or_default().push(s);
        }
        let buckets: Vec<Vec<&TransitionSystem>> = buckets.into_values().filter(|b| b.len() > 1).collect();
        for _ in 0..100 {
            let host = gen::system(&mut rng, &a, 5, 0.3);
            let v = rng.gen_range(0..host.num_states());
            let label = a.action(&mut rng);
            let bucket = buckets.choose(&mut rng).unwrap();
            let (x, y) = (bucket.choose(&mut rng).unwrap(), bucket.choose(&mut rng).unwrap());
            let hx = host.attach(v, &label, x, "x.");
            let hy = host.attach(v, &label, y, "x.");
            assert_eq!(system_type(&hx, m).unwrap(), system_type(&hy, m).unwrap(), "m={m}\n{hx}\n{hy}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn types_are_isomorphism_invariant(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let s = gen::system(&mut rng, &alpha(), 6, 0.3);
        let t = shuffled(&mut rng, &s);
        for m in 0..=2 {
            prop_assert_eq!(system_type(&s, m).unwrap(), system_type(&t, m).unwrap());
        }
    }

    #[test]
    fn weak_type_ignores_unrolling_and_shifting(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let alg = lasso_algebra();
        let l = gen::lasso(&mut rng, &alpha(), 3, 3);
        let l2 = l.unroll(rng.gen_range(1..=3)).shift(rng.gen_range(0..=3));
        prop_assert_eq!(alg.weak_type(&l).unwrap(), alg.weak_type(&l2).unwrap());
        // two factorizations of one branch are conjugate
        let (p, q) = (alg.strong_pair(&l).unwrap(), alg.strong_pair(&l2).unwrap());
        prop_assert!(alg.conjugate(p, q).unwrap().is_some());
    }

    #[test]
    fn chains_preserve_a_formula_corpus(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let alg = lasso_algebra();
        let l = gen::lasso(&mut rng, &alpha(), 3, 3);
        let l2 = gen::weak_partner(&mut rng, &alg, &alpha(), &l).unwrap();
        let chain = alg.witness_chain(&l, &l2, &Guards::default()).unwrap();
        let first = truths(chain.first());
        for s in &chain.systems {
            prop_assert_eq!(&truths(s), &first);
        }
    }

    #[test]
    fn nested_type_ignores_bisimilar_rewrites(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let k = gen::klasso(&mut rng, &alpha(), 2, 2, 2, 2);
        let mut dup = k.clone();
        if let Some((&v, atts)) = k.attachments.iter().next() {
            dup.attach_with(v, &atts[0].label, atts[0].sub.clone());
        }
        let t = k.main.tail().len();
        let mut unrolled = k.clone();
        if k.attachments.keys().all(|&v| v < t) {
            unrolled.main = k.main.unroll(2);
        }
        let mut session = TypeSession::new(1, &Guards::default());
        let ids: Vec<usize> = [&k, &dup, &unrolled].iter().map(|x| session.add(&x.to_system())).collect();
        let base = session.tp(ids[0], 2).unwrap();
        for &id in &ids[1..] {
            prop_assert_eq!(&session.tp(id, 2).unwrap(), &base);
        }
    }
}
