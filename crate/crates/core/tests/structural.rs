use bisimso_core::bisim::{bisimilar, is_bisimulation, quotient, unravel};
use bisimso_core::gen::{self, Alphabet, GenRng};
use bisimso_core::lasso::{klasso_recognize, lasso_decompose};
use bisimso_core::path::PointedPath;
use bisimso_core::scc::Condensation;
use bisimso_core::system::{disjoint_union, fuse, SystemBuilder, TransitionSystem};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn alpha() -> Alphabet {
    Alphabet::new(&["a", "b"], &["p", "q"])
}

/// Same system with states renamed and listed in a random order.
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
    for (m, set) in s.marks() {
        for &v in set {
            b.mark(m.clone(), map[v]);
        }
    }
    b.build(map[s.initial()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn lasso_round_trip(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let l = gen::lasso(&mut rng, &alpha(), 4, 4);
        let s = l.to_system();
        let back = lasso_decompose(&s).unwrap();
        prop_assert!(back.to_system().is_isomorphic(&s));
    }

    #[test]
    fn klasso_round_trip(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let level = rng.gen_range(1..=3);
        let k = gen::klasso(&mut rng, &alpha(), level, 2, 2, 2);
        let s = k.to_system();
        let back = klasso_recognize(&s).unwrap();
        prop_assert!(back.to_system().is_isomorphic(&s));
        prop_assert!(back.level() <= k.level());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn concat_associative_and_additive(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let a = Alphabet::new(&["a", "b"], &[] as &[&str]);
        let (x, y, z) = (gen::path(&mut rng, &a, 3), gen::path(&mut rng, &a, 2), gen::path(&mut rng, &a, 4));
        let left = x.concat(&y).unwrap().concat(&z).unwrap();
        let right = x.concat(&y.concat(&z).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(left.len(), x.len() + y.len() + z.len());
        let unit = PointedPath::unit(None);
        prop_assert_eq!(&unit.concat(&x).unwrap(), &x);
        prop_assert_eq!(&x.concat(&unit).unwrap(), &x);
    }

    #[test]
    fn union_and_fuse_counts(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let s = gen::system(&mut rng, &alpha(), 6, 0.3);
        let t = gen::system(&mut rng, &alpha(), 6, 0.3);
        let u = disjoint_union(&s, &t);
        prop_assert_eq!(u.num_states(), s.num_states() + t.num_states());
        prop_assert_eq!(u.num_edges(), s.num_edges() + t.num_edges());
        prop_assert_eq!(u.state_name(u.initial()), format!("L.{}", s.state_name(s.initial())));
        // fusing k states of equal color leaves n - k + 1
        let mut b = SystemBuilder::new();
        let map = s.copy_into(&mut b, "");
        let members: Vec<usize> = (0..s.num_states()).filter(|&v| s.color(v) == s.color(0) && rng.gen_bool(0.5)).collect();
        for &v in &members {
            b.mark("P", map[v]);
        }
        let marked = b.build(map[s.initial()]);
        match fuse(&marked, "P") {
            Ok(f) => prop_assert_eq!(f.num_states(), s.num_states() - members.len() + 1),
            Err(_) => prop_assert!(members.is_empty()),
        }
    }

    #[test]
    fn scc_kinds_are_isomorphism_invariant(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let s = gen::system(&mut rng, &alpha(), 8, 0.25);
        let t = shuffled(&mut rng, &s);
        let (cs, ct) = (Condensation::of(&s), Condensation::of(&t));
        let kinds = |c: &Condensation| {
            let mut k: Vec<(String, usize)> =
                (0..c.len()).map(|i| (format!("{:?}", c.kinds[i]), c.members[i].len())).collect();
            k.sort();
            k
        };
        prop_assert_eq!(kinds(&cs), kinds(&ct));
        // successors always have smaller ids, so the condensation is acyclic
        for c in 0..cs.len() {
            prop_assert!(cs.succ[c].iter().all(|&d| d < c));
        }
    }

    #[test]
    fn bisimilarity_is_an_equivalence(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let a = gen::system(&mut rng, &alpha(), 6, 0.3);
        let b = if rng.gen_bool(0.5) { gen::bisimilar_variant(&mut rng, &a) } else { gen::system(&mut rng, &alpha(), 6, 0.3) };
        let c = if rng.gen_bool(0.5) { gen::bisimilar_variant(&mut rng, &b) } else { gen::system(&mut rng, &alpha(), 6, 0.3) };
        prop_assert!(bisimilar(&a, &a).is_bisimilar());
        let (ab, ba) = (bisimilar(&a, &b).is_bisimilar(), bisimilar(&b, &a).is_bisimilar());
        prop_assert_eq!(ab, ba);
        if ab && bisimilar(&b, &c).is_bisimilar() {
            prop_assert!(bisimilar(&a, &c).is_bisimilar());
        }
        for (x, y) in [(&a, &b), (&b, &c), (&a, &c)] {
            if let Some(rel) = bisimilar(x, y).relation() {
                prop_assert!(is_bisimulation(x, y, rel));
            }
        }
    }

    #[test]
    fn quotient_is_bisimilar_and_minimal(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let s = gen::system(&mut rng, &alpha(), 8, 0.3);
        let q = quotient(&s);
        prop_assert!(bisimilar(&s, &q).is_bisimilar());
        prop_assert!(quotient(&q).is_isomorphic(&q));
    }

    #[test]
    fn unravellings_of_bisimilar_systems_are_bisimilar(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let s = gen::system(&mut rng, &alpha(), 5, 0.3);
        let t = gen::bisimilar_variant(&mut rng, &s);
        for d in 0..=6 {
            let (us, ut) = (unravel(&s, d), unravel(&t, d));
            prop_assert!(bisimilar(&us.system, &ut.system).is_bisimilar(), "depth {}", d);
        }
    }

    #[test]
    fn unravel_projection_is_a_homomorphism(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let s = gen::system(&mut rng, &alpha(), 6, 0.3);
        let u = unravel(&s, 4);
        prop_assert_eq!(u.projection[u.system.initial()], s.initial());
        for e in u.system.edges() {
            let (x, y) = (u.projection[e.src], u.projection[e.dst]);
            prop_assert!(s.out_edges(x).any(|f| f.label == e.label && f.dst == y));
        }
        for v in 0..u.system.num_states() {
            prop_assert_eq!(u.system.color(v), s.color(u.projection[v]));
        }
    }
}
