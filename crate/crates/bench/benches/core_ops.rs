use bisimso_core::bisim::{bisimilar, naive_bisim, quotient};
use bisimso_core::gen::{self, Alphabet};
use bisimso_core::hierarchy::cb_rank;
use bisimso_core::mso::system_type;
use bisimso_core::semigroup::{PathAlgebra, Signature};
use bisimso_core::Guards;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn alpha() -> Alphabet {
    Alphabet::new(&["a", "b"], &["p", "q"])
}

fn bisim(c: &mut Criterion) {
    let mut rng = gen::rng(7);
    let mut g = c.benchmark_group("bisimilar");
    for n in [8, 32, 128] {
        let s = gen::system(&mut rng, &alpha(), n, 0.2);
        let t = gen::bisimilar_variant(&mut rng, &s);
        g.bench_with_input(BenchmarkId::new("refinement", n), &(&s, &t), |b, (s, t)| b.iter(|| bisimilar(s, t)));
        g.bench_with_input(BenchmarkId::new("quotient", n), &s, |b, s| b.iter(|| quotient(s)));
        if n <= 8 {
            g.bench_with_input(BenchmarkId::new("naive", n), &(&s, &t), |b, (s, t)| b.iter(|| naive_bisim(s, t)));
        }
    }
    g.finish();
}

fn hintikka(c: &mut Criterion) {
    let mut rng = gen::rng(11);
    let mut g = c.benchmark_group("system_type");
    g.sample_size(10);
    for (m, n) in [(1, 6), (1, 12), (2, 4), (2, 6)] {
        let s = gen::system(&mut rng, &alpha(), n, 0.3);
        g.bench_function(BenchmarkId::new(format!("m{m}"), s.num_states()), |b| {
            b.iter(|| {
                // the memo would otherwise turn every iteration into a lookup
                bisimso_core::mso::clear_caches();
                system_type(black_box(&s), m)
            })
        });
    }
    g.finish();
}

fn algebra(c: &mut Criterion) {
    let mut g = c.benchmark_group("path_algebra");
    g.sample_size(10);
    for (name, sig, m) in [
        ("a_m0", Signature::new(&["a"], &[] as &[&str]), 0),
        ("ab_m1", Signature::new(&["a", "b"], &[] as &[&str]), 1),
        ("a_p_m1", Signature::new(&["a"], &["p"]), 1),
    ] {
        g.bench_function(name, |b| {
            b.iter(|| {
                bisimso_core::mso::clear_caches();
                PathAlgebra::build(&sig, m)
            })
        });
    }
    g.finish();
}

fn chains(c: &mut Criterion) {
    let alg = PathAlgebra::build(&Signature::new(&["a", "b"], &["p"]), 1).unwrap();
    let a = Alphabet::new(&["a", "b"], &["p"]);
    let mut rng = gen::rng(3);
    let pairs: Vec<_> = (0..16)
        .map(|_| {
            let l = gen::lasso(&mut rng, &a, 3, 3);
            let l2 = gen::weak_partner(&mut rng, &alg, &a, &l).unwrap();
            (l, l2)
        })
        .collect();
    let guards = Guards::default();
    c.bench_function("witness_chain/16 pairs", |b| {
        b.iter(|| {
            for (l, l2) in &pairs {
                black_box(alg.witness_chain(l, l2, &guards).unwrap());
            }
        })
    });
}

fn cb(c: &mut Criterion) {
    let mut rng = gen::rng(5);
    let systems: Vec<_> = (0..64).map(|_| gen::system(&mut rng, &alpha(), 12, 0.15)).collect();
    c.bench_function("cb_rank/64 systems", |b| {
        b.iter(|| systems.iter().map(|s| cb_rank(s).value).max())
    });
}

criterion_group!(benches, bisim, hintikka, algebra, chains, cb);
criterion_main!(benches);
