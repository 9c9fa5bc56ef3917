//! Cantor–Bendixson rank of the unravelling, read off the condensation.

use std::collections::VecDeque;
use std::fmt;

use crate::scc::{Condensation, SccKind};
use crate::system::TransitionSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CBValue {
    Finite(usize),
    Infinite,
}

impl fmt::Display for CBValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CBValue::Finite(n) => write!(f, "{n}"),
            CBValue::Infinite => f.write_str("INFINITE"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CBWitness {
    /// Cycle components along a longest chain, outermost first; each is
    /// given by its member states.
    Chain(Vec<Vec<usize>>),
    /// A state and two distinct cycles through it, as edge indices.
    TwoCycles { state: usize, first: Vec<usize>, second: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CBRank {
    pub value: CBValue,
    pub witness: CBWitness,
}

impl CBRank {
    /// Deterministic text block naming states and edges of `s`.
    pub fn report(&self, s: &TransitionSystem) -> String {
        let mut out = format!("cb_rank: {}\n", self.value);
        let cycle = |c: &[usize]| {
            let e = &s.edges()[c[0]];
            let mut t = s.state_name(e.src).to_owned();
            for &i in c {
                let e = &s.edges()[i];
                t.push_str(&format!(" -{}-> {}", e.label, s.state_name(e.dst)));
            }
            t
        };
        match &self.witness {
            CBWitness::Chain(comps) => {
                out.push_str(&format!("witness: chain of {} cycle component(s)\n", comps.len()));
                for c in comps {
                    let names: Vec<&str> = c.iter().map(|&v| s.state_name(v)).collect();
                    out.push_str(&format!("  {{{}}}\n", names.join(", ")));
                }
            }
            CBWitness::TwoCycles { state, first, second } => {
                out.push_str(&format!("witness: two cycles through {}\n", s.state_name(*state)));
                out.push_str(&format!("  {}\n  {}\n", cycle(first), cycle(second)));
            }
        }
        out
    }
}

/// Rank of the unravelling from the initial state. A reachable component
/// that is neither trivial nor a simple cycle gives `Infinite`; otherwise
/// the rank is the number of cycle components on a longest chain, minus 1.
pub fn cb_rank(s: &TransitionSystem) -> CBRank {
    let cond = Condensation::of(s);
    let reach = s.reachable();
    let k = cond.len();
    let live: Vec<bool> = (0..k).map(|c| cond.members[c].iter().any(|&v| reach[v])).collect();
    if let Some(c) = (0..k).find(|&c| live[c] && cond.kinds[c] == SccKind::Other) {
        return CBRank { value: CBValue::Infinite, witness: two_cycles(s, &cond, c) };
    }
    // components come in reverse topological order, so successors first
    let mut best = vec![0usize; k];
    let mut next = vec![None; k];
    for c in 0..k {
        let (b, n) = cond.succ[c].iter().map(|&d| (best[d], Some(d))).max().unwrap_or((0, None));
        best[c] = b + usize::from(cond.kinds[c] == SccKind::Cycle);
        next[c] = n;
    }
    let start = cond.comp[s.initial()];
    let mut chain = Vec::new();
    let mut cur = Some(start);
    while let Some(c) = cur {
        if cond.kinds[c] == SccKind::Cycle {
            chain.push(cond.members[c].clone());
        }
        cur = next[c];
    }
    CBRank { value: CBValue::Finite(best[start].saturating_sub(1)), witness: CBWitness::Chain(chain) }
}

fn two_cycles(s: &TransitionSystem, cond: &Condensation, c: usize) -> CBWitness {
    let inner = |i: usize| cond.comp[s.edges()[i].src] == c && cond.comp[s.edges()[i].dst] == c;
    let outs = |v: usize| (0..s.num_edges()).filter(move |&i| s.edges()[i].src == v && inner(i));
    let state =
        cond.members[c].iter().copied().find(|&v| outs(v).count() >= 2).expect("component has a branching state");
    let mut found = outs(state).map(|e| {
        let mut cycle = vec![e];
        cycle.extend(path_back(s, &inner, s.edges()[e].dst, state));
        cycle
    });
    let first = found.next().expect("two edges");
    let second = found.next().expect("two edges");
    CBWitness::TwoCycles { state, first, second }
}

/// Shortest path of inner edges from `from` to `to` (empty if equal).
fn path_back(s: &TransitionSystem, inner: &dyn Fn(usize) -> bool, from: usize, to: usize) -> Vec<usize> {
    let mut pred: Vec<Option<usize>> = vec![None; s.num_states()];
    let mut seen = vec![false; s.num_states()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for (i, e) in s.edges().iter().enumerate() {
            if e.src == v && inner(i) && !seen[e.dst] {
                seen[e.dst] = true;
                pred[e.dst] = Some(i);
                queue.push_back(e.dst);
            }
        }
    }
    let mut path = Vec::new();
    let mut v = to;
    while v != from {
        let i = pred[v].expect("strongly connected");
        path.push(i);
        v = s.edges()[i].src;
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(states: &[&str], edges: &[(&str, &str, &str)]) -> TransitionSystem {
        TransitionSystem::from_parts(
            states.iter().map(|s| s.to_string()),
            states[0],
            Vec::<(String, String)>::new(),
            edges.iter().map(|(a, l, b)| (a.to_string(), l.to_string(), b.to_string())),
        )
        .unwrap()
    }

    /// Longest chain via transitive closure of the reachability matrix.
    fn closure_oracle(s: &TransitionSystem) -> Option<usize> {
        let n = s.num_states();
        let mut r = vec![vec![false; n]; n];
        for e in s.edges() {
            r[e.src][e.dst] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if r[i][k] && r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
        let reach: Vec<bool> = (0..n).map(|v| v == s.initial() || r[s.initial()][v]).collect();
        let cyclic: Vec<bool> = (0..n).map(|v| r[v][v]).collect();
        let mut rep = Vec::new();
        for v in 0..n {
            if !reach[v] || !cyclic[v] {
                continue;
            }
            let comp: Vec<usize> = (0..n).filter(|&w| w == v || (r[v][w] && r[w][v])).collect();
            let inner = s.edges().iter().filter(|e| comp.contains(&e.src) && comp.contains(&e.dst)).count();
            if inner != comp.len() {
                return None;
            }
            if comp[0] == v {
                rep.push(v);
            }
        }
        let mut memo = vec![None; n];
        fn longest(v: usize, rep: &[usize], r: &[Vec<bool>], memo: &mut Vec<Option<usize>>) -> usize {
            if let Some(x) = memo[v] {
                return x;
            }
            let x = 1 + rep
                .iter()
                .filter(|&&w| r[v][w] && !r[w][v])
                .map(|&w| longest(w, rep, r, memo))
                .max()
                .unwrap_or(0);
            memo[v] = Some(x);
            x
        }
        Some(rep.iter().map(|&v| longest(v, &rep, &r, &mut memo)).max().unwrap_or(0).saturating_sub(1))
    }

    #[test]
    fn self_loop_has_rank_zero() {
        let s = sys(&["x"], &[("x", "a", "x")]);
        assert_eq!(cb_rank(&s).value, CBValue::Finite(0));
    }

    #[test]
    fn two_self_loops_are_infinite() {
        let s = sys(&["x"], &[("x", "a", "x"), ("x", "b", "x")]);
        let r = cb_rank(&s);
        assert_eq!(r.value, CBValue::Infinite);
        let CBWitness::TwoCycles { first, second, .. } = r.witness else { panic!() };
        assert_ne!(first, second);
    }

    #[test]
    fn cycle_reaching_cycle_is_one() {
        let s = sys(&["x", "y"], &[("x", "a", "x"), ("x", "a", "y"), ("y", "a", "y")]);
        let r = cb_rank(&s);
        assert_eq!(r.value, CBValue::Finite(1));
        assert_eq!(r.witness, CBWitness::Chain(vec![vec![0], vec![1]]));
        assert!(r.report(&s).starts_with("cb_rank: 1\n"));
    }

    #[test]
    fn unreachable_parts_ignored() {
        let s = sys(&["x", "y"], &[("x", "a", "x"), ("y", "a", "y"), ("y", "b", "y")]);
        assert_eq!(cb_rank(&s).value, CBValue::Finite(0));
    }

    #[test]
    fn agrees_with_closure_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=12);
            let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
            let mut edges = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if rng.gen_bool(if j > i { 0.25 } else { 0.06 }) {
                        edges.push((names[i].clone(), "a".to_owned(), names[j].clone()));
                    }
                }
            }
            let s = TransitionSystem::from_parts(names.iter().cloned(), &names[0], Vec::<(String, String)>::new(), edges)
                .unwrap();
            let expected = closure_oracle(&s).map_or(CBValue::Infinite, CBValue::Finite);
            assert_eq!(cb_rank(&s).value, expected, "{s}");
        }
    }
}
