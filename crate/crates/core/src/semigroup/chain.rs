//! Lasso types and witness chains between lassos of equal weak type.

use std::fmt;

use crate::bisim::bisimilar;
use crate::error::{Error, Result};
use crate::lasso::Lasso;
use crate::mso::{equiv_m_with, path_theory_with, Guards, TypeId};
use crate::path::PointedPath;
use crate::semigroup::algebra::{PathAlgebra, TypePair};
use crate::system::TransitionSystem;

/// Kind of a chain link.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Link {
    Bisim,
    EquivM,
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Link::Bisim => "BISIM",
            Link::EquivM => "EQUIV_M",
        })
    }
}

/// `S_0 ~ S_1 ≡_m S_2 ...`: consecutive systems are bisimilar or
/// `≡_m`-equivalent, as tagged.
#[derive(Clone, Debug)]
pub struct WitnessChain {
    pub rank: usize,
    pub systems: Vec<TransitionSystem>,
    pub links: Vec<Link>,
    /// Set when a conjugacy witness used a length-0 path.
    pub unit_witness: bool,
}

impl WitnessChain {
    pub fn new(rank: usize, first: TransitionSystem) -> Self {
        WitnessChain { rank, systems: vec![first], links: Vec::new(), unit_witness: false }
    }

    pub fn push(&mut self, link: Link, s: TransitionSystem) {
        self.links.push(link);
        self.systems.push(s);
    }

    pub fn first(&self) -> &TransitionSystem {
        &self.systems[0]
    }

    pub fn last(&self) -> &TransitionSystem {
        self.systems.last().expect("chain is never empty")
    }

    /// Appends `other`, whose first system must be this chain's last.
    pub fn extend(&mut self, other: WitnessChain) {
        debug_assert!(self.last() == other.first() || self.last().is_isomorphic(other.first()));
        self.unit_witness |= other.unit_witness;
        for (l, s) in other.links.into_iter().zip(other.systems.into_iter().skip(1)) {
            self.push(l, s);
        }
    }

    pub fn reversed(mut self) -> WitnessChain {
        self.systems.reverse();
        self.links.reverse();
        self
    }

    /// Checks every link; the error names the first one that fails.
    pub fn check(&self, guards: &Guards) -> Result<()> {
        if self.links.len() + 1 != self.systems.len() {
            return Err(Error::VerifyFailed("chain has the wrong number of links".into()));
        }
        for (i, l) in self.links.iter().enumerate() {
            let (a, b) = (&self.systems[i], &self.systems[i + 1]);
            let ok = match l {
                Link::Bisim => bisimilar(a, b).is_bisimilar(),
                Link::EquivM => equiv_m_with(a, b, self.rank, guards)?,
            };
            if !ok {
                return Err(Error::VerifyFailed(format!("link {i} ({l}) does not hold")));
            }
        }
        Ok(())
    }
}

/// True iff every link holds as tagged (guard errors count as failures).
pub fn verify_chain(chain: &WitnessChain) -> bool {
    chain.check(&Guards::default()).is_ok()
}

/// `⟨type(tail•), type(loop•)⟩`.
pub fn strong_type(l: &Lasso, m: usize) -> Result<(TypeId, TypeId)> {
    strong_type_with(l, m, &Guards::default())
}

pub fn strong_type_with(l: &Lasso, m: usize, guards: &Guards) -> Result<(TypeId, TypeId)> {
    Ok((path_theory_with(l.tail(), m, guards)?, path_theory_with(l.loop_path(), m, guards)?))
}

/// Factorization type of the branch `u v v v ...`.
pub fn branch_type(u: &PointedPath, v: &PointedPath, m: usize) -> Result<(TypeId, TypeId)> {
    if v.is_empty() || v.first_color() != v.last_color() {
        return Err(Error::NotComposable(format!("`{v}` cannot be repeated")));
    }
    if u.last_color() != v.first_color() {
        return Err(Error::NotComposable(format!("`{u}` does not end where `{v}` starts")));
    }
    Ok((path_theory(u, m)?, path_theory(v, m)?))
}

fn path_theory(p: &PointedPath, m: usize) -> Result<TypeId> {
    path_theory_with(p, m, &Guards::default())
}

impl PathAlgebra {
    /// Strong type of a lasso as a pair of elements.
    pub fn strong_pair(&self, l: &Lasso) -> Result<TypePair> {
        Ok(TypePair { alpha: self.element_of_path(l.tail())?, beta: self.element_of_path(l.loop_path())? })
    }

    /// Conjugacy class id of the lasso's strong type.
    pub fn weak_type(&self, l: &Lasso) -> Result<usize> {
        self.class_of(self.strong_pair(l)?)
    }

    /// The chain `L0 ~ M0 ≡ N0 ~ N1 ≡ M1 ~ L1` with `M_i = (A_i B_i^k, B_i^k)`
    /// for `k = π(β_i)`, `N0 = (A0 B0^k, C D)` and `N1 = (A0 B0^k C, D C)`
    /// where `C`, `D` represent a conjugacy witness. Every link is checked.
    /// Equal lassos give the one-system chain.
    pub fn witness_chain(&self, l0: &Lasso, l1: &Lasso, guards: &Guards) -> Result<WitnessChain> {
        let p0 = self.strong_pair(l0)?;
        let p1 = self.strong_pair(l1)?;
        if l0 == l1 {
            return Ok(WitnessChain::new(self.rank(), l0.to_system()));
        }
        let (xi, eta) = self.conjugate(p0, p1)?.ok_or_else(|| {
            Error::Precondition(format!(
                "weak types differ: ⟨e{},e{}⟩ and ⟨e{},e{}⟩ are not conjugate",
                p0.alpha, p0.beta, p1.alpha, p1.beta
            ))
        })?;
        let (_, k0) = self.idempotent_power(p0.beta)?;
        let (_, k1) = self.idempotent_power(p1.beta)?;
        let m_of = |l: &Lasso, k: usize| -> Result<Lasso> {
            let bk = l.loop_path().power(k)?;
            Lasso::new(l.tail().concat(&bk)?, bk)
        };
        let m0 = m_of(l0, k0)?;
        let m1 = m_of(l1, k1)?;
        let c = self.representative(xi);
        let d = self.representative(eta);
        let n0 = Lasso::new(m0.tail().clone(), c.concat(d)?)?;
        let n1 = Lasso::new(m0.tail().concat(c)?, d.concat(c)?)?;
        let mut chain = WitnessChain::new(self.rank(), l0.to_system());
        chain.unit_witness = self.is_unit(xi) || self.is_unit(eta);
        chain.push(Link::Bisim, m0.to_system());
        chain.push(Link::EquivM, n0.to_system());
        chain.push(Link::Bisim, n1.to_system());
        chain.push(Link::EquivM, m1.to_system());
        chain.push(Link::Bisim, l1.to_system());
        chain.check(guards)?;
        Ok(chain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::Signature;

    fn lasso(tail: &[&str], lp: &[&str]) -> Lasso {
        Lasso::new(PointedPath::word(tail), PointedPath::word(lp)).unwrap()
    }

    fn alg() -> PathAlgebra {
        PathAlgebra::build(&Signature::new(&["a", "b"], &[] as &[&str]), 1).unwrap()
    }

    #[test]
    fn degenerate_chain() {
        let a = alg();
        let l = lasso(&["a"], &["b"]);
        let c = a.witness_chain(&l, &l, &Guards::default()).unwrap();
        assert_eq!(c.systems.len(), 1);
        assert!(verify_chain(&c));
        let c = a.witness_chain(&l, &l.unroll(2), &Guards::default()).unwrap();
        assert_eq!(c.systems.len(), 6);
        assert!(verify_chain(&c));
    }

    #[test]
    fn tail_absorbing_loop() {
        let a = alg();
        let l0 = lasso(&["a"], &["b", "a"]);
        let l1 = lasso(&["a", "b", "a"], &["b", "a"]);
        assert_eq!(a.weak_type(&l0).unwrap(), a.weak_type(&l1).unwrap());
        let c = a.witness_chain(&l0, &l1, &Guards::default()).unwrap();
        assert!(verify_chain(&c));
    }

    #[test]
    fn wrong_tag_fails() {
        let l0 = lasso(&[], &["a"]);
        let l1 = lasso(&[], &["a", "a"]);
        let mut c = WitnessChain::new(1, l0.to_system());
        c.push(Link::EquivM, l1.to_system());
        assert!(!verify_chain(&c));
        let mut ok = WitnessChain::new(1, l0.to_system());
        ok.push(Link::Bisim, l1.to_system());
        assert!(verify_chain(&ok));
        assert!(verify_chain(&WitnessChain::new(1, l0.to_system())));
    }

    #[test]
    fn unequal_weak_types_rejected() {
        let a = alg();
        let r = a.witness_chain(&lasso(&[], &["a"]), &lasso(&[], &["b"]), &Guards::default());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn branch_type_of_unit_tail() {
        let (u, v) = branch_type(&PointedPath::unit(None), &PointedPath::word(&["a"]), 1).unwrap();
        assert_eq!(u, path_theory(&PointedPath::unit(None), 1).unwrap());
        assert_eq!(v, path_theory(&PointedPath::word(&["a"]), 1).unwrap());
        assert!(branch_type(&PointedPath::unit(None), &PointedPath::unit(None), 1).is_err());
    }
}
