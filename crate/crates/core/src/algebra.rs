//! Finite commutative Z/p^n-algebras used as coefficient rings for presentations, and the
//! quotient maps between them.

use serde::{Deserialize, Serialize};

use crate::arith::cyclotomic::CyclotomicFactorRing;
use crate::arith::residue::{gcd, ResidueRing};
use crate::error::{Error, Result};
use crate::group_ring::{Character, CoeffRing, GroupRing, IsotypicDecomposition};

/// A finite commutative algebra that is free over Z/p^n. Elements are flat coefficient
/// vectors of length `dim()`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algebra {
    Residue(ResidueRing),
    Cyclotomic(CyclotomicFactorRing),
    GroupRing(GroupRing),
}

impl From<CoeffRing> for Algebra {
    fn from(c: CoeffRing) -> Self {
        match c {
            CoeffRing::Residue(r) => Algebra::Residue(r),
            CoeffRing::Cyclotomic(f) => Algebra::Cyclotomic(f),
        }
    }
}

impl Algebra {
    pub fn base(&self) -> &ResidueRing {
        match self {
            Algebra::Residue(r) => r,
            Algebra::Cyclotomic(f) => f.base(),
            Algebra::GroupRing(g) => g.base(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Algebra::Residue(_) => 1,
            Algebra::Cyclotomic(f) => f.degree(),
            Algebra::GroupRing(g) => g.dim(),
        }
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.dim()]
    }

    pub fn one(&self) -> Vec<u64> {
        let mut v = self.zero();
        v[0] = 1;
        v
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let r = self.base();
        a.iter().zip(b).map(|(&x, &y)| r.add(x, y)).collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let r = self.base();
        a.iter().zip(b).map(|(&x, &y)| r.sub(x, y)).collect()
    }

    pub fn neg(&self, a: &[u64]) -> Vec<u64> {
        let r = self.base();
        a.iter().map(|&x| r.neg(x)).collect()
    }

    pub fn scale_int(&self, a: &[u64], s: u64) -> Vec<u64> {
        let r = self.base();
        a.iter().map(|&x| r.mul(x, s)).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        match self {
            Algebra::Residue(r) => vec![r.mul(a[0], b[0])],
            Algebra::Cyclotomic(f) => f.mul(a, b),
            Algebra::GroupRing(g) => {
                let x = g.from_flat(a.to_vec()).expect("dimension");
                let y = g.from_flat(b.to_vec()).expect("dimension");
                x.mul(&y).expect("same ring").flat().to_vec()
            }
        }
    }

    /// A Z/p^n-basis of the algebra; the additive span of {g·b} over generators g and basis
    /// elements b is the ideal generated by the g.
    pub fn basis(&self) -> Vec<Vec<u64>> {
        (0..self.dim())
            .map(|k| {
                let mut v = self.zero();
                v[k] = 1;
                v
            })
            .collect()
    }

    /// Random element, for tests and self-checks.
    pub fn element_from_fn(&self, mut f: impl FnMut() -> u64) -> Vec<u64> {
        let q = self.base().modulus();
        (0..self.dim()).map(|_| f() % q).collect()
    }

    /// Truncation of the coefficient modulus to p^k.
    pub fn truncate(&self, k: u32) -> Result<Algebra> {
        let base = self.base().truncate(k)?;
        Ok(match self {
            Algebra::Residue(_) => Algebra::Residue(base),
            Algebra::Cyclotomic(f) => Algebra::Cyclotomic(truncate_factor(f, base)?),
            Algebra::GroupRing(g) => {
                let coeffs = match g.coeffs() {
                    CoeffRing::Residue(_) => CoeffRing::Residue(base),
                    CoeffRing::Cyclotomic(f) => CoeffRing::Cyclotomic(truncate_factor(f, base)?),
                };
                Algebra::GroupRing(GroupRing::new(g.order(), coeffs)?)
            }
        })
    }
}

fn truncate_factor(f: &CyclotomicFactorRing, base: ResidueRing) -> Result<CyclotomicFactorRing> {
    CyclotomicFactorRing::new(base, f.modulus_poly().to_vec(), f.cyclic_order())
}

/// A surjective algebra map used for base change.
#[derive(Clone, Debug)]
pub enum QuotientMap {
    Identity,
    /// Reduction of coefficients modulo p^k.
    ReduceCoeffs(u32),
    /// Group-ring projection Γ_m → Γ_{m''}.
    Project(usize),
    /// Character evaluation into the character's target ring.
    Character(Character),
    /// Projection onto the i-th isotypic component of Z/p^n[Γ_{m'p^r}].
    Isotypic(Box<IsotypicDecomposition>, usize),
}

impl QuotientMap {
    /// The quotient by the ideal (γ^k - 1) of R[Γ_m], which is R[Γ_{gcd(m,k)}].
    pub fn gamma_power(m: usize, k: usize) -> Self {
        QuotientMap::Project(gcd(m as u64, k as u64) as usize)
    }

    pub fn target(&self, source: &Algebra) -> Result<Algebra> {
        match (self, source) {
            (QuotientMap::Identity, _) => Ok(source.clone()),
            (QuotientMap::ReduceCoeffs(k), _) => source.truncate(*k),
            (QuotientMap::Project(t), Algebra::GroupRing(g)) => {
                if *t == 0 || g.order() % t != 0 {
                    return Err(Error::NotDivisor { divisor: *t, order: g.order() });
                }
                Ok(Algebra::GroupRing(g.with_order(*t)?))
            }
            (QuotientMap::Character(chi), Algebra::GroupRing(g)) => {
                if chi.order() != g.order() {
                    return Err(Error::MismatchedGroup);
                }
                Ok(chi.target().clone().into())
            }
            (QuotientMap::Isotypic(d, i), Algebra::GroupRing(g)) => {
                let f = d.factors().get(*i).ok_or(Error::MismatchedGroup)?;
                if g.order() != d.m_prime() * d.p_power() {
                    return Err(Error::MismatchedGroup);
                }
                Ok(Algebra::GroupRing(GroupRing::new(d.p_power(), CoeffRing::Cyclotomic(f.clone()))?))
            }
            (q, a) => Err(Error::UnsupportedQuotient(format!("{q:?} on {a:?}"))),
        }
    }

    pub fn apply(&self, source: &Algebra, x: &[u64]) -> Result<Vec<u64>> {
        match (self, source) {
            (QuotientMap::Identity, _) => Ok(x.to_vec()),
            (QuotientMap::ReduceCoeffs(k), _) => {
                let q = source.base().truncate(*k)?.modulus();
                Ok(x.iter().map(|&c| c % q).collect())
            }
            (QuotientMap::Project(t), Algebra::GroupRing(g)) => {
                Ok(g.from_flat(x.to_vec())?.project(*t)?.flat().to_vec())
            }
            (QuotientMap::Character(chi), Algebra::GroupRing(g)) => chi.eval(&g.from_flat(x.to_vec())?),
            (QuotientMap::Isotypic(d, i), Algebra::GroupRing(g)) => {
                let parts = d.split(&g.from_flat(x.to_vec())?)?;
                Ok(parts[*i].flat().to_vec())
            }
            (q, a) => Err(Error::UnsupportedQuotient(format!("{q:?} on {a:?}"))),
        }
    }
}
