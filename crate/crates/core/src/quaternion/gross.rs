use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::algebra::{q_add, q_scalar, q_scale, Quat};
use super::classset::ClassSet;
use super::enumerate::short_vectors;
use super::lattice::Lattice;
use super::order::{conductor_in, left_order, neighbors};
use crate::arith::residue::{factorize, gcd};
use crate::error::{Error, Result};
use crate::quadratic::{splitting_type, QuadForm, RingClassGroup, SplittingType};

fn rat(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// One Gross point ψ(𝔞)J indexed by a class [𝔞] of Pic(O_{m_0}).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrossPoint {
    pub form: QuadForm,
    pub class_index: usize,
}

/// Optimal embeddings of O_{m_0} transported by Pic(O_{m_0}).
///
/// ψ is fixed by X = ψ(ω), ω = (δ + √d_K)/2. The base ideal J has X's conductor in O_l(J)
/// equal to m_0, and [𝔞] acts by J ↦ ψ(𝔞)J = aJ + ψ(β)J for 𝔞 = [a, β].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrossPointFamily {
    d_k: i64,
    m0: u64,
    omega: Quat,
    base: Lattice,
    points: Vec<GrossPoint>,
}

fn delta(d_k: i64) -> i64 {
    d_k.rem_euclid(2)
}

impl GrossPointFamily {
    /// Walks the primes of m_0 in increasing order.
    pub fn new(cs: &ClassSet, d_k: i64, m0: u64) -> Result<Self> {
        let mut steps = Vec::new();
        for (l, e) in factorize(m0) {
            steps.extend(std::iter::repeat(l).take(e as usize));
        }
        Self::with_walk(cs, d_k, &steps)
    }

    /// Builds the conductor-1 point, then takes one neighbor step per entry of `walk`,
    /// raising the conductor by that prime each time. Families sharing a walk prefix share
    /// their base points along it.
    pub fn with_walk(cs: &ClassSet, d_k: i64, walk: &[u64]) -> Result<Self> {
        let alg = cs.algebra();
        let n = cs.order().conductor();
        for (l, _) in factorize(alg.discriminant()) {
            if splitting_type(d_k, l) == SplittingType::Split {
                return Err(Error::NoEmbedding(format!("{l} divides N- and splits in K")));
            }
        }
        for (l, _) in factorize(cs.order().level()) {
            if splitting_type(d_k, l) == SplittingType::Inert {
                return Err(Error::NoEmbedding(format!("{l} divides N+ and is inert in K")));
            }
        }
        let m0: u64 = walk.iter().product();
        if gcd(m0, n) != 1 {
            return Err(Error::NotCoprime { a: m0, b: n });
        }
        let (omega, mut j) = base_embedding(cs, d_k)?;
        let mut cond = 1u64;
        let r = cs.order().lattice();
        for &l in walk {
            let next = neighbors(alg, r, &j, l)
                .into_iter()
                .find(|nb| conductor_in(&left_order(alg, nb), &omega) == cond * l)
                .ok_or(Error::NoEmbedding(format!("no neighbor of conductor {}", cond * l)))?;
            j = next;
            cond *= l;
        }
        let group = RingClassGroup::new(d_k, m0)?;
        let mut fam = Self { d_k, m0, omega, base: j, points: Vec::new() };
        let points: Vec<Result<GrossPoint>> = group
            .elements()
            .par_iter()
            .map(|f| {
                let jf = fam.act(cs, f, &fam.base);
                let c = conductor_in(&left_order(alg, &jf), &fam.omega);
                if c != m0 {
                    return Err(Error::Invalid(format!("Gross point {f} has conductor {c}, expected {m0}")));
                }
                Ok(GrossPoint { form: *f, class_index: cs.classify(&jf) })
            })
            .collect();
        fam.points = points.into_iter().collect::<Result<_>>()?;
        Ok(fam)
    }

    pub fn d_k(&self) -> i64 {
        self.d_k
    }

    pub fn m0(&self) -> u64 {
        self.m0
    }

    /// X = ψ(ω).
    pub fn omega(&self) -> &Quat {
        &self.omega
    }

    /// ψ(m_0 ω), the image of the generator of O_{m_0}, with trace and norm.
    pub fn generator(&self, cs: &ClassSet) -> (Quat, BigInt, BigInt) {
        let x = q_scale(&self.omega, &rat(self.m0 as i64));
        let alg = cs.algebra();
        let t = alg.trd(&x).to_integer();
        let n = alg.nrd(&x).to_integer();
        (x, t, n)
    }

    pub fn base(&self) -> &Lattice {
        &self.base
    }

    /// Points in the order of the reduced forms of discriminant m_0² d_K.
    pub fn points(&self) -> &[GrossPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn class_of(&self, f: &QuadForm) -> Option<usize> {
        let f = f.reduce();
        self.points.iter().find(|p| p.form == f).map(|p| p.class_index)
    }

    /// ψ(𝔞)J for 𝔞 = [a, (-b + √D)/2], D = m_0² d_K.
    pub fn act(&self, cs: &ClassSet, f: &QuadForm, j: &Lattice) -> Lattice {
        let alg = cs.algebra();
        let m0 = self.m0 as i64;
        // (-b + m_0 (2X - δ))/2 = (-b - m_0 δ)/2 + m_0 X
        let shift = (-f.b - m0 * delta(self.d_k)) / 2;
        let beta = q_add(&q_scalar(rat(shift)), &q_scale(&self.omega, &rat(m0)));
        let mut gens: Vec<Quat> = j.basis().iter().map(|e| q_scale(e, &rat(f.a))).collect();
        gens.extend(j.basis().iter().map(|e| alg.mul(&beta, e)));
        Lattice::from_generators(&gens).expect("full rank")
    }
}

/// The first class (in class-set order) whose left order contains an element with the
/// trace and norm of ω, and that element.
fn base_embedding(cs: &ClassSet, d_k: i64) -> Result<(Quat, Lattice)> {
    let alg = cs.algebra();
    let t = rat(delta(d_k));
    let nrm = rat((delta(d_k) - d_k) / 4);
    for (i, o) in cs.left_orders().iter().enumerate() {
        let mut found: Vec<Vec<i64>> = short_vectors(&o.gram(alg), &nrm)
            .into_iter()
            .filter(|(x, v)| *v == nrm && alg.trd(&o.element(x)) == t)
            .map(|(x, _)| x)
            .collect();
        found.sort();
        if let Some(x) = found.first() {
            return Ok((o.element(x), cs.ideals()[i].clone()));
        }
    }
    Err(Error::NoEmbedding(format!("no optimal embedding of O_K for d_K = {d_k}")))
}

#[cfg(test)]
mod tests {
    use super::super::algebra::QuaternionAlgebra;
    use super::super::order::EichlerOrder;
    use super::*;
    use crate::quadratic::compose;

    fn d11() -> ClassSet {
        ClassSet::new(EichlerOrder::new(QuaternionAlgebra::new(11).unwrap(), 1).unwrap())
    }

    #[test]
    fn conductor_one() {
        let cs = d11();
        let fam = GrossPointFamily::new(&cs, -20, 1).unwrap();
        assert_eq!(fam.len(), 2);
        let (x, t, n) = fam.generator(&cs);
        let alg = cs.algebra();
        let lhs = q_add(&alg.mul(&x, &x), &q_add(&q_scale(&x, &BigRational::from_integer(-t.clone())), &q_scalar(BigRational::from_integer(n.clone()))));
        assert!(super::super::algebra::q_is_zero(&lhs));
        assert_eq!(&t * &t - BigInt::from(4) * &n, BigInt::from(-20));
        assert!(matches!(GrossPointFamily::new(&cs, -7, 1), Err(Error::NoEmbedding(_))));
    }

    #[test]
    fn action_is_a_group_action() {
        let cs = d11();
        let fam = GrossPointFamily::new(&cs, -20, 7).unwrap();
        assert_eq!(fam.len(), 12);
        let g = RingClassGroup::new(-20, 7).unwrap();
        let els = g.elements();
        for a in els.iter().take(4) {
            for b in els.iter().skip(3).take(4) {
                let ab = compose(a, b).unwrap();
                let lhs = fam.act(&cs, a, &fam.act(&cs, b, fam.base()));
                assert_eq!(cs.classify(&lhs), fam.class_of(&ab).unwrap());
            }
        }
    }
}
