use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::algebra::QuaternionAlgebra;
use super::lattice::Lattice;
use super::order::{is_isomorphic, left_order, neighbors, reduce_ideal, unit_count, EichlerOrder};
use crate::arith::residue::{factorize, is_prime};
use crate::error::{Error, Result};

/// Σ 1/|O_i^×| = ∏_{ℓ|N⁻}(ℓ-1)/24 · N⁺ ∏_{ℓ|N⁺}(1 + 1/ℓ).
pub fn eichler_mass(n_minus: u64, n_plus: u64) -> BigRational {
    let mut m = BigRational::new(BigInt::from(1), BigInt::from(24));
    for (l, _) in factorize(n_minus) {
        m *= BigRational::from_integer(BigInt::from(l - 1));
    }
    for (l, _) in factorize(n_plus) {
        m *= BigRational::from_integer(BigInt::from(l + 1));
    }
    m
}

/// Right-ideal classes of an Eichler order R, with R itself first.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassSet {
    order: EichlerOrder,
    ideals: Vec<Lattice>,
    left_orders: Vec<Lattice>,
    weights: Vec<u64>,
}

impl ClassSet {
    /// Breadth-first q-neighbor search from R with the least prime q ∤ N, stopping once the
    /// Eichler mass is exhausted.
    pub fn new(order: EichlerOrder) -> Self {
        let alg = order.algebra().clone();
        let n = order.conductor();
        let q = (2u64..).find(|&q| is_prime(q) && n % q != 0).expect("primes are infinite");
        let target = eichler_mass(alg.discriminant(), order.level());
        let r = order.lattice().clone();
        let mut cs = Self { order, ideals: Vec::new(), left_orders: Vec::new(), weights: Vec::new() };
        let mut mass = BigRational::zero();
        cs.push(&alg, r.clone(), &mut mass);
        let mut head = 0;
        while mass < target {
            let j = cs.ideals[head].clone();
            head += 1;
            for nb in neighbors(&alg, &r, &j, q) {
                if mass >= target {
                    break;
                }
                let known = cs.ideals.par_iter().any(|i| is_isomorphic(&alg, i, &nb));
                if !known {
                    cs.push(&alg, reduce_ideal(&alg, &nb), &mut mass);
                }
            }
        }
        debug_assert_eq!(mass, target);
        cs
    }

    fn push(&mut self, alg: &QuaternionAlgebra, i: Lattice, mass: &mut BigRational) {
        let o = left_order(alg, &i);
        let units = unit_count(alg, &o) as u64;
        *mass += BigRational::new(BigInt::from(1), BigInt::from(units));
        self.ideals.push(i);
        self.left_orders.push(o);
        self.weights.push(units / 2);
    }

    pub fn order(&self) -> &EichlerOrder {
        &self.order
    }

    pub fn algebra(&self) -> &QuaternionAlgebra {
        self.order.algebra()
    }

    pub fn len(&self) -> usize {
        self.ideals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ideals.is_empty()
    }

    pub fn ideals(&self) -> &[Lattice] {
        &self.ideals
    }

    pub fn left_orders(&self) -> &[Lattice] {
        &self.left_orders
    }

    /// w_i = |O_l(I_i)^×| / 2.
    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    /// Σ 1/(2 w_i).
    pub fn mass(&self) -> BigRational {
        self.weights.iter().map(|&w| BigRational::new(BigInt::from(1), BigInt::from(2 * w))).sum()
    }

    /// Index of the class of a right R-ideal. The class set is complete, so the last class
    /// is reached by elimination.
    pub fn classify(&self, j: &Lattice) -> usize {
        let alg = self.algebra();
        let h = self.len();
        (0..h - 1).find(|&i| is_isomorphic(alg, &self.ideals[i], j)).unwrap_or(h - 1)
    }

    /// The permutation b ↦ b·τ given by right multiplication with the two-sided ideal of
    /// norm N⁺ (identity when N⁺ = 1).
    pub fn atkin_lehner(&self) -> Vec<usize> {
        let h = self.len();
        let nplus = self.order.level();
        if nplus == 1 {
            return (0..h).collect();
        }
        let alg = self.algebra();
        let ideal = two_sided_ideal(alg, self.order.lattice(), nplus);
        (0..h).map(|i| self.classify(&self.ideals[i].product(&ideal, alg))).collect()
    }
}

/// {x ∈ R : ℓ | trd(x), ℓ | nrd(x) for all ℓ | N⁺}.
fn two_sided_ideal(alg: &QuaternionAlgebra, r: &Lattice, nplus: u64) -> Lattice {
    let mut out = r.clone();
    for (ell, _) in factorize(nplus) {
        let l = ell as i64;
        let mut gens = r.basis().iter().map(|e| super::algebra::q_scale(e, &BigRational::from_integer(l.into()))).collect::<Vec<_>>();
        for idx in 1..l.pow(4) {
            let c: Vec<i64> = (0..4).map(|k| (idx / l.pow(3 - k)) % l).collect();
            let x = r.element(&c);
            let t = alg.trd(&x).to_integer();
            let n = alg.nrd(&x).to_integer();
            if (t % BigInt::from(l)).is_zero() && (n % BigInt::from(l)).is_zero() {
                gens.push(x);
            }
        }
        out = out.intersection(&Lattice::from_generators(&gens).expect("full rank"));
    }
    out
}

/// T_q: entry (i, j) counts the q-neighbors of I_i in class j.
pub fn brandt_matrix(cs: &ClassSet, q: u64) -> Result<Vec<Vec<i64>>> {
    if !is_prime(q) || cs.order().conductor() % q == 0 {
        return Err(Error::BadPrime(q));
    }
    let alg = cs.algebra();
    let r = cs.order().lattice();
    let h = cs.len();
    let rows: Vec<Vec<i64>> = cs
        .ideals()
        .par_iter()
        .map(|i| {
            let mut row = vec![0i64; h];
            for nb in neighbors(alg, r, i, q) {
                row[cs.classify(&nb)] += 1;
            }
            row
        })
        .collect();
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class_set(d: u64, n_plus: u64) -> ClassSet {
        ClassSet::new(EichlerOrder::new(QuaternionAlgebra::new(d).unwrap(), n_plus).unwrap())
    }

    #[test]
    fn d11() {
        let cs = class_set(11, 1);
        assert_eq!(cs.len(), 2);
        assert_eq!(cs.weights(), &[2, 3]);
        assert_eq!(brandt_matrix(&cs, 2).unwrap(), vec![vec![1, 2], vec![3, 0]]);
        assert!(matches!(brandt_matrix(&cs, 11), Err(Error::BadPrime(11))));
    }

    #[test]
    fn hurwitz_single_class() {
        let cs = class_set(2, 1);
        assert_eq!(cs.len(), 1);
        assert_eq!(cs.weights(), &[12]);
        assert_eq!(brandt_matrix(&cs, 3).unwrap(), vec![vec![4]]);
    }

    #[test]
    fn level_structure() {
        let cs = class_set(2, 3);
        assert_eq!(cs.mass(), eichler_mass(2, 3));
        let tau = cs.atkin_lehner();
        let mut sorted = tau.clone();
        sorted.sort();
        assert_eq!(sorted, (0..cs.len()).collect::<Vec<_>>());
        let t5 = brandt_matrix(&cs, 5).unwrap();
        assert!(t5.iter().all(|r| r.iter().sum::<i64>() == 6));
    }
}
