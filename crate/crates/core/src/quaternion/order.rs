use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::algebra::{q_from_ints, q_scale, Quat, QuaternionAlgebra};
use super::enumerate::short_vectors;
use super::lattice::Lattice;
use crate::arith::residue::{factorize, gcd};
use crate::error::{Error, Result};

fn rat(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// An Eichler order of level N⁺ in the definite algebra of discriminant N⁻.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EichlerOrder {
    algebra: QuaternionAlgebra,
    lattice: Lattice,
    level: u64,
}

impl EichlerOrder {
    pub fn new(algebra: QuaternionAlgebra, n_plus: u64) -> Result<Self> {
        let d = algebra.discriminant();
        if n_plus == 0 || gcd(n_plus, d) != 1 {
            return Err(Error::NotCoprime { a: n_plus, b: d });
        }
        if factorize(n_plus).iter().any(|&(_, e)| e > 1) {
            return Err(Error::NotSquareFree(n_plus));
        }
        let max = maximal_order(&algebra);
        let mut r = max.clone();
        for (ell, _) in factorize(n_plus) {
            let j = norm_ell_ideal(&algebra, &max, ell);
            r = r.intersection(&left_order(&algebra, &j));
        }
        let order = Self { algebra, lattice: r, level: n_plus };
        debug_assert_eq!(order.lattice.reduced_discriminant(&order.algebra), rat((d * n_plus) as i64));
        Ok(order)
    }

    pub fn algebra(&self) -> &QuaternionAlgebra {
        &self.algebra
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    /// N = N⁻ N⁺.
    pub fn conductor(&self) -> u64 {
        self.level * self.algebra.discriminant()
    }

    pub fn reduced_discriminant(&self) -> BigRational {
        self.lattice.reduced_discriminant(&self.algebra)
    }
}

/// The ring generated by a lattice, if it stays a lattice of integral elements.
fn ring_closure(alg: &QuaternionAlgebra, start: &Lattice) -> Option<Lattice> {
    let mut l = start.clone();
    for _ in 0..8 {
        let next = l.sum(&l.product(&l, alg));
        if !next.basis().iter().all(|x| alg.is_integral(x)) {
            return None;
        }
        if next == l {
            return Some(l);
        }
        l = next;
    }
    None
}

/// A maximal order, grown from Z⟨1, i, j, k⟩ by adjoining integral elements x/ℓ.
pub fn maximal_order(alg: &QuaternionAlgebra) -> Lattice {
    let mut o = Lattice::from_generators(&[
        q_from_ints([1, 0, 0, 0]),
        q_from_ints([0, 1, 0, 0]),
        q_from_ints([0, 0, 1, 0]),
        q_from_ints([0, 0, 0, 1]),
    ])
    .expect("basis");
    let target = rat(alg.discriminant() as i64);
    'outer: loop {
        let d = o.reduced_discriminant(alg);
        if d == target {
            return o;
        }
        let excess = (d / &target).to_integer().to_u64().expect("integral index");
        let basis = o.basis();
        for (ell, _) in factorize(excess) {
            let l = ell as i64;
            let total = l.pow(4);
            for idx in 1..total {
                let c: Vec<i64> = (0..4).map(|k| (idx / l.pow(3 - k)) % l).collect();
                let mut x = super::algebra::q_zero();
                for (ck, e) in c.iter().zip(&basis) {
                    let s = q_scale(e, &BigRational::new(BigInt::from(*ck), BigInt::from(l)));
                    x = super::algebra::q_add(&x, &s);
                }
                if !alg.is_integral(&x) {
                    continue;
                }
                let mut gens = basis.clone();
                gens.push(x);
                let cand = Lattice::from_generators(&gens).expect("full rank");
                if let Some(bigger) = ring_closure(alg, &cand) {
                    if bigger != o {
                        o = bigger;
                        continue 'outer;
                    }
                }
            }
        }
        unreachable!("a non-maximal order has an integral overorder element");
    }
}

/// A right O-ideal xO + ℓO of reduced norm ℓ, for ℓ not dividing disc(O).
fn norm_ell_ideal(alg: &QuaternionAlgebra, o: &Lattice, ell: u64) -> Lattice {
    let l = ell as i64;
    let basis = o.basis();
    for idx in 1..l.pow(4) {
        let c: Vec<i64> = (0..4).map(|k| (idx / l.pow(3 - k)) % l).collect();
        let x = o.element(&c);
        let n = alg.nrd(&x).to_integer();
        if (n % BigInt::from(ell)).is_zero() {
            let mut gens: Vec<Quat> = basis.iter().map(|e| alg.mul(&x, e)).collect();
            gens.extend(basis.iter().map(|e| q_scale(e, &rat(l))));
            return Lattice::from_generators(&gens).expect("full rank");
        }
    }
    unreachable!("M_2(F_ℓ) has nonzero singular elements")
}

/// O_l(I) = I Ī / nrd(I) for a locally principal lattice I.
pub fn left_order(alg: &QuaternionAlgebra, i: &Lattice) -> Lattice {
    let n = i.norm(alg);
    i.product(&i.conjugate(), alg).scale(&n.recip())
}

/// O_r(I) = Ī I / nrd(I).
pub fn right_order(alg: &QuaternionAlgebra, i: &Lattice) -> Lattice {
    let n = i.norm(alg);
    i.conjugate().product(i, alg).scale(&n.recip())
}

/// Number of units (elements of reduced norm 1) of an order.
pub fn unit_count(alg: &QuaternionAlgebra, order: &Lattice) -> usize {
    short_vectors(&order.gram(alg), &BigRational::one()).len()
}

fn normalized_gram(alg: &QuaternionAlgebra, l: &Lattice, s: &BigRational) -> Vec<Vec<BigRational>> {
    l.gram(alg).into_iter().map(|r| r.into_iter().map(|x| x / s).collect()).collect()
}

/// Elements y ∈ J Ī with nrd(y) = nrd(J) nrd(I); any one gives J = (y / nrd(I)) I.
pub fn isomorphisms(alg: &QuaternionAlgebra, i: &Lattice, j: &Lattice) -> Vec<Quat> {
    let ni = i.norm(alg);
    let nj = j.norm(alg);
    let target = &ni * &nj;
    let p = j.product(&i.conjugate(), alg);
    let g = normalized_gram(alg, &p, &target);
    short_vectors(&g, &BigRational::one())
        .into_iter()
        .filter(|(_, v)| v.is_one())
        .map(|(x, _)| p.element(&x))
        .collect()
}

/// Right-ideal isomorphism test: J = yI for some y ∈ B^×.
pub fn is_isomorphic(alg: &QuaternionAlgebra, i: &Lattice, j: &Lattice) -> bool {
    let ni = i.norm(alg);
    let nj = j.norm(alg);
    let target = &ni * &nj;
    let p = j.product(&i.conjugate(), alg);
    let g = normalized_gram(alg, &p, &target);
    short_vectors(&g, &BigRational::one()).iter().any(|(_, v)| v.is_one())
}

/// An isomorphic integral right ideal of least norm: x̄ J / nrd(J) for a shortest x ∈ J.
pub fn reduce_ideal(alg: &QuaternionAlgebra, j: &Lattice) -> Lattice {
    let n = j.norm(alg);
    let g = normalized_gram(alg, j, &n);
    let mut bound = BigRational::one();
    loop {
        let mut vs = short_vectors(&g, &bound);
        if !vs.is_empty() {
            vs.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
            let x = j.element(&vs[0].0);
            let y = q_scale(&super::algebra::q_conj(&x), &n.recip());
            let gens: Vec<Quat> = j.basis().iter().map(|e| alg.mul(&y, e)).collect();
            return Lattice::from_generators(&gens).expect("invertible multiplier");
        }
        bound = bound * rat(2);
    }
}

/// The q+1 right R-ideals J' ⊂ J with nrd(J') = q·nrd(J) (q ∤ disc R), in a fixed order.
pub fn neighbors(alg: &QuaternionAlgebra, r: &Lattice, j: &Lattice, q: u64) -> Vec<Lattice> {
    let qi = q as i64;
    let n = j.norm(alg);
    let jb = j.basis();
    let rb = r.basis();
    // Q_J(x) = nrd(x)/nrd(J) on coordinates, integral
    let mut diag = [0i64; 4];
    let mut off = [[0i64; 4]; 4];
    for a in 0..4 {
        diag[a] = (alg.nrd(&jb[a]) / &n).to_integer().mod_floor_i64(qi);
        for b in a + 1..4 {
            off[a][b] = (alg.inner(&jb[a], &jb[b]) * rat(2) / &n).to_integer().mod_floor_i64(qi);
        }
    }
    // coordinates of e_a r_k in the J basis
    let mut m = vec![vec![[0i64; 4]; 4]; 4];
    for a in 0..4 {
        for k in 0..4 {
            let c = j.coordinates(&alg.mul(&jb[a], &rb[k]));
            for t in 0..4 {
                m[a][k][t] = c[t].to_integer().mod_floor_i64(qi);
            }
        }
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for c in projective_points(qi) {
        let mut v = 0i64;
        for a in 0..4 {
            v += diag[a] * c[a] * c[a] % qi;
            for b in a + 1..4 {
                v += off[a][b] * c[a] * c[b] % qi;
            }
        }
        if v % qi != 0 {
            continue;
        }
        let rows: Vec<Vec<i64>> = (0..4)
            .map(|k| (0..4).map(|t| (0..4).map(|a| c[a] * m[a][k][t]).sum::<i64>().rem_euclid(qi)).collect())
            .collect();
        let key = rref_mod(rows, qi);
        if !seen.insert(key.clone()) {
            continue;
        }
        let mut gens: Vec<Quat> = jb.iter().map(|e| q_scale(e, &rat(qi))).collect();
        for row in &key {
            gens.push(j.element(row));
        }
        let nb = Lattice::from_generators(&gens).expect("full rank");
        debug_assert_eq!(nb.norm(alg), &n * rat(qi));
        out.push(nb);
    }
    out
}

trait ModFloorI64 {
    fn mod_floor_i64(&self, m: i64) -> i64;
}

impl ModFloorI64 for BigInt {
    fn mod_floor_i64(&self, m: i64) -> i64 {
        use num_integer::Integer;
        self.mod_floor(&BigInt::from(m)).to_i64().expect("reduced")
    }
}

/// Points of P³(F_q) with first nonzero coordinate 1.
fn projective_points(q: i64) -> Vec<[i64; 4]> {
    let mut out = Vec::new();
    for lead in 0..4 {
        let free = 3 - lead;
        for idx in 0..q.pow(free as u32) {
            let mut c = [0i64; 4];
            c[lead] = 1;
            let mut r = idx;
            for t in (lead + 1..4).rev() {
                c[t] = r % q;
                r /= q;
            }
            out.push(c);
        }
    }
    out
}

fn inv_mod(a: i64, q: i64) -> i64 {
    let (_, x, _) = crate::arith::residue::egcd(a as i128, q as i128);
    (x.rem_euclid(q as i128)) as i64
}

/// Reduced row echelon form over F_q, nonzero rows only.
fn rref_mod(mut rows: Vec<Vec<i64>>, q: i64) -> Vec<Vec<i64>> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][col] != 0) else { continue };
        rows.swap(r, p);
        let inv = inv_mod(rows[r][col], q);
        for v in rows[r].iter_mut() {
            *v = *v * inv % q;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][col] != 0 {
                let f = rows[i][col];
                let pr = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(pr) {
                    *x = (*x - f * y).rem_euclid(q);
                }
            }
        }
        r += 1;
    }
    rows.truncate(r);
    rows
}

/// Least c ≥ 1 with c·x in the order (for x integral over Z).
pub fn conductor_in(order: &Lattice, x: &Quat) -> u64 {
    order
        .coordinates(x)
        .iter()
        .fold(BigInt::one(), |acc, c| num_integer::Integer::lcm(&acc, c.denom()))
        .to_u64()
        .expect("small conductor")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half(x: [i64; 4]) -> Quat {
        q_from_ints(x).map(|c| c / rat(2))
    }

    #[test]
    fn maximal_order_d11() {
        let alg = QuaternionAlgebra::new(11).unwrap();
        let o = EichlerOrder::new(alg.clone(), 1).unwrap();
        let expect = Lattice::from_generators(&[
            q_from_ints([1, 0, 0, 0]),
            q_from_ints([0, 1, 0, 0]),
            half([1, 0, 1, 0]),
            half([0, 1, 0, 1]),
        ])
        .unwrap();
        assert_eq!(o.lattice(), &expect);
        assert_eq!(o.reduced_discriminant(), rat(11));
        assert_eq!(unit_count(&alg, o.lattice()), 4);
    }

    #[test]
    fn hurwitz() {
        let alg = QuaternionAlgebra::new(2).unwrap();
        let o = EichlerOrder::new(alg.clone(), 1).unwrap();
        assert!(o.lattice().contains(&half([1, 1, 1, 1])));
        assert_eq!(unit_count(&alg, o.lattice()), 24);
    }

    #[test]
    fn eichler_levels() {
        let alg = QuaternionAlgebra::new(11).unwrap();
        assert!(matches!(EichlerOrder::new(alg.clone(), 22), Err(Error::NotCoprime { .. })));
        for n_plus in [2u64, 3, 6] {
            let r = EichlerOrder::new(alg.clone(), n_plus).unwrap();
            assert_eq!(r.reduced_discriminant(), rat(11 * n_plus as i64));
            let prod = r.lattice().product(r.lattice(), &alg);
            assert_eq!(&prod, r.lattice());
        }
    }

    #[test]
    fn neighbors_count_and_norm() {
        let alg = QuaternionAlgebra::new(11).unwrap();
        let o = EichlerOrder::new(alg.clone(), 1).unwrap();
        for q in [2u64, 3, 5] {
            let nb = neighbors(&alg, o.lattice(), o.lattice(), q);
            assert_eq!(nb.len(), q as usize + 1);
            for j in &nb {
                assert_eq!(j.norm(&alg), rat(q as i64));
                assert_eq!(&right_order(&alg, j), o.lattice());
                let red = reduce_ideal(&alg, j);
                assert!(is_isomorphic(&alg, j, &red));
            }
        }
    }
}
