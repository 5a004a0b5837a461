use std::fmt;

use serde::{Deserialize, Serialize};

use super::poly::{self, Poly};
use super::residue::{gcd, ResidueRing};
use crate::error::{Error, Result};

/// Orbits of multiplication by `p` on Z/m'Z, each listed in orbit order starting from its
/// smallest element; orbits are sorted by that element.
pub fn cyclotomic_cosets(m: u64, p: u64) -> Result<Vec<Vec<u64>>> {
    if m == 0 || gcd(m, p) != 1 {
        return Err(Error::NotCoprime { a: m, b: p });
    }
    let mut seen = vec![false; m as usize];
    let mut out = Vec::new();
    for start in 0..m {
        if seen[start as usize] {
            continue;
        }
        let mut orbit = Vec::new();
        let mut x = start;
        while !seen[x as usize] {
            seen[x as usize] = true;
            orbit.push(x);
            x = ((x as u128 * p as u128) % m as u128) as u64;
        }
        out.push(orbit);
    }
    Ok(out)
}

/// Z/p^n[X]/(g) for a monic Hensel-lifted irreducible factor g of X^{m'} - 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CyclotomicFactorRing {
    base: ResidueRing,
    modulus_poly: Poly,
    m: u64,
}

impl CyclotomicFactorRing {
    fn new_unchecked(base: ResidueRing, g: Poly, m: u64) -> Self {
        Self { base, modulus_poly: g, m }
    }

    /// Builds the ring after checking that `g` is monic and divides X^{m'} - 1 over the base.
    pub fn new(base: ResidueRing, g: Poly, m: u64) -> Result<Self> {
        let g = poly::reduce_coeffs(&base, &g);
        if g.last() != Some(&1) {
            return Err(Error::Invalid("factor must be monic".into()));
        }
        if gcd(m, base.p()) != 1 {
            return Err(Error::NotCoprime { a: m, b: base.p() });
        }
        let mut xm = vec![0u64; m as usize + 1];
        xm[0] = base.neg(1);
        xm[m as usize] = 1;
        let r = poly::rem(&base, &xm, &g)?;
        if !r.is_empty() {
            return Err(Error::Invalid("factor does not divide X^m - 1".into()));
        }
        Ok(Self::new_unchecked(base, g, m))
    }

    pub fn base(&self) -> &ResidueRing {
        &self.base
    }

    pub fn modulus_poly(&self) -> &[u64] {
        &self.modulus_poly
    }

    pub fn degree(&self) -> usize {
        self.modulus_poly.len() - 1
    }

    /// The m' for which the defining factor divides X^{m'} - 1.
    pub fn cyclic_order(&self) -> u64 {
        self.m
    }

    /// Multiplicative order of the class of X, i.e. the order of the characters in this class.
    pub fn root_order(&self) -> u64 {
        let x = self.generator();
        let one = self.one();
        let mut cur = x.clone();
        let mut k = 1;
        while cur != one {
            cur = self.mul(&cur, &x);
            k += 1;
        }
        k
    }

    /// Pads a polynomial into a length-`degree` coefficient vector after reduction.
    pub fn element(&self, a: &[u64]) -> Vec<u64> {
        let mut r = poly::rem(&self.base, &poly::reduce_coeffs(&self.base, a), &self.modulus_poly)
            .expect("monic modulus");
        r.resize(self.degree(), 0);
        r
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.degree()]
    }

    pub fn one(&self) -> Vec<u64> {
        self.element(&[1])
    }

    pub fn scalar(&self, c: u64) -> Vec<u64> {
        self.element(&[c])
    }

    /// The class of X, a root of unity of order dividing m'.
    pub fn generator(&self) -> Vec<u64> {
        self.element(&[0, 1])
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| self.base.add(x, y)).collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| self.base.sub(x, y)).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        self.element(&poly::mul(&self.base, &poly::trim(a.to_vec()), &poly::trim(b.to_vec())))
    }

    pub fn pow(&self, a: &[u64], mut e: u64) -> Vec<u64> {
        let mut acc = self.one();
        let mut b = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }

    /// Multiplication-by-`a` matrix acting on row vectors in the power basis.
    pub fn mul_matrix(&self, a: &[u64]) -> Vec<Vec<u64>> {
        (0..self.degree())
            .map(|i| {
                let mut xi = vec![0u64; i + 1];
                xi[i] = 1;
                self.mul(&self.element(&xi), a)
            })
            .collect()
    }

    /// An element is a unit iff its reduction mod p is nonzero in the residue field,
    /// since the defining factor is irreducible mod p.
    pub fn is_unit(&self, a: &[u64]) -> bool {
        a.iter().any(|&c| c % self.base.p() != 0)
    }

    /// Valuation with respect to the uniformizer p (the ring is unramified over Z/p^n).
    pub fn valuation(&self, a: &[u64]) -> u32 {
        a.iter().map(|&c| self.base.valuation(c)).min().unwrap_or(self.base.n())
    }

    pub fn inv(&self, a: &[u64]) -> Result<Vec<u64>> {
        if !self.is_unit(a) {
            return Err(Error::NonUnit { value: a.first().copied().unwrap_or(0), modulus: self.base.modulus() });
        }
        let rows = self.mul_matrix(a);
        let one = self.one();
        let sol = super::howell::solve_left(&self.base, &rows, &one)?.ok_or(Error::NoSolution)?;
        Ok(sol)
    }
}

impl fmt::Display for CyclotomicFactorRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}[X]/({})", self.base.modulus(), format_poly(&self.modulus_poly))
    }
}

pub fn format_poly(g: &[u64]) -> String {
    let mut terms = Vec::new();
    for (i, &c) in g.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let mon = match i {
            0 => String::new(),
            1 => "X".to_string(),
            _ => format!("X^{i}"),
        };
        let t = match (c, i) {
            (1, 0) => "1".to_string(),
            (1, _) => mon,
            (_, 0) => c.to_string(),
            _ => format!("{c}*{mon}"),
        };
        terms.push(t);
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

/// Sort key for factors: degree, then the negated coefficients c_0, c_1, ... read as residues.
/// For linear factors X - r this orders by the root r.
fn factor_key(ring: &ResidueRing, g: &[u64]) -> (usize, Vec<u64>) {
    (g.len() - 1, g[..g.len() - 1].iter().map(|&c| ring.neg(c)).collect())
}

/// The monic factors of X^{m'} - 1 over Z/p^n, one per cyclotomic coset, sorted by
/// degree and then by negated coefficients.
pub fn factor_cyclotomic(m: u64, p: u64, n: u32) -> Result<Vec<CyclotomicFactorRing>> {
    if m == 0 || gcd(m, p) != 1 {
        return Err(Error::NotCoprime { a: m, b: p });
    }
    let base = ResidueRing::new(p, n)?;
    let field = ResidueRing::new(p, 1)?;
    let mut f = vec![0u64; m as usize + 1];
    f[0] = base.neg(1);
    f[m as usize] = 1;
    let f_mod_p = poly::reduce_coeffs(&field, &f);
    let factors_p = poly::berlekamp(&field, &f_mod_p)?;
    let mut lifted = Vec::with_capacity(factors_p.len());
    for g in factors_p.iter() {
        if factors_p.len() == 1 {
            lifted.push(f.clone());
            continue;
        }
        if n == 1 {
            lifted.push(g.clone());
            continue;
        }
        let (cof, r) = poly::divrem(&field, &f_mod_p, g)?;
        debug_assert!(r.is_empty());
        let (lg, _) = poly::hensel_lift(&base, &f, g, &cof)?;
        lifted.push(lg);
    }
    lifted.sort_by_key(|g| factor_key(&base, g));
    Ok(lifted
        .into_iter()
        .map(|g| CyclotomicFactorRing::new_unchecked(base, g, m))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coset_examples() {
        assert_eq!(cyclotomic_cosets(1, 7).unwrap(), vec![vec![0]]);
        assert_eq!(cyclotomic_cosets(4, 5).unwrap(), vec![vec![0], vec![1], vec![2], vec![3]]);
        assert_eq!(cyclotomic_cosets(7, 5).unwrap(), vec![vec![0], vec![1, 5, 4, 6, 2, 3]]);
        assert!(matches!(cyclotomic_cosets(10, 5), Err(Error::NotCoprime { .. })));
    }

    #[test]
    fn factor_examples() {
        let f = factor_cyclotomic(1, 7, 3).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].modulus_poly(), &[343 - 1, 1]);

        let f = factor_cyclotomic(3, 7, 2).unwrap();
        let polys: Vec<_> = f.iter().map(|r| r.modulus_poly().to_vec()).collect();
        assert_eq!(polys, vec![vec![48, 1], vec![49 - 18, 1], vec![49 - 30, 1]]);

        let f = factor_cyclotomic(7, 5, 1).unwrap();
        let polys: Vec<_> = f.iter().map(|r| r.modulus_poly().to_vec()).collect();
        assert_eq!(polys, vec![vec![4, 1], vec![1, 1, 1, 1, 1, 1, 1]]);
        assert!(factor_cyclotomic(10, 5, 1).is_err());
    }

    #[test]
    fn factor_ring_inverse() {
        let f = factor_cyclotomic(7, 5, 2).unwrap();
        let ring = &f[1];
        let a = ring.element(&[3, 1, 4, 1, 5]);
        let ai = ring.inv(&a).unwrap();
        assert_eq!(ring.mul(&a, &ai), ring.one());
        assert_eq!(ring.root_order(), 7);
        assert!(ring.inv(&ring.scalar(5)).is_err());
    }
}
