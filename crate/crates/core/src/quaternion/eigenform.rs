use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::classset::ClassSet;
use crate::arith::howell::left_kernel;
use crate::arith::residue::ResidueRing;
use crate::error::{Error, Result};

/// Values of a Hecke eigenform on the class set, over Z/p^n (or over Z when `ring` is None).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuaternionicEigenform {
    pub ring: Option<ResidueRing>,
    pub values: Vec<i64>,
    pub eigenvalues: BTreeMap<u64, i64>,
}

impl QuaternionicEigenform {
    /// Values reduced into a residue ring.
    pub fn reduce(&self, ring: &ResidueRing) -> Vec<u64> {
        self.values.iter().map(|&v| ring.reduce(v as i128)).collect()
    }
}

/// ⟨f1, f2⟩ = Σ_b f1(b) f2(b τ) w_b^{-1} over Z/p^n.
pub fn pairing(f1: &[u64], f2: &[u64], cs: &ClassSet, tau: &[usize], ring: &ResidueRing) -> Result<u64> {
    let mut acc = 0;
    for (b, &w) in cs.weights().iter().enumerate() {
        let winv = ring
            .inv(w % ring.modulus())
            .map_err(|_| Error::NonInvertibleWeight { weight: w, modulus: ring.modulus() })?;
        acc = ring.add(acc, ring.mul(ring.mul(f1[b], f2[tau[b]]), winv));
    }
    Ok(acc)
}

/// The same pairing over Q.
pub fn pairing_rational(f1: &[i64], f2: &[i64], cs: &ClassSet, tau: &[usize]) -> BigRational {
    cs.weights()
        .iter()
        .enumerate()
        .map(|(b, &w)| BigRational::new(BigInt::from(f1[b]) * BigInt::from(f2[tau[b]]), BigInt::from(w)))
        .sum()
}

/// Applies (T v)_i = Σ_j T_ij v_j.
pub fn apply(t: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    t.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Rows of the stacked operator whose left kernel is the common eigenspace: entry (i, (q, j))
/// is (T_q - a_q)_{j i}.
fn stacked(brandt: &BTreeMap<u64, Vec<Vec<i64>>>, eigen: &BTreeMap<u64, i64>) -> Result<Vec<Vec<i64>>> {
    let h = brandt.values().next().map_or(0, |t| t.len());
    let mut rows = vec![Vec::new(); h];
    for (q, a) in eigen {
        let t = brandt.get(q).ok_or(Error::Invalid(format!("no Brandt matrix for q = {q}")))?;
        for (i, row) in rows.iter_mut().enumerate() {
            for j in 0..h {
                row.push(t[j][i] - if i == j { *a } else { 0 });
            }
        }
    }
    Ok(rows)
}

/// The unique (up to units) vector v over Z/p^n with T_q v = a_q v for all supplied q,
/// v ≢ 0 mod p, normalized so that its first unit coordinate is 1.
pub fn eigenform_mod(
    cs: &ClassSet,
    brandt: &BTreeMap<u64, Vec<Vec<i64>>>,
    eigen: &BTreeMap<u64, i64>,
    p: u64,
    n: u32,
) -> Result<QuaternionicEigenform> {
    let h = cs.len();
    let rows = stacked(brandt, eigen)?;
    let ncols = rows.first().map_or(0, |r| r.len());
    let fp = ResidueRing::new(p, 1)?;
    let reduce = |ring: &ResidueRing| -> Vec<Vec<u64>> {
        rows.iter().map(|r| r.iter().map(|&x| ring.reduce(x as i128)).collect()).collect()
    };
    let k1 = left_kernel(&fp, &reduce(&fp), ncols);
    match k1.rows().len() {
        0 => return Err(Error::NoEigenvector),
        1 => {}
        d => return Err(Error::Ambiguous(d)),
    }
    let ring = ResidueRing::new(p, n)?;
    let k = left_kernel(&ring, &reduce(&ring), ncols);
    let v = k
        .rows()
        .iter()
        .find(|r| r.iter().any(|&x| ring.is_unit(x)))
        .ok_or(Error::NoEigenvector)?
        .clone();
    let first = v.iter().copied().find(|&x| ring.is_unit(x)).expect("unit entry");
    let s = ring.inv(first)?;
    let values: Vec<i64> = v.iter().map(|&x| ring.mul(x, s) as i64).collect();
    debug_assert_eq!(values.len(), h);
    Ok(QuaternionicEigenform { ring: Some(ring), values, eigenvalues: eigen.clone() })
}

/// A primitive integral eigenvector with the given eigenvalues, first nonzero entry positive.
pub fn integral_eigenvector(
    brandt: &BTreeMap<u64, Vec<Vec<i64>>>,
    eigen: &BTreeMap<u64, i64>,
) -> Result<QuaternionicEigenform> {
    let rows = stacked(brandt, eigen)?;
    let h = rows.len();
    // kernel of the transpose: M v = 0 with M_{(q,j), i} = rows[i][(q,j)]
    let m: Vec<Vec<BigRational>> = (0..rows.first().map_or(0, |r| r.len()))
        .map(|c| (0..h).map(|i| BigRational::from_integer(BigInt::from(rows[i][c]))).collect())
        .collect();
    let basis = rational_kernel(m, h);
    match basis.len() {
        0 => return Err(Error::NoEigenvector),
        1 => {}
        d => return Err(Error::Ambiguous(d)),
    }
    let v = &basis[0];
    let den = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(den.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let mut vals: Vec<i64> = ints.iter().map(|x| i64::try_from(x / &g).expect("small eigenvector")).collect();
    if vals.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
        vals.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(QuaternionicEigenform { ring: None, values: vals, eigenvalues: eigen.clone() })
}

fn rational_kernel(mut m: Vec<Vec<BigRational>>, ncols: usize) -> Vec<Vec<BigRational>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let piv = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = &*x / &piv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let pr = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(pr) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![BigRational::zero(); ncols];
            v[free] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][free].clone();
            }
            v
        })
        .collect()
}

/// Checks T_q v = a_q v exactly over Z.
pub fn is_eigenvector(t: &[Vec<i64>], v: &[i64], a: i64) -> bool {
    apply(t, v).iter().zip(v).all(|(x, y)| *x == a * y)
}

pub fn abs_max(v: &[i64]) -> i64 {
    v.iter().map(|x| BigInt::from(*x).abs()).max().map_or(0, |x| i64::try_from(x).unwrap_or(i64::MAX))
}

#[cfg(test)]
mod tests {
    use super::super::algebra::QuaternionAlgebra;
    use super::super::classset::brandt_matrix;
    use super::super::order::EichlerOrder;
    use super::*;

    fn d11() -> (ClassSet, BTreeMap<u64, Vec<Vec<i64>>>) {
        let cs = ClassSet::new(EichlerOrder::new(QuaternionAlgebra::new(11).unwrap(), 1).unwrap());
        let mut b = BTreeMap::new();
        for q in [2u64, 3] {
            b.insert(q, brandt_matrix(&cs, q).unwrap());
        }
        (cs, b)
    }

    #[test]
    fn eigenform_examples() {
        let (cs, b) = d11();
        let eigen: BTreeMap<u64, i64> = [(2, -2), (3, -1)].into_iter().collect();
        let f = eigenform_mod(&cs, &b, &eigen, 7, 1).unwrap();
        assert_eq!(f.values, vec![1, 2]);
        let z = integral_eigenvector(&b, &eigen).unwrap();
        assert_eq!(z.values, vec![2, -3]);
        let f2 = eigenform_mod(&cs, &b, &eigen, 7, 2).unwrap();
        let r = ResidueRing::new(7, 2).unwrap();
        let s = r.inv(2).unwrap();
        assert_eq!(f2.values, vec![1, r.mul(r.reduce(-3), s) as i64]);
        let eis: BTreeMap<u64, i64> = [(2, 3), (3, 4)].into_iter().collect();
        let e = integral_eigenvector(&b, &eis).unwrap();
        assert_eq!(e.values, vec![1, 1]);
        let wrong: BTreeMap<u64, i64> = [(2, 1)].into_iter().collect();
        assert!(matches!(eigenform_mod(&cs, &b, &wrong, 7, 1), Err(Error::NoEigenvector)));
    }

    #[test]
    fn pairing_examples() {
        let (cs, _) = d11();
        let tau = cs.atkin_lehner();
        assert_eq!(pairing_rational(&[2, -3], &[2, -3], &cs, &tau), BigRational::from_integer(5.into()));
        let r = ResidueRing::new(7, 2).unwrap();
        let f = vec![2, r.reduce(-3)];
        assert_eq!(pairing(&f, &f, &cs, &tau, &r).unwrap(), 5);
        let r3 = ResidueRing::new(3, 1).unwrap();
        assert!(matches!(pairing(&[1, 0], &[1, 0], &cs, &tau, &r3), Err(Error::NonInvertibleWeight { .. })));
    }
}
