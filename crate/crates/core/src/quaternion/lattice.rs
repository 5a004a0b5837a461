use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::algebra::{q_conj, Quat, QuaternionAlgebra};
use crate::arith::zmatrix::{det, hnf, ZMatrix};
use crate::error::{Error, Result};

/// A full-rank Z-lattice in B: (1/den)·(row span of an HNF integer matrix).
///
/// The representation is canonical, so equality of lattices is equality of values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lattice {
    den: BigInt,
    rows: ZMatrix,
}

fn lcm_den(xs: &[Quat]) -> BigInt {
    xs.iter().flat_map(|x| x.iter()).fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
}

impl Lattice {
    /// The lattice spanned by the given elements; fails unless they span B.
    pub fn from_generators(gens: &[Quat]) -> Result<Self> {
        let den = lcm_den(gens);
        let rows: ZMatrix = gens
            .iter()
            .map(|x| x.iter().map(|c| (c * BigRational::from_integer(den.clone())).to_integer()).collect())
            .collect();
        Self::from_scaled(den, &rows)
    }

    fn from_scaled(den: BigInt, rows: &ZMatrix) -> Result<Self> {
        let h = hnf(rows, 4);
        if h.len() != 4 {
            return Err(Error::Invalid(format!("elements span a rank {} lattice", h.len())));
        }
        let g = h.iter().flat_map(|r| r.iter()).fold(den.clone(), |acc, v| acc.gcd(v));
        let (den, rows) = if g.is_one() {
            (den, h)
        } else {
            (&den / &g, h.iter().map(|r| r.iter().map(|v| v / &g).collect()).collect())
        };
        Ok(Self { den, rows })
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    pub fn rows(&self) -> &ZMatrix {
        &self.rows
    }

    pub fn basis(&self) -> Vec<Quat> {
        self.rows
            .iter()
            .map(|r| {
                [0, 1, 2, 3].map(|i| BigRational::new(r[i].clone(), self.den.clone()))
            })
            .collect()
    }

    /// Coordinates of x in this lattice's basis (rational in general).
    pub fn coordinates(&self, x: &Quat) -> Vec<BigRational> {
        // rows are upper triangular: solve c · (rows/den) = x forwards
        let mut rem: Vec<BigRational> = x.iter().map(|c| c * BigRational::from_integer(self.den.clone())).collect();
        let mut out = vec![BigRational::zero(); 4];
        for i in 0..4 {
            let piv = BigRational::from_integer(self.rows[i][i].clone());
            let c = &rem[i] / &piv;
            for j in i..4 {
                rem[j] = &rem[j] - &c * BigRational::from_integer(self.rows[i][j].clone());
            }
            out[i] = c;
        }
        out
    }

    pub fn contains(&self, x: &Quat) -> bool {
        self.coordinates(x).iter().all(|c| c.is_integer())
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.basis().iter().all(|x| self.contains(x))
    }

    pub fn scale(&self, s: &BigRational) -> Lattice {
        let gens: Vec<Quat> = self.basis().iter().map(|x| x.clone().map(|c| c * s)).collect();
        Lattice::from_generators(&gens).expect("nonzero scalar")
    }

    pub fn sum(&self, other: &Lattice) -> Lattice {
        let mut gens = self.basis();
        gens.extend(other.basis());
        Lattice::from_generators(&gens).expect("full rank")
    }

    pub fn intersection(&self, other: &Lattice) -> Lattice {
        let den = self.den.lcm(&other.den);
        let a: ZMatrix = self.rows.iter().map(|r| r.iter().map(|v| v * (&den / &self.den)).collect()).collect();
        let b: ZMatrix = other.rows.iter().map(|r| r.iter().map(|v| v * (&den / &other.den)).collect()).collect();
        // rows (a, a) and (b, 0): those with first block zero carry a ∩ b
        let mut big: ZMatrix = Vec::new();
        for r in &a {
            let mut row = r.clone();
            row.extend(r.iter().cloned());
            big.push(row);
        }
        for r in &b {
            let mut row = r.clone();
            row.extend(std::iter::repeat(BigInt::zero()).take(4));
            big.push(row);
        }
        let h = hnf(&big, 8);
        let rows: ZMatrix = h.iter().filter(|r| r[..4].iter().all(|v| v.is_zero())).map(|r| r[4..].to_vec()).collect();
        Lattice::from_scaled(den, &rows).expect("intersection of full lattices")
    }

    /// Index-like volume: |det| of the basis matrix as a rational.
    pub fn volume(&self) -> BigRational {
        BigRational::new(det(&self.rows).abs(), self.den.pow(4))
    }

    /// Z-span of all products xy.
    pub fn product(&self, other: &Lattice, alg: &QuaternionAlgebra) -> Lattice {
        let (xs, ys) = (self.basis(), other.basis());
        let gens: Vec<Quat> = xs.iter().flat_map(|x| ys.iter().map(|y| alg.mul(x, y)).collect::<Vec<_>>()).collect();
        Lattice::from_generators(&gens).expect("full rank")
    }

    pub fn conjugate(&self) -> Lattice {
        Lattice::from_generators(&self.basis().iter().map(q_conj).collect::<Vec<_>>()).expect("full rank")
    }

    /// The reduced norm: the positive generator of the Z-module spanned by nrd(x), x ∈ L.
    pub fn norm(&self, alg: &QuaternionAlgebra) -> BigRational {
        let b = self.basis();
        let mut vals = Vec::new();
        for i in 0..4 {
            vals.push(alg.nrd(&b[i]));
            for j in i + 1..4 {
                vals.push(&alg.inner(&b[i], &b[j]) * BigRational::from_integer(BigInt::from(2)));
            }
        }
        rat_gcd(&vals)
    }

    /// Gram matrix of ⟨x, y⟩ = trd(x ȳ)/2 on the basis.
    pub fn gram(&self, alg: &QuaternionAlgebra) -> Vec<Vec<BigRational>> {
        let b = self.basis();
        (0..4).map(|i| (0..4).map(|j| alg.inner(&b[i], &b[j])).collect()).collect()
    }

    /// Reduced discriminant of an order-shaped lattice: sqrt |det(trd(e_i e_j))|.
    pub fn reduced_discriminant(&self, alg: &QuaternionAlgebra) -> BigRational {
        let b = self.basis();
        let m: Vec<Vec<BigRational>> =
            (0..4).map(|i| (0..4).map(|j| alg.trd(&alg.mul(&b[i], &b[j]))).collect()).collect();
        let d = rat_det(&m).abs();
        let num = d.numer().sqrt();
        let den = d.denom().sqrt();
        debug_assert_eq!(BigRational::new(&num * &num, &den * &den), d);
        BigRational::new(num, den)
    }

    pub fn element(&self, coords: &[i64]) -> Quat {
        let b = self.basis();
        let mut x = super::algebra::q_zero();
        for (c, e) in coords.iter().zip(&b) {
            let c = BigRational::from_integer(BigInt::from(*c));
            for i in 0..4 {
                x[i] = &x[i] + &c * &e[i];
            }
        }
        x
    }
}

/// gcd of rationals as the positive generator of the Z-module they span.
pub fn rat_gcd(xs: &[BigRational]) -> BigRational {
    let den = xs.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let num = xs
        .iter()
        .fold(BigInt::zero(), |acc, x| acc.gcd(&(x * BigRational::from_integer(den.clone())).to_integer()));
    BigRational::new(num, den)
}

pub fn rat_det(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else { return BigRational::zero() };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        let piv = a[c][c].clone();
        d *= &piv;
        for r in c + 1..n {
            let f = &a[r][c] / &piv;
            if f.is_zero() {
                continue;
            }
            for k in c..n {
                let v = &f * &a[c][k];
                a[r][k] -= v;
            }
        }
    }
    d
}

/// Inverse of a nonsingular rational matrix.
pub fn rat_inverse(m: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero()).expect("nonsingular");
        a.swap(p, c);
        let piv = a[c][c].clone();
        for v in a[c].iter_mut() {
            *v = &*v / &piv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                let pivrow = a[c].clone();
                for (x, y) in a[r].iter_mut().zip(pivrow) {
                    *x -= &f * y;
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}
