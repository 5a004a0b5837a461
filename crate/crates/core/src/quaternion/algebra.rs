use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::residue::{factorize, kronecker};
use crate::error::{Error, Result};

/// An element x0 + x1 i + x2 j + x3 k with rational coordinates.
pub type Quat = [BigRational; 4];

pub fn q_zero() -> Quat {
    [BigRational::zero(), BigRational::zero(), BigRational::zero(), BigRational::zero()]
}

pub fn q_from_ints(x: [i64; 4]) -> Quat {
    x.map(|v| BigRational::from_integer(BigInt::from(v)))
}

pub fn q_scalar(s: BigRational) -> Quat {
    [s, BigRational::zero(), BigRational::zero(), BigRational::zero()]
}

pub fn q_add(x: &Quat, y: &Quat) -> Quat {
    [&x[0] + &y[0], &x[1] + &y[1], &x[2] + &y[2], &x[3] + &y[3]]
}

pub fn q_sub(x: &Quat, y: &Quat) -> Quat {
    [&x[0] - &y[0], &x[1] - &y[1], &x[2] - &y[2], &x[3] - &y[3]]
}

pub fn q_scale(x: &Quat, s: &BigRational) -> Quat {
    [&x[0] * s, &x[1] * s, &x[2] * s, &x[3] * s]
}

pub fn q_conj(x: &Quat) -> Quat {
    [x[0].clone(), -&x[1], -&x[2], -&x[3]]
}

pub fn q_is_zero(x: &Quat) -> bool {
    x.iter().all(|c| c.is_zero())
}

/// Hilbert symbol (a, b)_p; p = 0 stands for the real place.
pub fn hilbert_symbol(a: i64, b: i64, p: u64) -> i32 {
    if p == 0 {
        return if a < 0 && b < 0 { -1 } else { 1 };
    }
    let split = |x: i64| {
        let mut u = x;
        let mut v = 0u32;
        while u % p as i64 == 0 {
            u /= p as i64;
            v += 1;
        }
        (v, u)
    };
    let (alpha, u) = split(a);
    let (beta, v) = split(b);
    if p == 2 {
        let eps = |x: i64| ((x - 1) / 2).rem_euclid(2);
        let omega = |x: i64| ((x * x - 1) / 8).rem_euclid(2);
        let e = eps(u) * eps(v) + alpha as i64 * omega(v) + beta as i64 * omega(u);
        return if e % 2 == 0 { 1 } else { -1 };
    }
    let mut s = if (alpha as u64 * beta as u64) % 2 == 1 && p % 4 == 3 { -1 } else { 1 };
    if beta % 2 == 1 {
        s *= kronecker(u, p);
    }
    if alpha % 2 == 1 {
        s *= kronecker(v, p);
    }
    s
}

/// The definite quaternion algebra (a, b | Q): i² = a, j² = b, k = ij = -ji.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuaternionAlgebra {
    a: i64,
    b: i64,
    disc: u64,
}

impl QuaternionAlgebra {
    /// Finds a presentation ramified exactly at ∞ and the primes of N⁻, searching by |b|
    /// and then |a|.
    pub fn new(n_minus: u64) -> Result<Self> {
        let fac = factorize(n_minus);
        if n_minus == 0 || fac.iter().any(|&(_, e)| e > 1) {
            return Err(Error::NotSquareFree(n_minus));
        }
        if fac.len() % 2 == 0 {
            return Err(Error::ParityError(n_minus));
        }
        let target: Vec<u64> = fac.iter().map(|&(p, _)| p).collect();
        for bb in 1i64.. {
            for aa in 1..=bb {
                let (a, b) = (-aa, -bb);
                if Self::ramified_primes(a, b) == target {
                    return Ok(Self { a, b, disc: n_minus });
                }
            }
        }
        unreachable!()
    }

    /// Finite primes where (a, b) ramifies.
    pub fn ramified_primes(a: i64, b: i64) -> Vec<u64> {
        let mut primes: Vec<u64> = factorize((2 * a * b).unsigned_abs()).into_iter().map(|(p, _)| p).collect();
        primes.retain(|&p| hilbert_symbol(a, b, p) == -1);
        primes
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn discriminant(&self) -> u64 {
        self.disc
    }

    pub fn mul(&self, x: &Quat, y: &Quat) -> Quat {
        let a = BigRational::from_integer(BigInt::from(self.a));
        let b = BigRational::from_integer(BigInt::from(self.b));
        let ab = &a * &b;
        [
            &x[0] * &y[0] + &a * &x[1] * &y[1] + &b * &x[2] * &y[2] - &ab * &x[3] * &y[3],
            &x[0] * &y[1] + &x[1] * &y[0] - &b * &x[2] * &y[3] + &b * &x[3] * &y[2],
            &x[0] * &y[2] + &x[2] * &y[0] + &a * &x[1] * &y[3] - &a * &x[3] * &y[1],
            &x[0] * &y[3] + &x[3] * &y[0] + &x[1] * &y[2] - &x[2] * &y[1],
        ]
    }

    pub fn nrd(&self, x: &Quat) -> BigRational {
        let a = BigRational::from_integer(BigInt::from(self.a));
        let b = BigRational::from_integer(BigInt::from(self.b));
        &x[0] * &x[0] - &a * &x[1] * &x[1] - &b * &x[2] * &x[2] + &a * &b * &x[3] * &x[3]
    }

    pub fn trd(&self, x: &Quat) -> BigRational {
        &x[0] + &x[0]
    }

    /// trd(x ȳ)/2, the bilinear form with ⟨x, x⟩ = nrd(x).
    pub fn inner(&self, x: &Quat, y: &Quat) -> BigRational {
        let a = BigRational::from_integer(BigInt::from(self.a));
        let b = BigRational::from_integer(BigInt::from(self.b));
        &x[0] * &y[0] - &a * &x[1] * &y[1] - &b * &x[2] * &y[2] + &a * &b * &x[3] * &y[3]
    }

    pub fn inverse(&self, x: &Quat) -> Result<Quat> {
        let n = self.nrd(x);
        if n.is_zero() {
            return Err(Error::Invalid("zero has no inverse".into()));
        }
        Ok(q_scale(&q_conj(x), &n.recip()))
    }

    pub fn is_integral(&self, x: &Quat) -> bool {
        self.trd(x).is_integer() && self.nrd(x).is_integer()
    }

    /// Sanity checks for a definite presentation.
    pub fn is_definite(&self) -> bool {
        self.a < 0 && self.b < 0
    }

    pub fn one(&self) -> Quat {
        q_scalar(BigRational::one())
    }
}

pub fn rat(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

pub fn rat_abs(x: &BigRational) -> BigRational {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presentations() {
        let b = QuaternionAlgebra::new(11).unwrap();
        assert_eq!((b.a(), b.b()), (-1, -11));
        let h = QuaternionAlgebra::new(2).unwrap();
        assert_eq!((h.a(), h.b()), (-1, -1));
        assert_eq!(QuaternionAlgebra::new(15), Err(Error::ParityError(15)));
        assert_eq!(QuaternionAlgebra::new(18), Err(Error::NotSquareFree(18)));
        for d in [3u64, 5, 7, 13, 17, 19, 23, 30, 42] {
            let q = QuaternionAlgebra::new(d).unwrap();
            let ram = QuaternionAlgebra::ramified_primes(q.a(), q.b());
            assert_eq!(ram, factorize(d).iter().map(|&(p, _)| p).collect::<Vec<_>>());
            assert_eq!(hilbert_symbol(q.a(), q.b(), 0), -1);
        }
    }

    #[test]
    fn hilbert_product_formula() {
        for a in [-7i64, -3, -2, -1, 2, 3, 5, 6, 10, -15] {
            for b in [-11i64, -5, -1, 3, 7, 13, -6] {
                let mut primes: Vec<u64> =
                    factorize((2 * a * b).unsigned_abs()).into_iter().map(|(p, _)| p).collect();
                primes.push(0);
                let prod: i32 = primes.iter().map(|&p| hilbert_symbol(a, b, p)).product();
                assert_eq!(prod, 1, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn multiplication_table() {
        let q = QuaternionAlgebra::new(11).unwrap();
        let i = q_from_ints([0, 1, 0, 0]);
        let j = q_from_ints([0, 0, 1, 0]);
        let k = q_from_ints([0, 0, 0, 1]);
        assert_eq!(q.mul(&i, &i), q_from_ints([-1, 0, 0, 0]));
        assert_eq!(q.mul(&j, &j), q_from_ints([-11, 0, 0, 0]));
        assert_eq!(q.mul(&i, &j), k);
        assert_eq!(q.mul(&j, &i), q_from_ints([0, 0, 0, -1]));
        let x = q_from_ints([1, 2, -3, 4]);
        let y = q_from_ints([-2, 1, 5, 1]);
        assert_eq!(q.nrd(&q.mul(&x, &y)), q.nrd(&x) * q.nrd(&y));
        assert_eq!(q.mul(&x, &q_conj(&x)), q_scalar(q.nrd(&x)));
    }
}
