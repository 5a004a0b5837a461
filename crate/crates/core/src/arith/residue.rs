use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trial-division primality test. Desk scale only.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization by trial division, as (prime, exponent) pairs in ascending order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(k, &b)| b.then_some(k as u64))
        .collect()
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    gcd(a.unsigned_abs(), b.unsigned_abs()) as i64
}

/// Extended Euclid: returns (g, x, y) with a x + b y = g = gcd(a, b) >= 0.
pub fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Euler's totient.
pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factorize(n) {
        let cur = ds.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            ds.extend(cur.iter().map(|d| d * pk));
        }
    }
    ds.sort_unstable();
    ds
}

/// p-adic valuation of a nonzero integer; `None` for zero.
pub fn valuation(x: i128, p: u64) -> Option<u32> {
    if x == 0 {
        return None;
    }
    let p = p as i128;
    let mut x = x;
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    Some(v)
}

/// The residue ring Z/p^n with p prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueRing {
    p: u64,
    n: u32,
    modulus: u64,
}

impl ResidueRing {
    pub fn new(p: u64, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n == 0 {
            return Err(Error::Invalid("exponent must be at least 1".into()));
        }
        let modulus = p
            .checked_pow(n)
            .filter(|&m| m < (1u64 << 63))
            .ok_or(Error::ModulusTooLarge { p, n })?;
        Ok(Self { p, n, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// The ring Z/p^k for k <= n.
    pub fn truncate(&self, k: u32) -> Result<Self> {
        if k == 0 || k > self.n {
            return Err(Error::Invalid(format!("cannot truncate Z/{}^{} to exponent {k}", self.p, self.n)));
        }
        Self::new(self.p, k)
    }

    pub fn reduce(&self, x: i128) -> u64 {
        x.rem_euclid(self.modulus as i128) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        (s % self.modulus as u128) as u64
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.modulus - (b - a)
        }
    }

    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.modulus;
        a %= self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    pub fn is_unit(&self, a: u64) -> bool {
        a % self.p != 0
    }

    /// Inverse of a unit modulo p^n.
    pub fn inv(&self, a: u64) -> Result<u64> {
        let a = a % self.modulus;
        if !self.is_unit(a) {
            return Err(Error::NonUnit { value: a, modulus: self.modulus });
        }
        let (_, x, _) = egcd(a as i128, self.modulus as i128);
        Ok(self.reduce(x))
    }

    /// p-adic valuation of a residue, capped at n (so 0 has valuation n).
    pub fn valuation(&self, a: u64) -> u32 {
        let mut a = a % self.modulus;
        if a == 0 {
            return self.n;
        }
        let mut v = 0;
        while a % self.p == 0 {
            a /= self.p;
            v += 1;
        }
        v
    }

    pub fn p_pow(&self, k: u32) -> u64 {
        if k >= self.n {
            0
        } else {
            self.p.pow(k)
        }
    }
}

/// Inverse of x modulo the modulus of `ring`.
pub fn inv_mod(x: u64, ring: &ResidueRing) -> Result<u64> {
    ring.inv(x)
}

/// Chinese remainder for pairwise coprime moduli; returns (residue, product modulus).
pub fn crt(residues: &[(u64, u64)]) -> Result<(u128, u128)> {
    let mut acc: i128 = 0;
    let mut modulus: i128 = 1;
    for &(r, m) in residues {
        let m = m as i128;
        let (g, x, _) = egcd(modulus, m);
        if g != 1 {
            return Err(Error::NotCoprime { a: modulus as u64, b: m as u64 });
        }
        // acc + modulus * t == r mod m
        let diff = (r as i128 - acc).rem_euclid(m);
        let t = (diff * x.rem_euclid(m)).rem_euclid(m);
        acc += modulus * t;
        modulus *= m;
        acc = acc.rem_euclid(modulus);
    }
    Ok((acc as u128, modulus as u128))
}

/// Kronecker symbol (d | n) for n >= 1.
pub fn kronecker(d: i64, n: u64) -> i32 {
    if n == 0 {
        return if d.unsigned_abs() == 1 { 1 } else { 0 };
    }
    let mut n = n;
    let mut result = 1i32;
    let mut twos = 0;
    while n % 2 == 0 {
        n /= 2;
        twos += 1;
    }
    if twos > 0 {
        if d % 2 == 0 {
            return 0;
        }
        if twos % 2 == 1 {
            let r = d.rem_euclid(8);
            if r == 3 || r == 5 {
                result = -result;
            }
        }
    }
    // Jacobi symbol (d | n), n odd
    let mut a = d.rem_euclid(n as i64) as u64;
    let mut m = n;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = m % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            result = -result;
        }
        a %= m;
    }
    if m == 1 {
        result
    } else {
        0
    }
}

/// Integer square root (floor).
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_examples() {
        let r = ResidueRing::new(5, 2).unwrap();
        assert_eq!(inv_mod(4, &r).unwrap(), 19);
        assert_eq!(inv_mod(1, &r).unwrap(), 1);
        assert_eq!(inv_mod(5, &r), Err(Error::NonUnit { value: 5, modulus: 25 }));
        let r = ResidueRing::new(7, 3).unwrap();
        assert_eq!(inv_mod(1, &r).unwrap(), 1);
    }

    #[test]
    fn inverse_is_involutive() {
        let r = ResidueRing::new(7, 3).unwrap();
        for x in 0..r.modulus() {
            if r.is_unit(x) {
                let y = r.inv(x).unwrap();
                assert_eq!(r.mul(x, y), 1);
                assert_eq!(r.inv(y).unwrap(), x);
            }
        }
    }

    #[test]
    fn rejects_composite_and_zero_exponent() {
        assert_eq!(ResidueRing::new(9, 1), Err(Error::NotPrime(9)));
        assert!(ResidueRing::new(5, 0).is_err());
    }

    #[test]
    fn kronecker_matches_euler_criterion() {
        for &p in &[3u64, 5, 7, 11, 13, 101] {
            for d in -60i64..60 {
                let e = ResidueRing::new(p, 1).unwrap().pow(d.rem_euclid(p as i64) as u64, (p - 1) / 2);
                let expect = if d.rem_euclid(p as i64) == 0 { 0 } else if e == 1 { 1 } else { -1 };
                assert_eq!(kronecker(d, p), expect, "d={d} p={p}");
            }
        }
        assert_eq!(kronecker(-7, 2), 1);
        assert_eq!(kronecker(-3, 2), -1);
        assert_eq!(kronecker(-20, 11), -1);
    }

    #[test]
    fn crt_small() {
        assert_eq!(crt(&[(2, 5), (3, 7)]).unwrap(), (17, 35));
        assert!(crt(&[(1, 4), (1, 6)]).is_err());
    }

    #[test]
    fn factor_and_divisors() {
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(euler_phi(36), 12);
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }
}
