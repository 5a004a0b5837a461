use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::residue::{egcd, gcd, gcd_i64, isqrt, kronecker};
use crate::error::{Error, Result};

/// A positive definite binary quadratic form a x² + b x y + c y².
///
/// The form (a, b, c) stands for the invertible ideal [a, (-b + √D)/2] of the order of
/// discriminant D; with this orientation Gauss composition is ideal multiplication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

pub fn is_discriminant(d: i64) -> bool {
    d < 0 && matches!(d.rem_euclid(4), 0 | 1)
}

/// Fundamental negative discriminant test.
pub fn is_fundamental(d: i64) -> bool {
    if !is_discriminant(d) {
        return false;
    }
    let squarefree = |n: u64| crate::arith::residue::factorize(n).iter().all(|&(_, e)| e == 1);
    if d.rem_euclid(4) == 1 {
        squarefree(d.unsigned_abs())
    } else {
        let m = d / 4;
        matches!(m.rem_euclid(4), 2 | 3) && squarefree(m.unsigned_abs())
    }
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        Self { a, b, c }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// The principal form of discriminant D.
    pub fn principal(d: i64) -> Self {
        let b = d.rem_euclid(2);
        Self { a: 1, b, c: (b * b - d) / 4 }
    }

    pub fn is_primitive(&self) -> bool {
        gcd_i64(gcd_i64(self.a, self.b), self.c) == 1
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        a > 0 && -a < b && b <= a && a <= c && !(b < 0 && (a == c || a == b))
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.a, b: -self.b, c: self.c }.reduce()
    }

    pub fn eval(&self, x: i64, y: i64) -> i128 {
        let (x, y) = (x as i128, y as i128);
        self.a as i128 * x * x + self.b as i128 * x * y + self.c as i128 * y * y
    }

    /// The reduced form properly equivalent to this one.
    pub fn reduce(&self) -> Self {
        let d = self.discriminant() as i128;
        let (mut a, mut b, mut c) = (self.a as i128, self.b as i128, self.c as i128);
        loop {
            // normalize b into (-a, a]
            if !(-a < b && b <= a) {
                let two_a = 2 * a;
                let mut r = b.rem_euclid(two_a);
                if r > a {
                    r -= two_a;
                }
                b = r;
                c = (b * b - d) / (4 * a);
            }
            if a > c {
                std::mem::swap(&mut a, &mut c);
                b = -b;
                continue;
            }
            if (a == c || a == b) && b < 0 {
                b = -b;
            }
            break;
        }
        Self { a: a as i64, b: b as i64, c: c as i64 }
    }

    /// The form f(xX + zY, yX + wY) for xw - yz = 1.
    pub fn transform(&self, x: i64, y: i64, z: i64, w: i64) -> Self {
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        let (x, y, z, w) = (x as i128, y as i128, z as i128, w as i128);
        let na = a * x * x + b * x * y + c * y * y;
        let nb = 2 * a * x * z + b * (x * w + y * z) + 2 * c * y * w;
        let nc = a * z * z + b * z * w + c * w * w;
        Self { a: na as i64, b: nb as i64, c: nc as i64 }
    }

    /// A properly equivalent form whose first coefficient is coprime to `n`.
    pub fn with_a_coprime_to(&self, n: u64) -> Self {
        if gcd(self.a.unsigned_abs(), n) == 1 {
            return *self;
        }
        for bound in 1i64.. {
            for x in -bound..=bound {
                for y in -bound..=bound {
                    if x.abs().max(y.abs()) != bound || gcd_i64(x, y) != 1 {
                        continue;
                    }
                    let v = self.eval(x, y);
                    if v > 0 && gcd((v % n as i128) as u64, n) == 1 {
                        let (_, s, t) = egcd(x as i128, y as i128);
                        // x s + y t = 1, so (z, w) = (-t, s) completes the matrix
                        return self.transform(x, y, -t as i64, s as i64);
                    }
                }
            }
        }
        unreachable!("primitive forms represent integers coprime to any n")
    }
}

/// All primitive reduced forms of discriminant D, sorted lexicographically.
pub fn reduced_forms(d: i64) -> Result<Vec<QuadForm>> {
    if !is_discriminant(d) {
        return Err(Error::BadDiscriminant(d));
    }
    let amax = isqrt((d.unsigned_abs() / 3) as u128) as i64;
    let mut out: Vec<QuadForm> = (1..=amax)
        .into_par_iter()
        .flat_map_iter(|a| {
            let mut v = Vec::new();
            for b in -a + 1..=a {
                let num = b * b - d;
                if num % (4 * a) != 0 {
                    continue;
                }
                let f = QuadForm::new(a, b, num / (4 * a));
                if f.is_reduced() && f.is_primitive() {
                    v.push(f);
                }
            }
            v
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Gauss composition, returning the reduced representative.
pub fn compose(f: &QuadForm, g: &QuadForm) -> Result<QuadForm> {
    let d = f.discriminant();
    if d != g.discriminant() {
        return Err(Error::MismatchedDiscriminant(d, g.discriminant()));
    }
    let (a1, b1) = (f.a as i128, f.b as i128);
    let (a2, b2) = (g.a as i128, g.b as i128);
    let s = (b1 + b2) / 2;
    let (g1, x, y) = egcd(a1, a2);
    let (e, x2, y2) = egcd(g1, s);
    let (u, v, w) = (x2 * x, x2 * y, y2);
    let a3 = a1 * a2 / (e * e);
    let dd = d as i128;
    // B = (u a1 b2 + v a2 b1 + w (b1 b2 + D)/2) / e
    let big = (u * a1 * b2 + v * a2 * b1 + w * (b1 * b2 + dd) / 2) / e;
    let b3 = big.rem_euclid(2 * a3);
    let c3 = (b3 * b3 - dd) / (4 * a3);
    Ok(QuadForm { a: a3 as i64, b: b3 as i64, c: c3 as i64 }.reduce())
}

pub fn power(f: &QuadForm, mut e: u64) -> QuadForm {
    let mut acc = QuadForm::principal(f.discriminant());
    let mut base = *f;
    while e > 0 {
        if e & 1 == 1 {
            acc = compose(&acc, &base).expect("same discriminant");
        }
        base = compose(&base, &base).expect("same discriminant");
        e >>= 1;
    }
    acc
}

/// Image of a class of discriminant k²D under Pic(O_{c k}) → Pic(O_c), where D = c² d_K.
pub fn push_down(f: &QuadForm, k: u64, d: i64) -> Result<QuadForm> {
    if f.discriminant() != (k * k) as i64 * d {
        return Err(Error::MismatchedDiscriminant(f.discriminant(), (k * k) as i64 * d));
    }
    if k == 1 {
        return Ok(f.reduce());
    }
    // a coprime to the full conductor keeps the ideal invertible at every level
    let cond = (f.discriminant().unsigned_abs()) as u64;
    let g = f.with_a_coprime_to(cond);
    let a = g.a as i128;
    let kinv = {
        let (gg, s, _) = egcd(k as i128 % a, a);
        debug_assert!(a == 1 || gg == 1);
        s
    };
    let mut big = (kinv * g.b as i128).rem_euclid(a);
    if (big - d as i128).rem_euclid(2) != 0 {
        big += a;
    }
    let b = big.rem_euclid(2 * a);
    let c = (b * b - d as i128) / (4 * a);
    debug_assert_eq!((b * b - d as i128) % (4 * a), 0);
    Ok(QuadForm { a: a as i64, b: b as i64, c: c as i64 }.reduce())
}

/// (d_K | ℓ): +1 split, -1 inert, 0 ramified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplittingType {
    Split,
    Inert,
    Ramified,
}

pub fn splitting_type(d_k: i64, ell: u64) -> SplittingType {
    match kronecker(d_k, ell) {
        1 => SplittingType::Split,
        -1 => SplittingType::Inert,
        _ => SplittingType::Ramified,
    }
}

/// The form (p, b, c) with the least non-negative b, b² ≡ D (mod 4p), if p is represented.
pub fn prime_form(d: i64, p: u64) -> Option<QuadForm> {
    let p = p as i64;
    (0..=p).find_map(|b| {
        let num = b * b - d;
        (num % (4 * p) == 0).then(|| QuadForm::new(p, b, num / (4 * p)))
    })
}
