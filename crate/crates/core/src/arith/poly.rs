//! Dense univariate polynomials over Z/p^n, coefficients stored low degree first.
//!
//! The zero polynomial is the empty vector. Every routine here returns trimmed vectors.

use super::residue::ResidueRing;
use crate::error::Result;

pub type Poly = Vec<u64>;

pub fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

/// Degree, with `None` for the zero polynomial.
pub fn degree(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub fn reduce_coeffs(r: &ResidueRing, a: &[u64]) -> Poly {
    trim(a.iter().map(|&c| c % r.modulus()).collect())
}

pub fn add(r: &ResidueRing, a: &[u64], b: &[u64]) -> Poly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| r.add(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
        .collect();
    trim(out)
}

pub fn sub(r: &ResidueRing, a: &[u64], b: &[u64]) -> Poly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| r.sub(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
        .collect();
    trim(out)
}

pub fn scale(r: &ResidueRing, a: &[u64], s: u64) -> Poly {
    trim(a.iter().map(|&c| r.mul(c, s)).collect())
}

pub fn mul(r: &ResidueRing, a: &[u64], b: &[u64]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = r.add(out[i + j], r.mul(x, y));
        }
    }
    trim(out)
}

/// Division with remainder by a polynomial whose leading coefficient is a unit.
pub fn divrem(r: &ResidueRing, a: &[u64], b: &[u64]) -> Result<(Poly, Poly)> {
    let b = trim(b.to_vec());
    let db = degree(&b).expect("division by zero polynomial");
    let lead_inv = r.inv(b[db])?;
    let mut rem = trim(a.to_vec());
    if rem.len() <= db {
        return Ok((Vec::new(), rem));
    }
    let mut quot = vec![0u64; rem.len() - db];
    while let Some(dr) = degree(&rem) {
        if dr < db {
            break;
        }
        let c = r.mul(rem[dr], lead_inv);
        quot[dr - db] = c;
        for (k, &bk) in b.iter().enumerate() {
            let idx = dr - db + k;
            rem[idx] = r.sub(rem[idx], r.mul(c, bk));
        }
        rem = trim(rem);
    }
    Ok((trim(quot), rem))
}

pub fn rem(r: &ResidueRing, a: &[u64], b: &[u64]) -> Result<Poly> {
    Ok(divrem(r, a, b)?.1)
}

pub fn mulmod(r: &ResidueRing, a: &[u64], b: &[u64], m: &[u64]) -> Result<Poly> {
    rem(r, &mul(r, a, b), m)
}

pub fn powmod(r: &ResidueRing, base: &[u64], mut e: u64, m: &[u64]) -> Result<Poly> {
    let mut acc = rem(r, &[1], m)?;
    let mut b = rem(r, base, m)?;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(r, &acc, &b, m)?;
        }
        b = mulmod(r, &b, &b, m)?;
        e >>= 1;
    }
    Ok(acc)
}

/// Monic associate over a field (n = 1).
pub fn monic(r: &ResidueRing, a: &[u64]) -> Result<Poly> {
    match degree(a) {
        None => Ok(Vec::new()),
        Some(d) => {
            let inv = r.inv(a[d])?;
            Ok(scale(r, a, inv))
        }
    }
}

/// Monic gcd over F_p.
pub fn gcd_field(r: &ResidueRing, a: &[u64], b: &[u64]) -> Result<Poly> {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let t = rem(r, &x, &y)?;
        x = y;
        y = t;
    }
    monic(r, &x)
}

/// Extended Euclid over F_p: returns (g, s, t) with s a + t b = g monic.
pub fn xgcd_field(r: &ResidueRing, a: &[u64], b: &[u64]) -> Result<(Poly, Poly, Poly)> {
    let (mut r0, mut r1) = (trim(a.to_vec()), trim(b.to_vec()));
    let (mut s0, mut s1): (Poly, Poly) = (vec![1], Vec::new());
    let (mut t0, mut t1): (Poly, Poly) = (Vec::new(), vec![1]);
    while !r1.is_empty() {
        let (q, rr) = divrem(r, &r0, &r1)?;
        let s2 = sub(r, &s0, &mul(r, &q, &s1));
        let t2 = sub(r, &t0, &mul(r, &q, &t1));
        r0 = std::mem::replace(&mut r1, rr);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    let d = degree(&r0).unwrap_or(0);
    let inv = r.inv(*r0.get(d).unwrap_or(&1))?;
    Ok((scale(r, &r0, inv), scale(r, &s0, inv), scale(r, &t0, inv)))
}

/// Evaluate at a point.
pub fn eval(r: &ResidueRing, a: &[u64], x: u64) -> u64 {
    a.iter().rev().fold(0, |acc, &c| r.add(r.mul(acc, x), c))
}

/// Irreducible factorization of a monic square-free polynomial over F_p (Berlekamp).
///
/// Factors are returned monic, in no particular order.
pub fn berlekamp(field: &ResidueRing, f: &[u64]) -> Result<Vec<Poly>> {
    debug_assert_eq!(field.n(), 1);
    let f = monic(field, f)?;
    let d = match degree(&f) {
        None | Some(0) => return Ok(Vec::new()),
        Some(1) => return Ok(vec![f]),
        Some(d) => d,
    };
    let p = field.p();
    // rows: x^{p i} mod f
    let xp = powmod(field, &[0, 1], p, &f)?;
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(d);
    let mut cur: Poly = vec![1];
    for _ in 0..d {
        let mut row = cur.clone();
        row.resize(d, 0);
        rows.push(row);
        cur = mulmod(field, &cur, &xp, &f)?;
    }
    // kernel of (Q - I) acting on row vectors
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] = field.sub(row[i], 1);
    }
    let kernel = left_kernel_field(field, &rows, d);
    let k = kernel.len();
    let mut factors = vec![f];
    if k == 1 {
        return Ok(factors);
    }
    for v in kernel.iter() {
        let v = trim(v.clone());
        if degree(&v).unwrap_or(0) == 0 {
            continue;
        }
        let mut next = Vec::new();
        for h in factors.into_iter() {
            if degree(&h) == Some(1) {
                next.push(h);
                continue;
            }
            let mut rest = h;
            for s in 0..p {
                if degree(&rest).unwrap_or(0) <= 1 {
                    break;
                }
                let shifted = sub(field, &v, &[s]);
                let g = gcd_field(field, &rest, &shifted)?;
                let dg = degree(&g).unwrap_or(0);
                if dg > 0 && dg < degree(&rest).unwrap() {
                    let (q, _) = divrem(field, &rest, &g)?;
                    next.push(g);
                    rest = q;
                }
            }
            next.push(rest);
        }
        factors = next;
        if factors.len() == k {
            break;
        }
    }
    Ok(factors)
}

/// Basis of the left kernel {v : v M = 0} of a matrix over F_p.
pub(crate) fn left_kernel_field(field: &ResidueRing, rows: &[Vec<u64>], ncols: usize) -> Vec<Vec<u64>> {
    let nrows = rows.len();
    // Work on the transpose: solve M^T v^T = 0.
    let mut a: Vec<Vec<u64>> = (0..ncols)
        .map(|c| (0..nrows).map(|r| rows[r][c] % field.modulus()).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..nrows {
        let Some(pr) = (row..a.len()).find(|&i| a[i][col] != 0) else { continue };
        a.swap(row, pr);
        let inv = field.inv(a[row][col]).expect("nonzero in a field");
        for x in a[row].iter_mut() {
            *x = field.mul(*x, inv);
        }
        for i in 0..a.len() {
            if i != row && a[i][col] != 0 {
                let c = a[i][col];
                for j in 0..nrows {
                    let t = field.mul(c, a[row][j]);
                    a[i][j] = field.sub(a[i][j], t);
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == a.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..nrows).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![0u64; nrows];
            v[fc] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = field.neg(a[i][fc]);
            }
            v
        })
        .collect()
}

/// Quadratic Hensel lifting of a coprime factorization f = g h (mod p) to f = G H (mod p^n).
///
/// `f` is monic over `target`; `g` and `h` are monic over F_p. Returns the monic lift of `g`.
pub fn hensel_lift(target: &ResidueRing, f: &[u64], g: &[u64], h: &[u64]) -> Result<(Poly, Poly)> {
    let p = target.p();
    let field = ResidueRing::new(p, 1)?;
    let (one, s, t) = xgcd_field(&field, g, h)?;
    if one != vec![1] {
        return Err(crate::error::Error::Invalid("Hensel factors are not coprime".into()));
    }
    let mut g = g.to_vec();
    let mut h = h.to_vec();
    let mut s = s;
    let mut t = t;
    let mut k = 1u32;
    while k < target.n() {
        let k2 = (2 * k).min(target.n());
        let ring = ResidueRing::new(p, k2)?;
        let fr = reduce_coeffs(&ring, f);
        let e = sub(&ring, &fr, &mul(&ring, &g, &h));
        let (q, rr) = divrem(&ring, &mul(&ring, &s, &e), &h)?;
        let g_new = add(&ring, &add(&ring, &g, &mul(&ring, &t, &e)), &mul(&ring, &q, &g));
        let h_new = add(&ring, &h, &rr);
        let b = sub(
            &ring,
            &add(&ring, &mul(&ring, &s, &g_new), &mul(&ring, &t, &h_new)),
            &[1],
        );
        let (c, dd) = divrem(&ring, &mul(&ring, &s, &b), &h_new)?;
        s = sub(&ring, &s, &dd);
        t = sub(&ring, &sub(&ring, &t, &mul(&ring, &t, &b)), &mul(&ring, &c, &g_new));
        g = g_new;
        h = h_new;
        k = k2;
    }
    Ok((reduce_coeffs(target, &g), reduce_coeffs(target, &h)))
}
