//! The cyclic group algebra R[Γ_m] over R = Z/p^n or a cyclotomic factor ring.
//!
//! Elements are stored as flat coefficient vectors: the coefficient of γ^i occupies the
//! slice `[i*d, (i+1)*d)` where d is the rank of R over Z/p^n.

use serde::{Deserialize, Serialize};

use crate::arith::cyclotomic::{factor_cyclotomic, CyclotomicFactorRing};
use crate::arith::howell::{left_kernel, HowellBasis};
use crate::arith::poly;
use crate::arith::residue::{gcd, ResidueRing};
use crate::error::{Error, Result};

/// Coefficient ring of a group ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoeffRing {
    Residue(ResidueRing),
    Cyclotomic(CyclotomicFactorRing),
}

impl CoeffRing {
    pub fn base(&self) -> &ResidueRing {
        match self {
            CoeffRing::Residue(r) => r,
            CoeffRing::Cyclotomic(c) => c.base(),
        }
    }

    /// Rank over the base residue ring.
    pub fn dim(&self) -> usize {
        match self {
            CoeffRing::Residue(_) => 1,
            CoeffRing::Cyclotomic(c) => c.degree(),
        }
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.dim()]
    }

    pub fn one(&self) -> Vec<u64> {
        self.scalar(1)
    }

    pub fn scalar(&self, c: u64) -> Vec<u64> {
        match self {
            CoeffRing::Residue(r) => vec![c % r.modulus()],
            CoeffRing::Cyclotomic(f) => f.scalar(c),
        }
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let r = self.base();
        a.iter().zip(b).map(|(&x, &y)| r.add(x, y)).collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let r = self.base();
        a.iter().zip(b).map(|(&x, &y)| r.sub(x, y)).collect()
    }

    pub fn neg(&self, a: &[u64]) -> Vec<u64> {
        let r = self.base();
        a.iter().map(|&x| r.neg(x)).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        match self {
            CoeffRing::Residue(r) => vec![r.mul(a[0], b[0])],
            CoeffRing::Cyclotomic(f) => f.mul(a, b),
        }
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

    pub fn is_unit(&self, a: &[u64]) -> bool {
        match self {
            CoeffRing::Residue(r) => r.is_unit(a[0]),
            CoeffRing::Cyclotomic(f) => f.is_unit(a),
        }
    }

    /// Valuation at the uniformizer p, capped at n.
    pub fn valuation(&self, a: &[u64]) -> u32 {
        match self {
            CoeffRing::Residue(r) => r.valuation(a[0]),
            CoeffRing::Cyclotomic(f) => f.valuation(a),
        }
    }

    pub fn inv(&self, a: &[u64]) -> Result<Vec<u64>> {
        match self {
            CoeffRing::Residue(r) => Ok(vec![r.inv(a[0])?]),
            CoeffRing::Cyclotomic(f) => f.inv(a),
        }
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&x| x == 0)
    }

    pub fn display(&self, a: &[u64]) -> String {
        match self {
            CoeffRing::Residue(_) => a[0].to_string(),
            CoeffRing::Cyclotomic(_) => crate::arith::cyclotomic::format_poly(a),
        }
    }
}

/// The group ring R[Γ_m] with a fixed generator γ of Γ_m.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupRing {
    order: usize,
    coeffs: CoeffRing,
}

impl GroupRing {
    pub fn new(order: usize, coeffs: CoeffRing) -> Result<Self> {
        if order == 0 {
            return Err(Error::Invalid("group order must be positive".into()));
        }
        Ok(Self { order, coeffs })
    }

    pub fn over_residue(order: usize, ring: ResidueRing) -> Result<Self> {
        Self::new(order, CoeffRing::Residue(ring))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &CoeffRing {
        &self.coeffs
    }

    pub fn base(&self) -> &ResidueRing {
        self.coeffs.base()
    }

    /// Rank over Z/p^n.
    pub fn dim(&self) -> usize {
        self.order * self.coeffs.dim()
    }

    pub fn with_order(&self, order: usize) -> Result<Self> {
        Self::new(order, self.coeffs.clone())
    }

    pub fn zero(&self) -> GroupRingElement {
        GroupRingElement { ring: self.clone(), c: vec![0; self.dim()] }
    }

    pub fn one(&self) -> GroupRingElement {
        self.monomial(0)
    }

    /// γ^k.
    pub fn monomial(&self, k: i64) -> GroupRingElement {
        self.term(k, &self.coeffs.one())
    }

    /// c·γ^k for a coefficient c.
    pub fn term(&self, k: i64, c: &[u64]) -> GroupRingElement {
        let mut e = self.zero();
        let i = k.rem_euclid(self.order as i64) as usize;
        e.coeff_mut(i).copy_from_slice(c);
        e
    }

    /// The norm element Σ_i γ^i.
    pub fn norm_element(&self) -> GroupRingElement {
        let d = self.coeffs.dim();
        let one = self.coeffs.one();
        let mut c = vec![0; self.dim()];
        for i in 0..self.order {
            c[i * d..(i + 1) * d].copy_from_slice(&one);
        }
        GroupRingElement { ring: self.clone(), c }
    }

    /// Builds an element from integer coefficients (residue coefficient rings only lift
    /// integers as scalars).
    pub fn from_ints(&self, coeffs: &[i64]) -> Result<GroupRingElement> {
        if coeffs.len() != self.order {
            return Err(Error::MismatchedGroup);
        }
        let base = *self.base();
        let d = self.coeffs.dim();
        let mut c = vec![0; self.dim()];
        for (i, &x) in coeffs.iter().enumerate() {
            let s = self.coeffs.scalar(base.reduce(x as i128));
            c[i * d..(i + 1) * d].copy_from_slice(&s);
        }
        Ok(GroupRingElement { ring: self.clone(), c })
    }

    /// Builds an element from a flat coefficient vector over Z/p^n.
    pub fn from_flat(&self, c: Vec<u64>) -> Result<GroupRingElement> {
        if c.len() != self.dim() {
            return Err(Error::MismatchedGroup);
        }
        let m = self.base().modulus();
        Ok(GroupRingElement { ring: self.clone(), c: c.into_iter().map(|x| x % m).collect() })
    }

    /// The Z/p^n-basis γ^i ⊗ X^j, flattened in storage order.
    pub fn basis(&self) -> Vec<GroupRingElement> {
        (0..self.dim())
            .map(|k| {
                let mut c = vec![0; self.dim()];
                c[k] = 1;
                GroupRingElement { ring: self.clone(), c }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupRingElement {
    ring: GroupRing,
    c: Vec<u64>,
}

impl GroupRingElement {
    pub fn ring(&self) -> &GroupRing {
        &self.ring
    }

    pub fn order(&self) -> usize {
        self.ring.order
    }

    pub fn flat(&self) -> &[u64] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> &[u64] {
        let d = self.ring.coeffs.dim();
        &self.c[i * d..(i + 1) * d]
    }

    fn coeff_mut(&mut self, i: usize) -> &mut [u64] {
        let d = self.ring.coeffs.dim();
        &mut self.c[i * d..(i + 1) * d]
    }

    /// Residue coefficients as a plain vector (panics for cyclotomic coefficients).
    pub fn residues(&self) -> Vec<u64> {
        assert_eq!(self.ring.coeffs.dim(), 1, "residue coefficients expected");
        self.c.clone()
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::MismatchedGroup);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self { ring: self.ring.clone(), c: self.ring.coeffs.add(&self.c, &other.c) })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self { ring: self.ring.clone(), c: self.ring.coeffs.sub(&self.c, &other.c) })
    }

    pub fn neg(&self) -> Self {
        Self { ring: self.ring.clone(), c: self.ring.coeffs.neg(&self.c) }
    }

    /// Multiplication by a coefficient-ring element.
    pub fn scale(&self, s: &[u64]) -> Self {
        let mut out = self.ring.zero();
        for i in 0..self.order() {
            let v = self.ring.coeffs.mul(self.coeff(i), s);
            out.coeff_mut(i).copy_from_slice(&v);
        }
        out
    }

    pub fn scale_int(&self, s: i64) -> Self {
        let base = *self.ring.base();
        let s = base.reduce(s as i128);
        Self { ring: self.ring.clone(), c: self.c.iter().map(|&x| base.mul(x, s)).collect() }
    }

    /// Cyclic convolution.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let m = self.order();
        match &self.ring.coeffs {
            CoeffRing::Residue(r) => {
                let q = r.modulus() as u128;
                let mut acc = vec![0u128; m];
                let nz: Vec<(usize, u64)> =
                    other.c.iter().copied().enumerate().filter(|&(_, x)| x != 0).collect();
                for (i, &a) in self.c.iter().enumerate() {
                    if a == 0 {
                        continue;
                    }
                    for &(j, b) in &nz {
                        let k = if i + j >= m { i + j - m } else { i + j };
                        acc[k] = (acc[k] + a as u128 * b as u128) % q;
                    }
                }
                Ok(Self { ring: self.ring.clone(), c: acc.into_iter().map(|x| x as u64).collect() })
            }
            CoeffRing::Cyclotomic(f) => {
                let mut out = self.ring.zero();
                for i in 0..m {
                    let a = self.coeff(i);
                    if a.iter().all(|&x| x == 0) {
                        continue;
                    }
                    for j in 0..m {
                        let b = other.coeff(j);
                        if b.iter().all(|&x| x == 0) {
                            continue;
                        }
                        let k = (i + j) % m;
                        let v = f.add(out.coeff(k), &f.mul(a, b));
                        out.coeff_mut(k).copy_from_slice(&v);
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = self.ring.one();
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b).expect("same ring");
            }
            b = b.mul(&b).expect("same ring");
            e >>= 1;
        }
        acc
    }

    /// Multiplication by γ^k.
    pub fn shift(&self, k: i64) -> Self {
        let m = self.order();
        let mut out = self.ring.zero();
        for i in 0..m {
            let j = (i as i64 + k).rem_euclid(m as i64) as usize;
            out.coeff_mut(j).copy_from_slice(self.coeff(i));
        }
        out
    }

    /// γ ↦ γ^{-1}.
    pub fn involution(&self) -> Self {
        let m = self.order();
        let mut out = self.ring.zero();
        for i in 0..m {
            out.coeff_mut((m - i) % m).copy_from_slice(self.coeff(i));
        }
        out
    }

    /// Sum of coefficients.
    pub fn augmentation(&self) -> Vec<u64> {
        let mut s = self.ring.coeffs.zero();
        for i in 0..self.order() {
            s = self.ring.coeffs.add(&s, self.coeff(i));
        }
        s
    }

    /// Pushforward along Γ_m → Γ_{m''}, γ_m ↦ γ_{m''}.
    pub fn project(&self, target: usize) -> Result<Self> {
        let m = self.order();
        if target == 0 || m % target != 0 {
            return Err(Error::NotDivisor { divisor: target, order: m });
        }
        let ring = self.ring.with_order(target)?;
        let mut out = ring.zero();
        for i in 0..m {
            let k = i % target;
            let v = self.ring.coeffs.add(out.coeff(k), self.coeff(i));
            out.coeff_mut(k).copy_from_slice(&v);
        }
        Ok(out)
    }

    /// Corestriction from Γ_{m'p^{r-1}} to Γ_{m'p^r}: the sum over the kernel of the
    /// projection applied to any lift.
    pub fn cores(&self, target: usize) -> Result<Self> {
        let m = self.order();
        let p = self.ring.base().p() as usize;
        if target != m * p {
            return Err(Error::BadTower { source_order: m, target_order: target });
        }
        let ring = self.ring.with_order(target)?;
        let mut out = ring.zero();
        for j in 0..target {
            out.coeff_mut(j).copy_from_slice(self.coeff(j % m));
        }
        Ok(out)
    }

    /// A coefficientwise lift to Γ_{target}: the coefficient of γ^i is placed at
    /// γ^{i + m·t_i} where t_i = `offsets[i]`.
    pub fn lift(&self, target: usize, offsets: &[usize]) -> Result<Self> {
        let m = self.order();
        if target % m != 0 {
            return Err(Error::NotDivisor { divisor: m, order: target });
        }
        let k = target / m;
        let ring = self.ring.with_order(target)?;
        let mut out = ring.zero();
        for i in 0..m {
            let t = offsets.get(i).copied().unwrap_or(0) % k;
            out.coeff_mut(i + m * t).copy_from_slice(self.coeff(i));
        }
        Ok(out)
    }

    /// Equality up to multiplication by some γ^k and a unit of Z/p^n. Returns the shift k
    /// and the unit u with self = u·γ^k·other.
    pub fn equal_up_to_shift_unit(&self, other: &Self) -> Option<(usize, u64)> {
        if self.ring != other.ring || self.ring.coeffs.dim() != 1 {
            return None;
        }
        let r = *self.ring.base();
        if self.is_zero() || other.is_zero() {
            return (self.is_zero() && other.is_zero()).then_some((0, 1));
        }
        for k in 0..self.order() {
            let b = other.shift(k as i64);
            let (i0, v) = b
                .c
                .iter()
                .enumerate()
                .map(|(i, &x)| (i, r.valuation(x)))
                .min_by_key(|&(_, v)| v)
                .expect("nonzero");
            if self.c[i0] % r.p().pow(v) != 0 {
                continue;
            }
            let pv = r.p().pow(v);
            let step = r.modulus() / pv;
            let base_u = r.mul(self.c[i0] / pv, r.inv(b.c[i0] / pv).ok()?) % step;
            for t in 0..pv {
                let u = base_u + t * step;
                if r.is_unit(u) && b.c.iter().zip(&self.c).all(|(&y, &x)| r.mul(u, y) == x) {
                    return Some((k, u));
                }
            }
        }
        None
    }
}

/// Φ_{p^r}(γ^{m'}) in R[Γ_{m'p^r}].
pub fn cyclotomic_at_generator(ring: &GroupRing) -> Result<GroupRingElement> {
    let m = ring.order();
    let p = ring.base().p() as usize;
    if m % p != 0 {
        return Err(Error::BadTower { source_order: m, target_order: m });
    }
    let step = m / p;
    let mut out = ring.zero();
    for i in 0..p {
        out = out.add(&ring.monomial((i * step) as i64))?;
    }
    Ok(out)
}

/// A character of Γ_m, determined by the image of the generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Character {
    order: usize,
    target: CoeffRing,
    image: Vec<u64>,
}

impl Character {
    pub fn new(order: usize, target: CoeffRing, image: Vec<u64>) -> Result<Self> {
        if target.pow(&image, order as u64) != target.one() {
            return Err(Error::Invalid("character image is not an m-th root of unity".into()));
        }
        Ok(Self { order, target, image })
    }

    pub fn trivial(order: usize, base: ResidueRing) -> Self {
        Self { order, target: CoeffRing::Residue(base), image: vec![1] }
    }

    /// γ ↦ X^k in a factor ring of X^{m'} - 1 with m' | order.
    pub fn from_factor(order: usize, ring: CyclotomicFactorRing, k: u64) -> Result<Self> {
        if order as u64 % ring.cyclic_order() != 0 {
            return Err(Error::NotDivisor { divisor: ring.cyclic_order() as usize, order });
        }
        let image = ring.pow(&ring.generator(), k);
        Ok(Self { order, target: CoeffRing::Cyclotomic(ring), image })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn target(&self) -> &CoeffRing {
        &self.target
    }

    pub fn image(&self) -> &[u64] {
        &self.image
    }

    pub fn pow(&self, k: u64) -> Self {
        Self { order: self.order, target: self.target.clone(), image: self.target.pow(&self.image, k) }
    }

    pub fn inverse(&self) -> Self {
        self.pow(self.order as u64 - 1)
    }

    pub fn is_trivial(&self) -> bool {
        self.image == self.target.one()
    }

    /// Σ_i a_i χ(γ)^i.
    pub fn eval(&self, a: &GroupRingElement) -> Result<Vec<u64>> {
        if a.order() != self.order || a.ring.base() != self.target.base() {
            return Err(Error::MismatchedGroup);
        }
        let same = a.ring.coeffs == self.target;
        if !same && a.ring.coeffs.dim() != 1 {
            return Err(Error::MismatchedGroup);
        }
        let mut acc = self.target.zero();
        let mut z = self.target.one();
        for i in 0..self.order {
            let c = if same { a.coeff(i).to_vec() } else { self.target.scalar(a.coeff(i)[0]) };
            acc = self.target.add(&acc, &self.target.mul(&c, &z));
            z = self.target.mul(&z, &self.image);
        }
        Ok(acc)
    }

    /// Z/p^n-matrix of the evaluation map on the flat basis of `ring`.
    fn eval_matrix(&self, ring: &GroupRing) -> Result<Vec<Vec<u64>>> {
        ring.basis().iter().map(|b| self.eval(b)).collect()
    }
}

/// Additive span of an ideal of a group ring.
pub fn ideal_span(ring: &GroupRing, gens: &[GroupRingElement]) -> HowellBasis {
    let rows: Vec<Vec<u64>> = gens
        .iter()
        .flat_map(|g| ring.basis().into_iter().map(move |b| g.mul(&b).expect("same ring").c))
        .collect();
    HowellBasis::new(*ring.base(), ring.dim(), &rows)
}

/// A small set of ideal generators whose ideal is the span `h`.
fn ideal_generators(ring: &GroupRing, h: &HowellBasis) -> Vec<GroupRingElement> {
    let mut gens: Vec<GroupRingElement> = Vec::new();
    let mut cur = HowellBasis::new(*ring.base(), ring.dim(), &[]);
    for row in h.rows() {
        if cur.contains(row) {
            continue;
        }
        gens.push(ring.from_flat(row.clone()).expect("dimension"));
        cur = ideal_span(ring, &gens);
        if cur == *h {
            break;
        }
    }
    gens
}

/// Order of vanishing of θ at χ: the r with θ ∈ I_χ^r \ I_χ^{r+1}, or `None` for ∞.
pub fn vanishing_order(theta: &GroupRingElement, chi: &Character) -> Result<Option<u32>> {
    let ring = theta.ring().clone();
    let base = *ring.base();
    let emat = chi.eval_matrix(&ring)?;
    let kernel = left_kernel(&base, &emat, chi.target.dim());
    // kernel coordinates are with respect to the flat basis, i.e. already flat elements
    let i1 = kernel;
    if !i1.contains(&theta.c) {
        return Ok(Some(0));
    }
    let gens = ideal_generators(&ring, &i1);
    let mut power = i1;
    let mut r = 1u32;
    loop {
        let basis: Vec<GroupRingElement> =
            power.rows().iter().map(|row| ring.from_flat(row.clone()).expect("dimension")).collect();
        let rows: Vec<Vec<u64>> = basis
            .iter()
            .flat_map(|b| gens.iter().map(move |g| b.mul(g).expect("same ring").c))
            .collect();
        let next = HowellBasis::new(base, ring.dim(), &rows);
        if !next.contains(&theta.c) {
            return Ok(Some(r));
        }
        if next == power {
            return Ok(None);
        }
        power = next;
        r += 1;
    }
}

/// Splits m = m'·p^r with gcd(m', p) = 1.
pub fn split_order(m: usize, p: u64) -> (usize, u32) {
    let mut mp = m;
    let mut r = 0;
    while mp % p as usize == 0 {
        mp /= p as usize;
        r += 1;
    }
    (mp, r)
}

/// The decomposition Z/p^n[Γ_{m'p^r}] = ⊕_ω O_{ω,n}[Γ_{p^r}] along the factors of X^{m'} - 1.
#[derive(Clone, Debug)]
pub struct IsotypicDecomposition {
    base: ResidueRing,
    m_prime: usize,
    p_power: usize,
    factors: Vec<CyclotomicFactorRing>,
    /// Idempotents e_ω in Z/p^n[X]/(X^{m'} - 1), as coefficient vectors of length m'.
    idempotents: Vec<Vec<u64>>,
}

impl IsotypicDecomposition {
    pub fn new(order: usize, base: ResidueRing) -> Result<Self> {
        let p = base.p();
        let (m_prime, r) = split_order(order, p);
        if gcd(m_prime as u64, p) != 1 {
            return Err(Error::NotCoprime { a: m_prime as u64, b: p });
        }
        let factors = factor_cyclotomic(m_prime as u64, p, base.n())?;
        let mut xm = vec![0u64; m_prime + 1];
        xm[0] = base.neg(1);
        xm[m_prime] = 1;
        let mut idempotents = Vec::with_capacity(factors.len());
        for f in &factors {
            let (h, rem) = poly::divrem(&base, &xm, f.modulus_poly())?;
            debug_assert!(rem.is_empty());
            let hinv = f.inv(&f.element(&h))?;
            let mut e = poly::rem(&base, &poly::mul(&base, &h, &poly::trim(hinv)), &xm)?;
            e.resize(m_prime, 0);
            idempotents.push(e);
        }
        Ok(Self { base, m_prime, p_power: p.pow(r) as usize, factors, idempotents })
    }

    pub fn factors(&self) -> &[CyclotomicFactorRing] {
        &self.factors
    }

    pub fn m_prime(&self) -> usize {
        self.m_prime
    }

    pub fn p_power(&self) -> usize {
        self.p_power
    }

    /// e_ω as an element of Z/p^n[Γ_{m'}] (γ_{m'} ↦ X).
    pub fn idempotent(&self, i: usize) -> GroupRingElement {
        let ring = GroupRing::over_residue(self.m_prime, self.base).expect("positive order");
        ring.from_flat(self.idempotents[i].clone()).expect("dimension")
    }

    /// γ^k = γ_{m'}^a γ_{p^r}^b with γ_{m'} = γ^{p^r}, γ_{p^r} = γ^{m'}.
    fn coords(&self, k: usize) -> (usize, usize) {
        let (mp, pr) = (self.m_prime as u64, self.p_power as u64);
        let a = if mp == 1 {
            0
        } else {
            ((k as u64 % mp) * inv_mod_u64(pr % mp, mp) % mp) as usize
        };
        let b = if pr == 1 { 0 } else { ((k as u64 % pr) * inv_mod_u64(mp % pr, pr) % pr) as usize };
        (a, b)
    }

    pub fn split(&self, a: &GroupRingElement) -> Result<Vec<GroupRingElement>> {
        if a.ring.coeffs.dim() != 1
            || *a.ring.base() != self.base
            || a.order() != self.m_prime * self.p_power
        {
            return Err(Error::MismatchedGroup);
        }
        let mut out: Vec<GroupRingElement> = self
            .factors
            .iter()
            .map(|f| GroupRing::new(self.p_power, CoeffRing::Cyclotomic(f.clone())).map(|g| g.zero()))
            .collect::<Result<_>>()?;
        for k in 0..a.order() {
            let c = a.c[k];
            if c == 0 {
                continue;
            }
            let (ea, eb) = self.coords(k);
            for (f, comp) in self.factors.iter().zip(out.iter_mut()) {
                let mut xp = vec![0u64; ea + 1];
                xp[ea] = c;
                let v = f.add(comp.coeff(eb), &f.element(&xp));
                comp.coeff_mut(eb).copy_from_slice(&v);
            }
        }
        Ok(out)
    }

    pub fn reconstruct(&self, comps: &[GroupRingElement]) -> Result<GroupRingElement> {
        if comps.len() != self.factors.len() {
            return Err(Error::MismatchedGroup);
        }
        let m = self.m_prime * self.p_power;
        let ring = GroupRing::over_residue(m, self.base)?;
        let mut out = vec![0u64; m];
        let mut xm = vec![0u64; self.m_prime + 1];
        xm[0] = self.base.neg(1);
        xm[self.m_prime] = 1;
        // γ_{m'}^a γ_{p^r}^b = γ^{a p^r + b m'}
        for (i, comp) in comps.iter().enumerate() {
            if comp.order() != self.p_power {
                return Err(Error::MismatchedGroup);
            }
            for b in 0..self.p_power {
                let c = comp.coeff(b);
                if c.iter().all(|&x| x == 0) {
                    continue;
                }
                let lifted = poly::rem(
                    &self.base,
                    &poly::mul(&self.base, &poly::trim(c.to_vec()), &poly::trim(self.idempotents[i].clone())),
                    &xm,
                )?;
                for (a, &v) in lifted.iter().enumerate() {
                    let k = (a * self.p_power + b * self.m_prime) % m;
                    out[k] = self.base.add(out[k], v);
                }
            }
        }
        ring.from_flat(out)
    }
}

fn inv_mod_u64(a: u64, m: u64) -> u64 {
    let (_, x, _) = crate::arith::residue::egcd(a as i128, m as i128);
    x.rem_euclid(m as i128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(p: u64, n: u32) -> ResidueRing {
        ResidueRing::new(p, n).unwrap()
    }

    #[test]
    fn product_examples() {
        let g = GroupRing::over_residue(3, z(3, 2)).unwrap();
        let a = g.from_ints(&[1, 1, 0]).unwrap();
        let b = g.from_ints(&[1, -1, 0]).unwrap();
        assert_eq!(a.mul(&b).unwrap(), g.from_ints(&[1, 0, -1]).unwrap());
        let nrm = g.norm_element();
        assert_eq!(nrm.mul(&g.monomial(1)).unwrap(), nrm);
    }

    #[test]
    fn involution_examples() {
        let g = GroupRing::over_residue(5, z(5, 1)).unwrap();
        assert_eq!(g.monomial(1).involution(), g.monomial(4));
        assert_eq!(g.norm_element().involution(), g.norm_element());
    }

    #[test]
    fn cores_examples() {
        let g = GroupRing::over_residue(3, z(7, 2)).unwrap();
        let c = g.one().cores(21).unwrap();
        let expect = (0..7).fold(GroupRing::over_residue(21, z(7, 2)).unwrap().zero(), |acc, i| {
            acc.add(&GroupRing::over_residue(21, z(7, 2)).unwrap().monomial(3 * i)).unwrap()
        });
        assert_eq!(c, expect);
        assert!(matches!(g.one().cores(9), Err(Error::BadTower { .. })));
    }

    #[test]
    fn project_examples() {
        let g = GroupRing::over_residue(12, z(5, 2)).unwrap();
        assert_eq!(g.monomial(7).project(4).unwrap(), g.with_order(4).unwrap().monomial(3));
        assert_eq!(
            g.norm_element().project(4).unwrap(),
            g.with_order(4).unwrap().norm_element().scale_int(3)
        );
        assert!(g.one().project(5).is_err());
    }

    #[test]
    fn vanishing_examples() {
        let g = GroupRing::over_residue(5, z(5, 1)).unwrap();
        let chi = Character::trivial(5, z(5, 1));
        let t = g.monomial(1).sub(&g.one()).unwrap();
        assert_eq!(vanishing_order(&t.pow(2), &chi).unwrap(), Some(2));
        assert_eq!(vanishing_order(&g.zero(), &chi).unwrap(), None);
        assert_eq!(vanishing_order(&g.one(), &chi).unwrap(), Some(0));
    }

    #[test]
    fn isotypic_examples() {
        let d = IsotypicDecomposition::new(3, z(5, 2)).unwrap();
        let degs: Vec<usize> = d.factors().iter().map(|f| f.degree()).collect();
        assert_eq!(degs, vec![1, 2]);
        let d1 = IsotypicDecomposition::new(7, z(7, 1)).unwrap();
        let g = GroupRing::over_residue(7, z(7, 1)).unwrap();
        let a = g.from_ints(&[1, 2, 3, 4, 5, 6, 0]).unwrap();
        let parts = d1.split(&a).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].flat(), a.flat());
        assert_eq!(d1.reconstruct(&parts).unwrap(), a);
    }

    #[test]
    fn shift_unit_comparator() {
        let g = GroupRing::over_residue(4, z(7, 2)).unwrap();
        let a = g.from_ints(&[3, 14, 0, 5]).unwrap();
        let b = a.shift(3).scale_int(10);
        let (k, u) = b.equal_up_to_shift_unit(&a).unwrap();
        assert_eq!(a.shift(k as i64).scale_int(u as i64), b);
    }
}
