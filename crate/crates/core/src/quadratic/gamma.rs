use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::class_group::RingClassGroup;
use super::forms::{prime_form, reduced_forms, QuadForm};
use crate::arith::residue::{crt, factorize, gcd, kronecker};
use crate::arith::zmatrix::{smith_normal_form, ZMatrix};
use crate::error::{Error, Result};

/// m_0 = ∏ ℓ^{r+1} for m = ∏ ℓ^r.
pub fn m0_of(m: u64) -> u64 {
    factorize(m).iter().map(|&(l, r)| l.pow(r + 1)).product()
}

/// The ℓ-primary part of Z/d: its order ℓ^{v_ℓ(d)}.
fn ell_part(d: u64, ell: u64) -> u64 {
    let mut q = 1;
    let mut x = d;
    while x % ell == 0 {
        x /= ell;
        q *= ell;
    }
    q
}

/// One factor Q_ℓ = Gal(K(ℓ^r)/K), the maximal ℓ-quotient of G_{ℓ^{r+1}}.
#[derive(Clone, Debug)]
struct EllPart {
    ell: u64,
    r: u32,
    group: RingClassGroup,
    /// Invariant-factor coordinate carrying the ℓ-part (None when r = 0).
    coord: Option<usize>,
}

impl EllPart {
    fn build(d_k: i64, ell: u64, r: u32) -> Result<(Self, Vec<u64>)> {
        let group = RingClassGroup::new(d_k, ell.pow(r + 1))?;
        let sylow: Vec<(usize, u64)> = group
            .invariants()
            .iter()
            .enumerate()
            .map(|(i, &d)| (i, ell_part(d, ell)))
            .filter(|&(_, q)| q > 1)
            .collect();
        let shape: Vec<u64> = sylow.iter().map(|&(_, q)| q).collect();
        let coord = sylow.first().map(|&(i, _)| i);
        Ok((Self { ell, r, group, coord }, shape))
    }

    fn modulus(&self) -> u64 {
        self.ell.pow(self.r)
    }

    /// Log in Z/ℓ^r of the image of a class of G_{m_0}.
    fn image(&self, f: &QuadForm, m0: u64) -> Result<u64> {
        let Some(j) = self.coord else { return Ok(0) };
        let g = self.group.push_from(f, m0)?;
        Ok(self.group.log(&g)?[j] % self.modulus())
    }
}

/// Outcome of the exact-degree assumption for (K, m).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactDegree {
    pub pass: bool,
    pub fast_path: bool,
    pub witness: String,
}

/// The exact-degree test: H(1) ∩ K(m) = K with each Q_ℓ cyclic of order ℓ^r.
pub fn check_exact_degree(d_k: i64, m: u64) -> Result<ExactDegree> {
    if m == 1 {
        return Ok(ExactDegree { pass: true, fast_path: true, witness: "m = 1".into() });
    }
    let h_k = reduced_forms(d_k)?.len() as u64;
    if gcd(h_k, m) == 1 {
        return Ok(ExactDegree { pass: true, fast_path: true, witness: format!("gcd(h_K = {h_k}, m = {m}) = 1") });
    }
    let mut parts = Vec::new();
    for (ell, r) in factorize(m) {
        let (part, shape) = EllPart::build(d_k, ell, r)?;
        if shape != vec![ell.pow(r)] {
            return Ok(ExactDegree {
                pass: false,
                fast_path: false,
                witness: format!("{ell}-part of G_{} has invariants {:?}, expected [{}]", ell.pow(r + 1), shape, ell.pow(r)),
            });
        }
        parts.push(part);
    }
    let m0 = m0_of(m);
    let big = RingClassGroup::new(d_k, m0)?;
    let base = RingClassGroup::new(d_k, 1)?;
    // images of the generators of G_{m_0} in Pic(O_K) × Γ_m, plus the target relations
    let mut rows: ZMatrix = Vec::new();
    let width = base.invariants().len() + 1;
    for g in big.generators() {
        let mut row: Vec<BigInt> = base.log(&base.push_from(g, m0)?)?.into_iter().map(BigInt::from).collect();
        row.push(BigInt::from(gamma_log(&parts, g, m0, m)?));
        rows.push(row);
    }
    for i in 0..width {
        let mut row = vec![BigInt::from(0); width];
        row[i] = BigInt::from(if i + 1 < width { base.invariants()[i] } else { m });
        rows.push(row);
    }
    let (d, _, _) = smith_normal_form(&rows);
    let index: BigInt = (0..width).map(|i| d[i][i].clone()).product();
    let pass = index.is_one();
    Ok(ExactDegree {
        pass,
        fast_path: false,
        witness: format!("index of the image of G_{m0} in Pic(O_K) x Gamma_{m} is {index}"),
    })
}

fn gamma_log(parts: &[EllPart], f: &QuadForm, m0: u64, m: u64) -> Result<u64> {
    let residues: Vec<(u64, u64)> =
        parts.iter().map(|p| Ok((p.image(f, m0)?, p.modulus()))).collect::<Result<_>>()?;
    let (x, modulus) = crt(&residues)?;
    debug_assert_eq!(modulus as u64, m);
    Ok(x as u64)
}

/// The surjection G_{m_0} → Γ_m ≅ Z/m, recorded as discrete logs of every class of G_{m_0}.
#[derive(Clone, Debug)]
pub struct GammaQuotient {
    d_k: i64,
    m: u64,
    m0: u64,
    group: RingClassGroup,
    logs: HashMap<QuadForm, u64>,
}

impl GammaQuotient {
    pub fn new(d_k: i64, m: u64) -> Result<Self> {
        let exact = check_exact_degree(d_k, m)?;
        if !exact.pass {
            return Err(Error::AssumptionFailed(exact.witness));
        }
        let m0 = m0_of(m);
        let group = RingClassGroup::new(d_k, m0)?;
        let mut parts = Vec::new();
        for (ell, r) in factorize(m) {
            let (part, shape) = EllPart::build(d_k, ell, r)?;
            if shape != vec![ell.pow(r)] {
                return Err(Error::AssumptionFailed(format!(
                    "{ell}-part of G_{} is {:?}, not cyclic of order {}",
                    ell.pow(r + 1),
                    shape,
                    ell.pow(r)
                )));
            }
            parts.push(part);
        }
        let mut logs = HashMap::with_capacity(group.order());
        for f in group.elements() {
            logs.insert(*f, if m == 1 { 0 } else { gamma_log(&parts, f, m0, m)? });
        }
        Ok(Self { d_k, m, m0, group, logs })
    }

    pub fn d_k(&self) -> i64 {
        self.d_k
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn m0(&self) -> u64 {
        self.m0
    }

    /// G_{m_0}.
    pub fn group(&self) -> &RingClassGroup {
        &self.group
    }

    /// Exponent k with [f] ↦ γ^k.
    pub fn image(&self, f: &QuadForm) -> Result<u64> {
        if f.discriminant() != self.group.discriminant() {
            return Err(Error::MismatchedDiscriminant(f.discriminant(), self.group.discriminant()));
        }
        self.logs.get(&f.reduce()).copied().ok_or(Error::Invalid(format!("{f} not in G_{}", self.m0)))
    }

    /// Image of a class of a higher conductor divisible by m_0.
    pub fn image_from(&self, f: &QuadForm, conductor: u64) -> Result<u64> {
        self.image(&self.group.push_from(f, conductor)?)
    }

    /// Renormalizes the generator of Γ_m to be the image of `f`.
    pub fn with_generator(mut self, f: &QuadForm) -> Result<Self> {
        if self.m == 1 {
            return Ok(self);
        }
        let k = self.image(f)?;
        if gcd(k, self.m) != 1 {
            return Err(Error::Invalid(format!("{f} does not generate Gamma_{}", self.m)));
        }
        let inv = modular_inverse(k, self.m);
        for v in self.logs.values_mut() {
            *v = ((*v as u128 * inv as u128) % self.m as u128) as u64;
        }
        Ok(self)
    }

    /// A class of G_{m_0} mapping to the generator γ, the least in lexicographic order.
    pub fn generator_form(&self) -> QuadForm {
        let target = 1 % self.m;
        *self.group.elements().iter().find(|f| self.logs[f] == target).expect("surjective")
    }

    /// Geometric Frobenius classes (Fr_𝔭, Fr_𝔭̄) in Γ_m for a split prime p ∤ m_0.
    pub fn frobenius(&self, p: u64) -> Result<(u64, u64)> {
        if kronecker(self.d_k, p) != 1 {
            return Err(Error::NotSplit { p, d: self.d_k });
        }
        if self.m0 % p == 0 {
            return Err(Error::NotCoprime { a: p, b: self.m0 });
        }
        let pf = prime_form(self.group.discriminant(), p).ok_or(Error::NotSplit { p, d: self.d_k })?;
        // the class of 𝔭 is pf; geometric Frobenius is its inverse
        let fr = self.image(&pf.inverse())?;
        let fr_bar = self.image(&pf.reduce())?;
        Ok((fr, fr_bar))
    }
}

fn modular_inverse(k: u64, m: u64) -> u64 {
    let (_, x, _) = crate::arith::residue::egcd(k as i128, m as i128);
    x.rem_euclid(m as i128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_degree_examples() {
        assert!(check_exact_degree(-4, 5).unwrap().pass);
        let r = check_exact_degree(-8, 3).unwrap();
        assert!(r.pass);
        let r = check_exact_degree(-23, 3).unwrap();
        assert!(!r.pass, "{}", r.witness);
    }

    #[test]
    fn gamma_examples() {
        let g = GammaQuotient::new(-8, 1).unwrap();
        assert_eq!(g.image(&QuadForm::principal(-8)).unwrap(), 0);
        let g = GammaQuotient::new(-8, 3).unwrap();
        assert_eq!(g.group().order(), 6);
        let images: std::collections::BTreeSet<u64> =
            g.group().elements().iter().map(|f| g.image(f).unwrap()).collect();
        assert_eq!(images.len(), 3);
        assert_eq!(g.image(&g.group().identity()).unwrap(), 0);
        assert!(matches!(GammaQuotient::new(-23, 3), Err(Error::AssumptionFailed(_))));
    }

    #[test]
    fn frobenius_examples() {
        let g = GammaQuotient::new(-8, 3).unwrap();
        let (fr, frb) = g.frobenius(11).unwrap();
        assert_eq!((fr + frb) % 3, 0);
        let pf = prime_form(-648, 11).unwrap();
        assert_eq!(pf.a, 11);
        assert_eq!(frb, g.image(&pf).unwrap());
        assert!(matches!(g.frobenius(5), Err(Error::NotSplit { .. })));
        let g1 = GammaQuotient::new(-20, 1).unwrap();
        assert_eq!(g1.frobenius(7).unwrap(), (0, 0));
    }

    #[test]
    fn generator_renormalization() {
        let g = GammaQuotient::new(-20, 7).unwrap();
        let f = g.generator_form();
        assert_eq!(g.image(&f).unwrap(), 1);
        let other = g.group().elements().iter().find(|x| g.image(x).unwrap() == 3).copied().unwrap();
        let g2 = g.with_generator(&other).unwrap();
        assert_eq!(g2.image(&other).unwrap(), 1);
    }
}
