//! Elliptic curves over Q: point counts, unit roots, admissible primes and the hypothesis
//! report.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::cyclotomic::factor_cyclotomic;
use crate::arith::residue::{divisors, euler_phi, factorize, gcd, is_prime, isqrt, kronecker, primes_up_to, ResidueRing};
use crate::error::{Error, Result};
use crate::quadratic::{check_exact_degree, splitting_type, GammaQuotient, SplittingType};

pub const DEFAULT_POINT_COUNT_BOUND: u64 = 1_000_000;

/// y² + a1 xy + a3 y = x³ + a2 x² + a4 x + a6, with user-supplied conductor.
///
/// The model is trusted to be globally minimal when `minimal` is set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipticCurveQ {
    pub a: [i64; 5],
    pub conductor: u64,
    #[serde(default = "yes")]
    pub minimal: bool,
    #[serde(default)]
    pub cm: bool,
}

fn yes() -> bool {
    true
}

impl EllipticCurveQ {
    pub fn new(a: [i64; 5], conductor: u64) -> Result<Self> {
        let e = Self { a, conductor, minimal: true, cm: false };
        if e.discriminant() == 0 {
            return Err(Error::Invalid("singular Weierstrass model".into()));
        }
        Ok(e)
    }

    /// Curve 11a1: (0, -1, 1, -10, -20).
    pub fn curve_11a() -> Self {
        Self::new([0, -1, 1, -10, -20], 11).expect("nonsingular")
    }

    pub fn b_invariants(&self) -> (i128, i128, i128, i128) {
        let [a1, a2, a3, a4, a6] = self.a.map(|x| x as i128);
        let b2 = a1 * a1 + 4 * a2;
        let b4 = 2 * a4 + a1 * a3;
        let b6 = a3 * a3 + 4 * a6;
        let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        (b2, b4, b6, b8)
    }

    pub fn discriminant(&self) -> i128 {
        let (b2, b4, b6, b8) = self.b_invariants();
        -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    }

    /// v_q(Δ).
    pub fn disc_valuation(&self, q: u64) -> u32 {
        let mut d = self.discriminant().unsigned_abs();
        let mut v = 0;
        while d % q as u128 == 0 {
            d /= q as u128;
            v += 1;
        }
        v
    }

    /// #E(F_ℓ) including the point at infinity, for ℓ of good reduction.
    pub fn count_points(&self, ell: u64) -> Result<u64> {
        self.check_good(ell)?;
        let l = ell as i128;
        if ell == 2 {
            let [a1, a2, a3, a4, a6] = self.a.map(|x| (x as i128).rem_euclid(2));
            let mut n = 1;
            for x in 0..2i128 {
                for y in 0..2i128 {
                    if (y * y + a1 * x * y + a3 * y - x * x * x - a2 * x * x - a4 * x - a6).rem_euclid(2) == 0 {
                        n += 1;
                    }
                }
            }
            return Ok(n);
        }
        // (2y + a1 x + a3)² = 4x³ + b2 x² + 2 b4 x + b6
        let (b2, b4, b6, _) = self.b_invariants();
        let (b2, b4, b6) = (b2.rem_euclid(l), b4.rem_euclid(l), b6.rem_euclid(l));
        let mut chi = vec![-1i8; ell as usize];
        chi[0] = 0;
        for y in 1..ell {
            chi[((y as u128 * y as u128) % ell as u128) as usize] = 1;
        }
        let mut n: i64 = 1;
        for x in 0..l {
            let f = (((4 * x + b2) % l * x % l + 2 * b4) % l * x % l + b6) % l;
            n += 1 + chi[f as usize] as i64;
        }
        Ok(n as u64)
    }

    fn check_good(&self, ell: u64) -> Result<()> {
        if !is_prime(ell) {
            return Err(Error::NotPrime(ell));
        }
        if self.conductor % ell == 0 || self.discriminant() % ell as i128 == 0 {
            return Err(Error::BadReduction(ell));
        }
        if ell > DEFAULT_POINT_COUNT_BOUND {
            return Err(Error::TooLarge(ell));
        }
        Ok(())
    }

    /// a_ℓ = ℓ + 1 - #E(F_ℓ), with the Hasse bound enforced.
    pub fn a_ell(&self, ell: u64) -> Result<i64> {
        let n = self.count_points(ell)?;
        let a = ell as i64 + 1 - n as i64;
        if (a as i128) * (a as i128) > 4 * ell as i128 {
            return Err(Error::Invalid(format!("Hasse bound violated at {ell}: a = {a}")));
        }
        Ok(a)
    }

    /// Unit root of X² - a_p X + p modulo p^n.
    pub fn unit_root(&self, p: u64, n: u32) -> Result<u64> {
        let ap = self.a_ell(p)?;
        unit_root_of(ap, p, n)
    }

    /// N⁻: primes of N inert in K (N assumed prime to d_K).
    pub fn n_minus(&self, d_k: i64) -> u64 {
        factorize(self.conductor)
            .iter()
            .filter(|&&(q, _)| splitting_type(d_k, q) == SplittingType::Inert)
            .map(|&(q, e)| q.pow(e))
            .product()
    }

    pub fn n_plus(&self, d_k: i64) -> u64 {
        self.conductor / self.n_minus(d_k)
    }
}

/// Hensel lift of the unit root of X² - a X + p from α ≡ a (mod p).
pub fn unit_root_of(a: i64, p: u64, n: u32) -> Result<u64> {
    let ring = ResidueRing::new(p, n)?;
    let ar = ring.reduce(a as i128);
    if ar % p == 0 {
        return Err(Error::Supersingular(p));
    }
    let mut x = ar % p;
    for _ in 0..n {
        // x ← x - f(x)/f'(x)
        let f = ring.add(ring.sub(ring.mul(x, x), ring.mul(ar, x)), p % ring.modulus());
        let df = ring.sub(ring.mul(2, x), ar);
        x = ring.sub(x, ring.mul(f, ring.inv(df)?));
    }
    debug_assert_eq!(ring.add(ring.sub(ring.mul(x, x), ring.mul(ar, x)), p % ring.modulus()), 0);
    Ok(x)
}

/// An n-admissible prime with the signs ε satisfying ε a_ℓ ≡ ℓ + 1 (mod p^n).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissiblePrime {
    pub ell: u64,
    pub a_ell: i64,
    pub signs: Vec<i8>,
}

/// Primes ℓ ≤ bound with ℓ ∤ pN, ℓ inert in K, ℓ² ≢ 1 (mod p) and ε a_ℓ ≡ ℓ + 1 (mod p^n).
pub fn admissible_sieve(e: &EllipticCurveQ, d_k: i64, p: u64, n: u32, bound: u64) -> Result<Vec<AdmissiblePrime>> {
    if e.conductor % p == 0 {
        return Err(Error::BadConfig(format!("p = {p} divides the conductor")));
    }
    let ring = ResidueRing::new(p, n)?;
    let out: Vec<Option<AdmissiblePrime>> = primes_up_to(bound)
        .par_iter()
        .map(|&ell| -> Result<Option<AdmissiblePrime>> {
            if (p * e.conductor) % ell == 0 || e.discriminant() % ell as i128 == 0 {
                return Ok(None);
            }
            if kronecker(d_k, ell) != -1 {
                return Ok(None);
            }
            if (ell as u128 * ell as u128) % p as u128 == 1 {
                return Ok(None);
            }
            let a = e.a_ell(ell)?;
            let target = ring.reduce(ell as i128 + 1);
            let signs: Vec<i8> =
                [1i8, -1].into_iter().filter(|&s| ring.reduce(s as i128 * a as i128) == target).collect();
            Ok((!signs.is_empty()).then_some(AdmissiblePrime { ell, a_ell: a, signs }))
        })
        .collect::<Result<_>>()?;
    Ok(out.into_iter().flatten().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Vacuous,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub witness: String,
}

impl Verdict {
    fn new(pass: bool, witness: impl Into<String>) -> Self {
        Self { status: if pass { Status::Pass } else { Status::Fail }, witness: witness.into() }
    }

    pub fn ok(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Verdicts keyed by condition name: cr, po, ihara, ordinary, parity, exact_degree, big_image.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub verdicts: BTreeMap<String, Verdict>,
}

impl HypothesisReport {
    pub fn get(&self, name: &str) -> &Verdict {
        &self.verdicts[name]
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(Verdict::ok)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.verdicts.iter().filter(|(_, v)| !v.ok()).map(|(k, _)| k.as_str()).collect()
    }
}

/// Evaluates the standing hypotheses for (E, K, p, m').
pub fn check_hypotheses(
    e: &EllipticCurveQ,
    d_k: i64,
    p: u64,
    m_prime: u64,
    big_image_declared: bool,
) -> Result<HypothesisReport> {
    if gcd(d_k.unsigned_abs(), e.conductor * p) != 1 {
        return Err(Error::BadConfig(format!("d_K = {d_k} is not prime to Np")));
    }
    if m_prime % p == 0 {
        return Err(Error::BadConfig(format!("p = {p} divides m' = {m_prime}")));
    }
    let mut v = BTreeMap::new();
    let n_minus = e.n_minus(d_k);
    let n_plus = e.n_plus(d_k);
    let fac_minus = factorize(n_minus);

    let squarefree = fac_minus.iter().all(|&(_, k)| k == 1);
    v.insert(
        "parity".to_string(),
        Verdict::new(
            squarefree && fac_minus.len() % 2 == 1,
            format!("N- = {n_minus} with {} prime factors, square-free: {squarefree}", fac_minus.len()),
        ),
    );

    let ap = e.a_ell(p)?;
    let ordinary = ap.rem_euclid(p as i64) != 0;
    v.insert("ordinary".to_string(), Verdict::new(ordinary, format!("a_{p} = {ap}")));

    // residual ramification at q ∥ N⁻: unramified iff p | v_q(Δ) (Tate curve)
    let relevant: Vec<u64> = fac_minus
        .iter()
        .map(|&(q, _)| q)
        .filter(|&q| q % p == 1 || q % p == p - 1)
        .collect();
    let cr = if relevant.is_empty() {
        Verdict {
            status: Status::Vacuous,
            witness: format!("no prime of N- = {n_minus} is congruent to +-1 mod {p}"),
        }
    } else {
        let bad: Vec<String> = relevant
            .iter()
            .filter(|&&q| e.disc_valuation(q) % p as u32 == 0)
            .map(|q| format!("v_{q}(Delta) = {}", e.disc_valuation(*q)))
            .collect();
        Verdict::new(
            bad.is_empty(),
            if bad.is_empty() {
                format!("ramified at {relevant:?}")
            } else {
                format!("unramified: {}", bad.join(", "))
            },
        )
    };
    v.insert("cr".to_string(), cr);

    let po = match splitting_type(d_k, p) {
        SplittingType::Split if ordinary => {
            let alpha = e.unit_root(p, 1)?;
            let gq = GammaQuotient::new(d_k, m_prime)?;
            let (fr, frb) = gq.frobenius(p)?;
            let mut bad = Vec::new();
            for (idx, ring) in factor_cyclotomic(m_prime, p, 1)?.iter().enumerate() {
                let x = ring.generator();
                let a = ring.scalar(alpha);
                for (name, k) in [("Fr_p", fr), ("Fr_pbar", frb)] {
                    if ring.pow(&x, k) == a {
                        bad.push(format!("omega_{idx}({name}) = alpha"));
                    }
                }
            }
            Verdict::new(
                bad.is_empty(),
                if bad.is_empty() {
                    format!("alpha = {alpha} mod {p}; Frobenius exponents ({fr}, {frb}) in Gamma_{m_prime}")
                } else {
                    bad.join(", ")
                },
            )
        }
        SplittingType::Split => Verdict::new(false, "p is not ordinary"),
        _ => {
            let r = ap.rem_euclid(p as i64);
            Verdict::new(r != 1 && r != p as i64 - 1, format!("a_{p} = {ap} = {r} mod {p}"))
        }
    };
    v.insert("po".to_string(), po);

    let witness = divisors(n_plus).into_iter().find(|&q| q >= 4 && euler_phi(q) % p != 0);
    v.insert(
        "ihara".to_string(),
        match witness {
            Some(q) => Verdict::new(true, format!("q = {q} divides N+ = {n_plus}, phi(q) = {}", euler_phi(q))),
            None => Verdict::new(false, format!("no divisor q >= 4 of N+ = {n_plus} with p not dividing phi(q)")),
        },
    );

    let ed = check_exact_degree(d_k, m_prime)?;
    v.insert("exact_degree".to_string(), Verdict::new(ed.pass, ed.witness));

    let heuristic = p > 5 && !e.cm;
    v.insert(
        "big_image".to_string(),
        Verdict::new(
            big_image_declared,
            format!("declared: {big_image_declared}; heuristic p > 5 and no CM: {heuristic}"),
        ),
    );
    Ok(HypothesisReport { verdicts: v })
}

/// |a| ≤ 2√ℓ.
pub fn hasse_ok(a: i64, ell: u64) -> bool {
    let r = isqrt(4 * ell as u128) as i64;
    a.abs() <= r
}
