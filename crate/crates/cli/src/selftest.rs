//! Seeded randomized suites: Fitting ideals, isotypic decomposition, Hecke algebra structure,
//! the mass formula and CRT round trips.

use anticyclo_core::algebra::{Algebra, QuotientMap};
use anticyclo_core::arith::cyclotomic::factor_cyclotomic;
use anticyclo_core::arith::residue::{gcd, ResidueRing};
use anticyclo_core::fitting::{fitting_ideal, FinitePresentation};
use anticyclo_core::group_ring::{split_order, Character, GroupRing, GroupRingElement, IsotypicDecomposition};
use anticyclo_core::quadratic::QuadForm;
use anticyclo_core::quaternion::{brandt_matrix, eichler_mass, ClassSet, EichlerOrder, QuaternionAlgebra};
use anticyclo_core::theta::{glue_crt, Provenance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::jobs::{hecke_commute, self_adjoint};
use crate::report::s;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: String,
    pub passed: String,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &str, outcomes: Vec<Result<(), String>>) -> Self {
        let passed = outcomes.iter().filter(|o| o.is_ok()).count();
        Self {
            name: name.into(),
            cases: s(outcomes.len()),
            passed: s(passed),
            failures: outcomes.into_iter().filter_map(|o| o.err()).collect(),
        }
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SelftestReport {
    pub seed: String,
    pub suites: Vec<SuiteResult>,
}

pub fn run_selftest(seed: u64) -> Result<SelftestReport, CliError> {
    Ok(SelftestReport {
        seed: s(seed),
        suites: vec![
            fitting_suite(seed, 100),
            isotypic_suite(seed, 200),
            hecke_suite(11, 20)?,
            mass_suite(&[5, 7, 11, 13])?,
            crt_suite(seed, 100),
        ],
    })
}

fn case_rng(seed: u64, case: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ case.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn random_element(rng: &mut ChaCha8Rng, g: &GroupRing) -> GroupRingElement {
    let r = g.base();
    let c: Vec<u64> = (0..g.dim())
        .map(|_| match rng.gen_range(0..4) {
            0 | 1 => 0,
            2 => r.mul(r.p(), rng.gen_range(0..r.modulus())),
            _ => rng.gen_range(0..r.modulus()),
        })
        .collect();
    g.from_flat(c).expect("dimension")
}

fn random_unit(rng: &mut ChaCha8Rng, g: &GroupRing) -> GroupRingElement {
    let r = g.base();
    let u = loop {
        let x = rng.gen_range(1..r.modulus());
        if r.is_unit(x) {
            break x;
        }
    };
    g.term(rng.gen_range(0..g.order() as i64), &[u])
}

type Matrix = Vec<Vec<GroupRingElement>>;

fn presentation(alg: &Algebra, m: &Matrix) -> Result<FinitePresentation, String> {
    let flat = m.iter().map(|row| row.iter().map(|e| e.flat().to_vec()).collect()).collect();
    FinitePresentation::new(alg.clone(), flat).map_err(|e| e.to_string())
}

/// Random row and column operations that preserve the module up to isomorphism.
fn scramble(rng: &mut ChaCha8Rng, g: &GroupRing, m: &mut Matrix) -> Result<(), String> {
    let (rows, cols) = (m.len(), m[0].len());
    for _ in 0..4 {
        match rng.gen_range(0..5) {
            0 if rows > 1 => {
                let (i, j) = (rng.gen_range(0..rows), rng.gen_range(0..rows));
                if i != j {
                    let u = random_element(rng, g);
                    for k in 0..cols {
                        m[j][k] = m[j][k].add(&m[i][k].mul(&u).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
                    }
                }
            }
            1 if cols > 1 => {
                let (i, j) = (rng.gen_range(0..cols), rng.gen_range(0..cols));
                if i != j {
                    let u = random_element(rng, g);
                    for row in m.iter_mut() {
                        row[j] = row[j].add(&row[i].mul(&u).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
                    }
                }
            }
            2 => {
                let i = rng.gen_range(0..rows);
                let u = random_unit(rng, g);
                for x in m[i].iter_mut() {
                    *x = x.mul(&u).map_err(|e| e.to_string())?;
                }
            }
            3 => {
                let (i, j) = (rng.gen_range(0..cols), rng.gen_range(0..cols));
                for row in m.iter_mut() {
                    row.swap(i, j);
                }
            }
            _ => {
                let (i, j) = (rng.gen_range(0..rows), rng.gen_range(0..rows));
                m.swap(i, j);
            }
        }
    }
    Ok(())
}

/// One random case: X_2 given by [[A, C], [0, B]] with X_1 = coker A, X_3 = coker B.
fn fitting_case(seed: u64, case: u64) -> Result<(), String> {
    let mut rng = case_rng(seed, case);
    let p = [5u64, 7][rng.gen_range(0..2)];
    let n = rng.gen_range(1..=2u32);
    let m = rng.gen_range(1..=12usize);
    let tag = format!("case {case} (p={p}, n={n}, m={m})");
    let base = ResidueRing::new(p, n).map_err(|e| e.to_string())?;
    let g = GroupRing::over_residue(m, base).map_err(|e| e.to_string())?;
    let alg = Algebra::GroupRing(g.clone());
    let r1 = rng.gen_range(1..=2usize);
    let r3 = rng.gen_range(1..=2usize);
    let s1 = rng.gen_range(r1..=r1 + 1);
    let s3 = rng.gen_range(r3..=r3 + 1);
    let gen = |r: usize, c: usize, rng: &mut ChaCha8Rng| -> Matrix {
        (0..r).map(|_| (0..c).map(|_| random_element(rng, &g)).collect()).collect()
    };
    let a = gen(r1, s1, &mut rng);
    let b = gen(r3, s3, &mut rng);
    let c = gen(r1, s3, &mut rng);
    let mut big: Matrix = Vec::new();
    for i in 0..r1 {
        big.push(a[i].iter().chain(&c[i]).cloned().collect());
    }
    for row in &b {
        big.push(std::iter::repeat(g.zero()).take(s1).chain(row.iter().cloned()).collect());
    }
    let x1 = fitting_ideal(&presentation(&alg, &a)?);
    let x3 = fitting_ideal(&presentation(&alg, &b)?);
    let x2p = presentation(&alg, &big)?;
    let x2 = fitting_ideal(&x2p);
    if !x2.contains_ideal(&x1.product(&x3)) {
        return Err(format!("{tag}: Fitt(X1)Fitt(X3) not in Fitt(X2)"));
    }
    let mut scrambled = big.clone();
    scramble(&mut rng, &g, &mut scrambled)?;
    if fitting_ideal(&presentation(&alg, &scrambled)?) != x2 {
        return Err(format!("{tag}: Fitting ideal changed under row/column operations"));
    }
    let k = p.pow(rng.gen_range(0..=2u32)) as usize;
    let mut maps = vec![("gamma power", QuotientMap::gamma_power(m, k))];
    let (mp, _) = split_order(m, p);
    for f in factor_cyclotomic(mp as u64, p, n).map_err(|e| e.to_string())? {
        maps.push(("character", QuotientMap::Character(Character::from_factor(m, f, 1).map_err(|e| e.to_string())?)));
    }
    for (name, q) in maps {
        let lhs = fitting_ideal(&x2p.map(&q).map_err(|e| e.to_string())?);
        let rhs = x2.base_change(&q).map_err(|e| e.to_string())?;
        if lhs != rhs {
            return Err(format!("{tag}: base change along {name} failed"));
        }
    }
    Ok(())
}

pub fn fitting_suite(seed: u64, cases: u64) -> SuiteResult {
    let outcomes = (0..cases).into_par_iter().map(|c| fitting_case(seed, c)).collect();
    SuiteResult::new("fitting", outcomes)
}

fn isotypic_case(seed: u64, p: u64, m: usize, samples: usize) -> Result<(), String> {
    let tag = format!("(m'={m}, p={p})");
    let base = ResidueRing::new(p, 2).map_err(|e| e.to_string())?;
    let d = IsotypicDecomposition::new(m, base).map_err(|e| e.to_string())?;
    if d.factors().iter().map(|f| f.degree()).sum::<usize>() != m {
        return Err(format!("{tag}: factor degrees do not sum to m'"));
    }
    let g = GroupRing::over_residue(m, base).map_err(|e| e.to_string())?;
    let mut total = g.zero();
    for i in 0..d.factors().len() {
        let ei = d.idempotent(i);
        total = total.add(&ei).map_err(|e| e.to_string())?;
        for j in 0..d.factors().len() {
            let prod = ei.mul(&d.idempotent(j)).map_err(|e| e.to_string())?;
            let ok = if i == j { prod == ei } else { prod.is_zero() };
            if !ok {
                return Err(format!("{tag}: idempotents {i}, {j} are not orthogonal"));
            }
        }
    }
    if total != g.one() {
        return Err(format!("{tag}: idempotents do not sum to 1"));
    }
    let mut rng = case_rng(seed, p * 1000 + m as u64);
    for k in 0..samples {
        let a = g.from_flat((0..m).map(|_| rng.gen_range(0..base.modulus())).collect()).map_err(|e| e.to_string())?;
        let back = d.reconstruct(&d.split(&a).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        if back != a {
            return Err(format!("{tag}: round trip failed on sample {k}"));
        }
    }
    Ok(())
}

pub fn isotypic_suite(seed: u64, samples: usize) -> SuiteResult {
    let pairs: Vec<(u64, usize)> = [5u64, 7, 11]
        .iter()
        .flat_map(|&p| (1..=30usize).filter(move |&m| gcd(m as u64, p) == 1).map(move |m| (p, m)))
        .collect();
    let outcomes = pairs.par_iter().map(|&(p, m)| isotypic_case(seed, p, m, samples)).collect();
    SuiteResult::new("isotypic", outcomes)
}

/// T_q for good q ≤ bound commute pairwise and are self-adjoint.
pub fn hecke_suite(n_minus: u64, bound: u64) -> Result<SuiteResult, CliError> {
    let cs = ClassSet::new(EichlerOrder::new(QuaternionAlgebra::new(n_minus)?, 1)?);
    let qs: Vec<u64> = (2..=bound).filter(|&q| anticyclo_core::arith::residue::is_prime(q) && n_minus % q != 0).collect();
    let mats = qs.par_iter().map(|&q| brandt_matrix(&cs, q)).collect::<Result<Vec<_>, _>>()?;
    let brandt = qs.iter().copied().zip(mats).collect();
    let mut outcomes = Vec::new();
    outcomes.push(if hecke_commute(&brandt) { Ok(()) } else { Err("Brandt matrices do not commute".into()) });
    for (q, t) in &brandt {
        outcomes.push(if self_adjoint(&cs, t) { Ok(()) } else { Err(format!("T_{q} is not self-adjoint")) });
    }
    Ok(SuiteResult::new("hecke", outcomes))
}

pub fn mass_suite(discs: &[u64]) -> Result<SuiteResult, CliError> {
    let outcomes = discs
        .par_iter()
        .map(|&d| -> Result<Result<(), String>, CliError> {
            let cs = ClassSet::new(EichlerOrder::new(QuaternionAlgebra::new(d)?, 1)?);
            Ok(if cs.mass() == eichler_mass(d, 1) { Ok(()) } else { Err(format!("mass mismatch for N- = {d}")) })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SuiteResult::new("mass", outcomes))
}

pub fn crt_suite(seed: u64, cases: u64) -> SuiteResult {
    let outcomes = (0..cases)
        .map(|c| -> Result<(), String> {
            let mut rng = case_rng(seed, 7_000_000 + c);
            let m = rng.gen_range(1..=12usize);
            let (a, b) = (ResidueRing::new(7, 2).unwrap(), ResidueRing::new(13, 1).unwrap());
            let ga = GroupRing::over_residue(m, a).unwrap();
            let gb = GroupRing::over_residue(m, b).unwrap();
            let x = ga.from_flat((0..m).map(|_| rng.gen_range(0..49)).collect()).unwrap();
            let y = gb.from_flat((0..m).map(|_| rng.gen_range(0..13)).collect()).unwrap();
            let (pa, pb) = (glued_prov(7, 2), glued_prov(13, 1));
            let glued = glue_crt(&[(x.clone(), pa), (y.clone(), pb)]).map_err(|e| e.to_string())?;
            let ok = glued.reduce(7).map_err(|e| e.to_string())? == x.flat()
                && glued.reduce(13).map_err(|e| e.to_string())? == y.flat();
            // reduce then glue on the glued element reproduces it
            let again = glue_crt(&[
                (ga.from_flat(glued.reduce(7).unwrap()).unwrap(), glued_prov(7, 2)),
                (gb.from_flat(glued.reduce(13).unwrap()).unwrap(), glued_prov(13, 1)),
            ])
            .map_err(|e| e.to_string())?;
            if ok && again == glued {
                Ok(())
            } else {
                Err(format!("case {c}: CRT round trip failed"))
            }
        })
        .collect();
    SuiteResult::new("crt", outcomes)
}

fn glued_prov(p: u64, n: u32) -> Provenance {
    Provenance {
        curve: "selftest".into(),
        d_k: -20,
        p,
        n,
        conductor: 1,
        walk: vec![],
        generator: QuadForm::principal(-20),
        eigenform: vec![1],
        pinned: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        assert!(fitting_suite(1, 6).ok());
        assert!(isotypic_suite(1, 3).ok());
        assert!(crt_suite(1, 5).ok());
    }
}
