//! Fitting ideals of finitely presented modules over finite commutative algebras.

use rayon::prelude::*;

use crate::algebra::{Algebra, QuotientMap};
use crate::arith::howell::{intersect, HowellBasis};
use crate::error::{Error, Result};

pub const MAX_GENERATORS: usize = 4;
pub const MAX_RELATIONS: usize = 6;

/// A presentation A^s → A^r → X → 0, stored as an r×s matrix of algebra elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePresentation {
    algebra: Algebra,
    matrix: Vec<Vec<Vec<u64>>>,
}

impl FinitePresentation {
    pub fn new(algebra: Algebra, matrix: Vec<Vec<Vec<u64>>>) -> Result<Self> {
        let r = matrix.len();
        if r == 0 {
            return Err(Error::Invalid("presentation needs at least one generator".into()));
        }
        let s = matrix[0].len();
        if matrix.iter().any(|row| row.len() != s) {
            return Err(Error::Invalid("ragged presentation matrix".into()));
        }
        if r > MAX_GENERATORS || s > MAX_RELATIONS {
            return Err(Error::SizeLimit(format!("{r}x{s} presentation")));
        }
        let d = algebra.dim();
        let q = algebra.base().modulus();
        let matrix = matrix
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|e| {
                        if e.len() != d {
                            Err(Error::MismatchedGroup)
                        } else {
                            Ok(e.into_iter().map(|x| x % q).collect())
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { algebra, matrix })
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn matrix(&self) -> &[Vec<Vec<u64>>] {
        &self.matrix
    }

    pub fn generators(&self) -> usize {
        self.matrix.len()
    }

    pub fn relations(&self) -> usize {
        self.matrix[0].len()
    }

    /// Entrywise image under a quotient map.
    pub fn map(&self, q: &QuotientMap) -> Result<Self> {
        let target = q.target(&self.algebra)?;
        let matrix = self
            .matrix
            .iter()
            .map(|row| row.iter().map(|e| q.apply(&self.algebra, e)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(target, matrix)
    }
}

/// An ideal of a finite algebra, with its additive span in Howell form.
#[derive(Clone, Debug)]
pub struct RingIdeal {
    algebra: Algebra,
    generators: Vec<Vec<u64>>,
    span: HowellBasis,
}

impl PartialEq for RingIdeal {
    fn eq(&self, other: &Self) -> bool {
        self.algebra == other.algebra && self.span == other.span
    }
}

impl RingIdeal {
    pub fn new(algebra: Algebra, generators: Vec<Vec<u64>>) -> Self {
        let basis = algebra.basis();
        let rows: Vec<Vec<u64>> = generators
            .iter()
            .filter(|g| g.iter().any(|&x| x != 0))
            .flat_map(|g| basis.iter().map(|b| algebra.mul(g, b)).collect::<Vec<_>>())
            .collect();
        let span = HowellBasis::new(*algebra.base(), algebra.dim(), &rows);
        debug_assert!(closed_under_basis(&algebra, &span));
        Self { algebra, generators, span }
    }

    pub fn zero(algebra: Algebra) -> Self {
        Self::new(algebra, Vec::new())
    }

    pub fn unit(algebra: Algebra) -> Self {
        let one = algebra.one();
        Self::new(algebra, vec![one])
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn generators(&self) -> &[Vec<u64>] {
        &self.generators
    }

    pub fn span(&self) -> &HowellBasis {
        &self.span
    }

    pub fn is_zero(&self) -> bool {
        self.span.is_zero()
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        self.span.contains(x)
    }

    pub fn contains_ideal(&self, other: &RingIdeal) -> bool {
        self.span.contains_span(&other.span)
    }

    pub fn product(&self, other: &RingIdeal) -> RingIdeal {
        let gens = self
            .generators
            .iter()
            .flat_map(|a| other.generators.iter().map(|b| self.algebra.mul(a, b)).collect::<Vec<_>>())
            .collect();
        RingIdeal::new(self.algebra.clone(), gens)
    }

    pub fn sum(&self, other: &RingIdeal) -> RingIdeal {
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        RingIdeal::new(self.algebra.clone(), gens)
    }

    pub fn intersection(&self, other: &RingIdeal) -> RingIdeal {
        let span = intersect(&self.span, &other.span);
        RingIdeal::new(self.algebra.clone(), span.rows().to_vec())
    }

    /// The image ideal I·B under a surjective quotient map A → B.
    pub fn base_change(&self, q: &QuotientMap) -> Result<RingIdeal> {
        let target = q.target(&self.algebra)?;
        let gens = self
            .generators
            .iter()
            .map(|g| q.apply(&self.algebra, g))
            .collect::<Result<Vec<_>>>()?;
        Ok(RingIdeal::new(target, gens))
    }

    /// Preimage of an ideal over A/p^k under reduction from A (this ideal's algebra is the
    /// quotient, `full` the larger algebra): I + p^k A.
    pub fn lift_from(&self, full: &Algebra) -> Result<RingIdeal> {
        let k = self.algebra.base().n();
        if full.base().p() != self.algebra.base().p() || full.base().n() < k {
            return Err(Error::UnsupportedQuotient("lift to a smaller modulus".into()));
        }
        let mut gens = self.generators.clone();
        let pk = full.base().p_pow(k);
        gens.push(full.scale_int(&full.one(), pk));
        Ok(RingIdeal::new(full.clone(), gens))
    }
}

fn closed_under_basis(algebra: &Algebra, span: &HowellBasis) -> bool {
    let basis = algebra.basis();
    span.rows().iter().all(|r| basis.iter().all(|b| span.contains(&algebra.mul(r, b))))
}

/// Determinant over a commutative algebra by permutation expansion (r ≤ 4).
pub fn determinant(algebra: &Algebra, m: &[Vec<Vec<u64>>]) -> Vec<u64> {
    let r = m.len();
    let mut perm: Vec<usize> = (0..r).collect();
    let mut acc = algebra.zero();
    permute(&mut perm, 0, &mut |p, sign| {
        let mut t = algebra.one();
        for (i, &j) in p.iter().enumerate() {
            t = algebra.mul(&t, &m[i][j]);
        }
        acc = if sign { algebra.add(&acc, &t) } else { algebra.sub(&acc, &t) };
    });
    acc
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize], bool)) {
    if k == p.len() {
        let mut inv = 0;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if p[i] > p[j] {
                    inv += 1;
                }
            }
        }
        f(p, inv % 2 == 0);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// All k×k minors of a matrix, in lexicographic order of (row set, column set).
pub fn minors(algebra: &Algebra, m: &[Vec<Vec<u64>>], k: usize) -> Vec<Vec<u64>> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    if k > rows || k > cols {
        return Vec::new();
    }
    let pairs: Vec<(Vec<usize>, Vec<usize>)> = combinations(rows, k)
        .into_iter()
        .flat_map(|rs| combinations(cols, k).into_iter().map(move |cs| (rs.clone(), cs)))
        .collect();
    pairs
        .par_iter()
        .map(|(rs, cs)| {
            let sub: Vec<Vec<Vec<u64>>> =
                rs.iter().map(|&i| cs.iter().map(|&j| m[i][j].clone()).collect()).collect();
            determinant(algebra, &sub)
        })
        .collect()
}

/// Fitt_0(X): the ideal of r×r minors of an r×s presentation (zero when s < r).
pub fn fitting_ideal(p: &FinitePresentation) -> RingIdeal {
    let r = p.generators();
    let gens = minors(&p.algebra, &p.matrix, r);
    RingIdeal::new(p.algebra.clone(), gens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::residue::ResidueRing;
    use crate::group_ring::GroupRing;

    #[test]
    fn residue_examples() {
        let a = Algebra::Residue(ResidueRing::new(5, 2).unwrap());
        let i = fitting_ideal(&FinitePresentation::new(a.clone(), vec![vec![vec![5]]]).unwrap());
        assert!(i.contains(&[10]));
        assert!(!i.contains(&[1]));
        assert_eq!(i, RingIdeal::new(a.clone(), vec![vec![5]]));
        let d = FinitePresentation::new(a.clone(), vec![vec![vec![5], vec![0]], vec![vec![0], vec![5]]]).unwrap();
        assert!(fitting_ideal(&d).is_zero());
        let short = FinitePresentation::new(a.clone(), vec![vec![vec![1]], vec![vec![1]]]).unwrap();
        assert!(fitting_ideal(&short).is_zero());
    }

    #[test]
    fn principal_group_ring() {
        let g = GroupRing::over_residue(4, ResidueRing::new(7, 2).unwrap()).unwrap();
        let a = Algebra::GroupRing(g.clone());
        let theta = g.from_ints(&[3, 0, 7, 1]).unwrap();
        let i = fitting_ideal(&FinitePresentation::new(a.clone(), vec![vec![theta.flat().to_vec()]]).unwrap());
        assert!(i.contains(theta.flat()));
        assert!(i.contains(&a.zero()));
        assert_eq!(i, RingIdeal::new(a, vec![theta.flat().to_vec()]));
    }

    #[test]
    fn size_cap() {
        let a = Algebra::Residue(ResidueRing::new(5, 1).unwrap());
        let big = vec![vec![vec![1]; 7]; 2];
        assert!(matches!(FinitePresentation::new(a, big), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn determinant_3x3() {
        let a = Algebra::Residue(ResidueRing::new(101, 1).unwrap());
        let m: Vec<Vec<Vec<u64>>> = [[2u64, 0, 1], [1, 3, 2], [1, 1, 1]]
            .iter()
            .map(|r| r.iter().map(|&x| vec![x]).collect())
            .collect();
        // 2(3-2) - 0 + 1(1-3) = 0
        assert_eq!(determinant(&a, &m), vec![0]);
    }
}
