use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::forms::{compose, is_fundamental, power, push_down, reduced_forms, QuadForm};
use crate::arith::residue::{factorize, kronecker};
use crate::arith::zmatrix::{smith_normal_form, unimodular_inverse, ZMatrix};
use crate::error::{Error, Result};

/// Pic(O_c) for the order of conductor c in the imaginary quadratic field of discriminant
/// d_K, realized on reduced forms of discriminant c² d_K.
#[derive(Clone, Debug)]
pub struct RingClassGroup {
    d_k: i64,
    conductor: u64,
    forms: Vec<QuadForm>,
    invariants: Vec<u64>,
    generators: Vec<QuadForm>,
    logs: HashMap<QuadForm, Vec<u64>>,
}

impl RingClassGroup {
    pub fn new(d_k: i64, conductor: u64) -> Result<Self> {
        if !is_fundamental(d_k) {
            return Err(Error::BadDiscriminant(d_k));
        }
        if conductor == 0 {
            return Err(Error::Invalid("conductor must be positive".into()));
        }
        let disc = (conductor as i64)
            .checked_mul(conductor as i64)
            .and_then(|c2| c2.checked_mul(d_k))
            .ok_or(Error::BadDiscriminant(d_k))?;
        let forms = reduced_forms(disc)?;
        let (invariants, generators, logs) = structure(disc, &forms)?;
        Ok(Self { d_k, conductor, forms, invariants, generators, logs })
    }

    pub fn d_k(&self) -> i64 {
        self.d_k
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn discriminant(&self) -> i64 {
        (self.conductor * self.conductor) as i64 * self.d_k
    }

    pub fn order(&self) -> usize {
        self.forms.len()
    }

    /// Reduced forms in lexicographic order.
    pub fn elements(&self) -> &[QuadForm] {
        &self.forms
    }

    pub fn identity(&self) -> QuadForm {
        QuadForm::principal(self.discriminant())
    }

    /// Cyclic invariant factors d_1 | d_2 | ... (all > 1).
    pub fn invariants(&self) -> &[u64] {
        &self.invariants
    }

    pub fn generators(&self) -> &[QuadForm] {
        &self.generators
    }

    pub fn index_of(&self, f: &QuadForm) -> Option<usize> {
        self.forms.binary_search(&f.reduce()).ok()
    }

    /// Coordinates of a class with respect to the invariant-factor generators.
    pub fn log(&self, f: &QuadForm) -> Result<Vec<u64>> {
        if f.discriminant() != self.discriminant() {
            return Err(Error::MismatchedDiscriminant(f.discriminant(), self.discriminant()));
        }
        self.logs.get(&f.reduce()).cloned().ok_or(Error::Invalid(format!("{f} is not primitive")))
    }

    pub fn exp(&self, coords: &[u64]) -> QuadForm {
        coords.iter().zip(&self.generators).fold(self.identity(), |acc, (&e, g)| {
            compose(&acc, &power(g, e)).expect("same discriminant")
        })
    }

    pub fn compose(&self, f: &QuadForm, g: &QuadForm) -> Result<QuadForm> {
        compose(f, g)
    }

    /// Image of a class of a higher-conductor group under the natural surjection onto this
    /// group.
    pub fn push_from(&self, f: &QuadForm, conductor: u64) -> Result<QuadForm> {
        if conductor % self.conductor != 0 {
            return Err(Error::NotDivisor { divisor: self.conductor as usize, order: conductor as usize });
        }
        push_down(f, conductor / self.conductor, self.discriminant())
    }
}

type Structure = (Vec<u64>, Vec<QuadForm>, HashMap<QuadForm, Vec<u64>>);

/// Invariant factors, generators and discrete logs by successive generators and Smith form.
fn structure(disc: i64, forms: &[QuadForm]) -> Result<Structure> {
    let e = QuadForm::principal(disc);
    // coordinates with respect to successive generators g_1, g_2, ...
    let mut gens: Vec<QuadForm> = Vec::new();
    let mut coords: HashMap<QuadForm, Vec<u64>> = HashMap::new();
    coords.insert(e, Vec::new());
    let mut relations: Vec<Vec<i64>> = Vec::new();
    for f in forms {
        if coords.contains_key(f) {
            continue;
        }
        // smallest k with f^k in the current subgroup
        let mut k = 1u64;
        let mut cur = *f;
        while !coords.contains_key(&cur) {
            cur = compose(&cur, f)?;
            k += 1;
        }
        let target = coords[&cur].clone();
        let idx = gens.len();
        let mut rel = vec![0i64; idx + 1];
        for (i, &t) in target.iter().enumerate() {
            rel[i] = -(t as i64);
        }
        rel[idx] = k as i64;
        relations.push(rel);
        let old: Vec<(QuadForm, Vec<u64>)> = coords.iter().map(|(a, b)| (*a, b.clone())).collect();
        let mut step = e;
        for j in 0..k {
            for (h, hc) in &old {
                let mut c = hc.clone();
                c.resize(idx, 0);
                c.push(j);
                coords.insert(compose(h, &step)?, c);
            }
            step = compose(&step, f)?;
        }
        gens.push(*f);
    }
    let r = gens.len();
    if r == 0 {
        return Ok((Vec::new(), Vec::new(), forms.iter().map(|f| (*f, Vec::new())).collect()));
    }
    let rel_matrix: ZMatrix = relations
        .iter()
        .map(|row| (0..r).map(|j| BigInt::from(*row.get(j).unwrap_or(&0))).collect())
        .collect();
    let (d, _u, v) = smith_normal_form(&rel_matrix);
    let vinv = unimodular_inverse(&v);
    let gen_orders: Vec<u64> = gens.iter().map(|g| order_of(g, disc)).collect();
    let diag: Vec<u64> = (0..r).map(|i| d[i][i].to_u64().expect("positive invariant")).collect();
    let keep: Vec<usize> = (0..r).filter(|&i| diag[i] > 1).collect();
    let invariants: Vec<u64> = keep.iter().map(|&i| diag[i]).collect();
    let generators: Vec<QuadForm> = keep
        .iter()
        .map(|&j| {
            (0..r).fold(e, |acc, i| {
                let ex = vinv[j][i].mod_floor_u64(gen_orders[i]);
                compose(&acc, &power(&gens[i], ex)).expect("same discriminant")
            })
        })
        .collect();
    let mut logs = HashMap::new();
    for (f, c) in coords {
        let y: Vec<u64> = keep
            .iter()
            .map(|&j| {
                let mut s = BigInt::zero();
                for i in 0..r {
                    s += BigInt::from(c.get(i).copied().unwrap_or(0)) * &v[i][j];
                }
                s.mod_floor_u64(diag[j])
            })
            .collect();
        logs.insert(f, y);
    }
    Ok((invariants, generators, logs))
}

fn order_of(f: &QuadForm, disc: i64) -> u64 {
    let e = QuadForm::principal(disc);
    let mut k = 1;
    let mut cur = *f;
    while cur != e {
        cur = compose(&cur, f).expect("same discriminant");
        k += 1;
    }
    k
}

trait ModFloorU64 {
    fn mod_floor_u64(&self, m: u64) -> u64;
}

impl ModFloorU64 for BigInt {
    fn mod_floor_u64(&self, m: u64) -> u64 {
        use num_integer::Integer;
        self.mod_floor(&BigInt::from(m)).to_u64().expect("reduced")
    }
}

/// h(c² d_K) from the conductor formula.
pub fn class_number_formula(d_k: i64, h_k: u64, c: u64) -> u64 {
    if c == 1 {
        return h_k;
    }
    let mut num = c * h_k;
    for (l, _) in factorize(c) {
        let chi = kronecker(d_k, l) as i64;
        num = num / l * (l as i64 - chi) as u64;
    }
    let units = match d_k {
        -3 => 3,
        -4 => 2,
        _ => 1,
    };
    num / units
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_examples() {
        let g = RingClassGroup::new(-4, 1).unwrap();
        assert!(g.invariants().is_empty());
        let g = RingClassGroup::new(-23, 1).unwrap();
        assert_eq!(g.invariants(), &[3]);
        let g = RingClassGroup::new(-8, 3).unwrap();
        assert_eq!(g.invariants(), &[2]);
        assert_eq!(g.elements(), &[QuadForm::new(1, 0, 18), QuadForm::new(2, 0, 9)]);
        let g = RingClassGroup::new(-8, 9).unwrap();
        assert_eq!(g.order(), 6);
        assert_eq!(g.invariants(), &[6]);
    }

    #[test]
    fn logs_are_homomorphic() {
        for &(d, c) in &[(-20i64, 7u64), (-23, 9), (-4, 15), (-56, 3), (-20, 49)] {
            let g = RingClassGroup::new(d, c).unwrap();
            assert_eq!(g.invariants().iter().product::<u64>() as usize, g.order());
            let els = g.elements();
            for f in els.iter().take(12) {
                assert_eq!(g.exp(&g.log(f).unwrap()), *f);
                for h in els.iter().take(12) {
                    let fh = compose(f, h).unwrap();
                    let lf = g.log(f).unwrap();
                    let lh = g.log(h).unwrap();
                    let expect: Vec<u64> =
                        g.invariants().iter().enumerate().map(|(i, &d)| (lf[i] + lh[i]) % d).collect();
                    assert_eq!(g.log(&fh).unwrap(), expect);
                }
            }
        }
    }

    #[test]
    fn push_down_is_a_surjective_homomorphism() {
        let big = RingClassGroup::new(-20, 21).unwrap();
        let small = RingClassGroup::new(-20, 3).unwrap();
        let els = big.elements();
        let mut image = std::collections::BTreeSet::new();
        for f in els {
            let pf = small.push_from(f, 21).unwrap();
            image.insert(pf);
            for g in els.iter().take(6) {
                let lhs = small.push_from(&compose(f, g).unwrap(), 21).unwrap();
                let rhs = compose(&pf, &small.push_from(g, 21).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
        assert_eq!(image.len(), small.order());
        assert_eq!(small.push_from(&big.identity(), 21).unwrap(), small.identity());
    }
}
