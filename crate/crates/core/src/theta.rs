//! Theta elements, Bertolini-Darmon elements, the p-stabilized tower and CRT gluing.

use serde::{Deserialize, Serialize};

use crate::arith::cyclotomic::factor_cyclotomic;
use crate::arith::howell::{left_kernel, solve_left};
use crate::arith::residue::{crt, factorize, ResidueRing};
use crate::curve::{unit_root_of, EllipticCurveQ};
use crate::error::{Error, Result};
use crate::group_ring::{Character, GroupRing, GroupRingElement};
use crate::quadratic::gamma::m0_of;
use crate::quadratic::{splitting_type, GammaQuotient, QuadForm, SplittingType};
use crate::quaternion::{ClassSet, GrossPointFamily};

/// Every non-canonical choice behind a theta element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub curve: String,
    pub d_k: i64,
    pub p: u64,
    pub n: u32,
    /// Conductor of the Gross points that were summed.
    pub conductor: u64,
    /// Neighbor walk from the conductor-1 point.
    pub walk: Vec<u64>,
    /// Class of G_{m_0} mapping to the chosen generator of Γ_m.
    pub generator: QuadForm,
    /// Eigenform values on the class set, in class-set order.
    pub eigenform: Vec<i64>,
    /// Set when `eigenform` is a primitive integral eigenvector shared by every run.
    pub pinned: bool,
}

/// θ̃_{m_0} = Σ_a f(ψ(a)) [a] over G_{m_0}, one coefficient per reduced form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTheta {
    pub conductor: u64,
    pub ring: ResidueRing,
    pub forms: Vec<QuadForm>,
    pub coeffs: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaElement {
    pub level: u64,
    pub element: GroupRingElement,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BDElement {
    pub element: GroupRingElement,
    pub theta: GroupRingElement,
    pub theta_star: GroupRingElement,
}

/// Coefficientwise CRT of per-prime elements over a common Γ_m.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdelicElement {
    pub modulus: u128,
    pub parts: Vec<(u64, u32)>,
    pub coeffs: Vec<u128>,
}

impl AdelicElement {
    /// Reduction modulo p^n for one of the glued primes.
    pub fn reduce(&self, p: u64) -> Result<Vec<u64>> {
        let &(_, n) = self
            .parts
            .iter()
            .find(|(q, _)| *q == p)
            .ok_or(Error::InconsistentLevels(format!("{p} is not one of the glued primes")))?;
        let q = p.pow(n) as u128;
        Ok(self.coeffs.iter().map(|c| (c % q) as u64).collect())
    }
}

/// The p-adic multiplier e_p(f, K) with its invertibility verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpMultiplier {
    pub element: GroupRingElement,
    pub split: bool,
    pub invertible: bool,
    /// χ(e_p) for one character per cyclotomic factor of X^{m'} - 1.
    pub char_values: Vec<Vec<u64>>,
}

/// A solution of θ(f) = c·θ(f_α).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizationMultiple {
    pub c: GroupRingElement,
    /// log_p of the number of solutions (the size of the annihilator of θ(f_α)).
    pub kernel_log_size: u32,
    pub kernel_rank: usize,
}

pub fn theta_raw(values: &[u64], ring: &ResidueRing, gp: &GrossPointFamily) -> Result<RawTheta> {
    if gp.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut forms = Vec::with_capacity(gp.len());
    let mut coeffs = Vec::with_capacity(gp.len());
    for pt in gp.points() {
        let v = *values.get(pt.class_index).ok_or(Error::MismatchedGroup)?;
        forms.push(pt.form);
        coeffs.push(v % ring.modulus());
    }
    Ok(RawTheta { conductor: gp.m0(), ring: *ring, forms, coeffs })
}

/// Pushforward of θ̃ along G_{m_0} ↠ Γ_m, as a flat coefficient vector over Z/p^n.
pub fn theta_project(raw: &RawTheta, gamma: &GammaQuotient) -> Result<GroupRingElement> {
    if raw.conductor % gamma.m0() != 0 {
        return Err(Error::AssumptionFailed(format!(
            "conductor {} is not a multiple of m_0 = {}",
            raw.conductor,
            gamma.m0()
        )));
    }
    let m = gamma.m() as usize;
    let ring = GroupRing::over_residue(m, raw.ring)?;
    let mut c = vec![0u64; m];
    for (f, &x) in raw.forms.iter().zip(&raw.coeffs) {
        let k = gamma.image_from(f, raw.conductor)? as usize;
        c[k] = raw.ring.add(c[k], x);
    }
    ring.from_flat(c)
}

/// The Gross point family reached by `walk`, summed against `values` and projected to Γ_m.
pub fn theta_element(
    cs: &ClassSet,
    values: &[i64],
    gamma: &GammaQuotient,
    walk: &[u64],
    provenance: Provenance,
) -> Result<ThetaElement> {
    let gp = GrossPointFamily::with_walk(cs, gamma.d_k(), walk)?;
    theta_from_family(&gp, values, gamma, walk, provenance)
}

/// `theta_element` for a family that was already computed along `walk`.
pub fn theta_from_family(
    gp: &GrossPointFamily,
    values: &[i64],
    gamma: &GammaQuotient,
    walk: &[u64],
    mut provenance: Provenance,
) -> Result<ThetaElement> {
    let ring = ResidueRing::new(provenance.p, provenance.n)?;
    let reduced: Vec<u64> = values.iter().map(|&v| ring.reduce(v as i128)).collect();
    let raw = theta_raw(&reduced, &ring, gp)?;
    let element = theta_project(&raw, gamma)?;
    provenance.conductor = gp.m0();
    provenance.walk = walk.to_vec();
    provenance.generator = gamma.generator_form();
    provenance.eigenform = values.to_vec();
    Ok(ThetaElement { level: gamma.m(), element, provenance })
}

/// The walk for conductor m'_0·p^{r+1}: primes of m'_0 first, then p repeated.
pub fn tower_walk(m_prime: u64, p: u64, r: u32) -> Vec<u64> {
    let mut walk = Vec::new();
    for (l, e) in factorize(m0_of(m_prime)) {
        walk.extend(std::iter::repeat(l).take(e as usize));
    }
    walk.extend(std::iter::repeat(p).take(r as usize + 1));
    walk
}

/// Γ_{m'p^r} for r = 0..=r_max with generators compatible under projection: the generator
/// at each level is the image of the generator at the top level.
pub fn compatible_quotients(d_k: i64, m_prime: u64, p: u64, r_max: u32) -> Result<Vec<GammaQuotient>> {
    let top = GammaQuotient::new(d_k, m_prime * p.pow(r_max))?;
    let g = top.generator_form();
    let top_m0 = top.m0();
    let mut out = Vec::with_capacity(r_max as usize + 1);
    for r in 0..r_max {
        let q = GammaQuotient::new(d_k, m_prime * p.pow(r))?;
        let gr = q.group().push_from(&g, top_m0)?;
        out.push(q.with_generator(&gr)?);
    }
    out.push(top);
    Ok(out)
}

/// θ_{m'p^r}(f) for r = 0..=r_max, computed from Gross points of conductor m'_0·p^{r+1}
/// on a single neighbor walk.
pub fn theta_tower(
    cs: &ClassSet,
    values: &[i64],
    m_prime: u64,
    r_max: u32,
    provenance: &Provenance,
) -> Result<Vec<ThetaElement>> {
    let p = provenance.p;
    let quotients = compatible_quotients(provenance.d_k, m_prime, p, r_max)?;
    quotients
        .iter()
        .enumerate()
        .map(|(r, q)| theta_element(cs, values, q, &tower_walk(m_prime, p, r as u32), provenance.clone()))
        .collect()
}

/// L = θ·θ*.
pub fn bd_element(theta: &GroupRingElement) -> Result<BDElement> {
    let star = theta.involution();
    Ok(BDElement { element: theta.mul(&star)?, theta: theta.clone(), theta_star: star })
}

/// α^{-r}(θ_r − α^{-1}·cores θ_{r−1}) at level m'p^r.
pub fn p_stabilize(top: &ThetaElement, below: &ThetaElement, alpha: u64) -> Result<ThetaElement> {
    let ring = *top.element.ring().base();
    if below.element.ring().base() != &ring {
        return Err(Error::LevelMismatch("coefficient rings differ".into()));
    }
    let p = ring.p();
    if top.level != below.level * p {
        return Err(Error::LevelMismatch(format!("levels {} and {} are not in ratio {p}", top.level, below.level)));
    }
    let a = alpha % ring.modulus();
    if !ring.is_unit(a) {
        return Err(Error::NonUnitAlpha);
    }
    let ainv = ring.inv(a)?;
    let mut r = 0;
    let mut l = top.level;
    while l % p == 0 {
        l /= p;
        r += 1;
    }
    let lifted = below.element.cores(top.level as usize)?.scale(&[ainv]);
    let diff = top.element.sub(&lifted)?;
    let element = diff.scale(&[ring.pow(ainv, r)]);
    Ok(ThetaElement { level: top.level, element, provenance: top.provenance.clone() })
}

/// θ_r(f_α) for r = 1..=r_max from a tower θ_0..θ_{r_max}.
pub fn stabilized_tower(tower: &[ThetaElement], alpha: u64) -> Result<Vec<ThetaElement>> {
    tower.windows(2).map(|w| p_stabilize(&w[1], &w[0], alpha)).collect()
}

/// e_p(f, K) in Z/p^n[Γ_{m'}]: (1 − α^{-1}Fr_𝔭)(1 − α^{-1}Fr_𝔭̄) when p splits, 1 − α^{-2}
/// when p is inert.
pub fn e_p_multiplier(e: &EllipticCurveQ, d_k: i64, p: u64, n: u32, m_prime: u64) -> Result<EpMultiplier> {
    e_p_from_trace(e.a_ell(p)?, d_k, p, n, m_prime)
}

/// e_p(f, K) for the unit root of X² − a_p X + p.
pub fn e_p_from_trace(a_p: i64, d_k: i64, p: u64, n: u32, m_prime: u64) -> Result<EpMultiplier> {
    let alpha = unit_root_of(a_p, p, n)?;
    let ring = ResidueRing::new(p, n)?;
    let ainv = ring.inv(alpha)?;
    let gr = GroupRing::over_residue(m_prime as usize, ring)?;
    let (element, split) = match splitting_type(d_k, p) {
        SplittingType::Split => {
            let gamma = GammaQuotient::new(d_k, m_prime)?;
            let (fr, fr_bar) = gamma.frobenius(p)?;
            let one = gr.one();
            let f1 = one.sub(&gr.term(fr as i64, &[ainv]))?;
            let f2 = one.sub(&gr.term(fr_bar as i64, &[ainv]))?;
            (f1.mul(&f2)?, true)
        }
        SplittingType::Inert => {
            let c = ring.sub(1, ring.mul(ainv, ainv));
            (gr.term(0, &[c]), false)
        }
        SplittingType::Ramified => {
            return Err(Error::AssumptionFailed(format!("{p} ramifies in K")));
        }
    };
    let evals = char_values(&element)?;
    let invertible = evals.iter().all(|(_, u)| *u);
    let char_values = evals.into_iter().map(|(v, _)| v).collect();
    Ok(EpMultiplier { element, split, invertible, char_values })
}

/// (χ(a), χ(a) is a unit) for χ: γ ↦ X in each factor ring of X^m − 1 over Z/p^n (p ∤ m).
fn char_values(a: &GroupRingElement) -> Result<Vec<(Vec<u64>, bool)>> {
    let base = *a.ring().base();
    let m = a.order();
    factor_cyclotomic(m as u64, base.p(), base.n())?
        .into_iter()
        .map(|f| {
            let chi = Character::from_factor(m, f, 1)?;
            let v = chi.eval(a)?;
            let u = chi.target().is_unit(&v);
            Ok((v, u))
        })
        .collect()
}

/// Whether a is a unit of Z/p^n[Γ_m] with p ∤ m, decided character by character.
pub fn is_group_ring_unit(a: &GroupRingElement) -> Result<bool> {
    Ok(char_values(a)?.iter().all(|(_, u)| *u))
}

/// Multiplication-by-`a` matrix on the flat basis: row i is (basis_i)·a.
fn mul_matrix(a: &GroupRingElement) -> Result<Vec<Vec<u64>>> {
    a.ring().basis().iter().map(|b| Ok(b.mul(a)?.flat().to_vec())).collect()
}

/// Solves θ(f) = c·θ(f_α) over Z/p^n[Γ].
pub fn stabilization_multiple(theta_f: &GroupRingElement, theta_alpha: &GroupRingElement) -> Result<StabilizationMultiple> {
    if theta_f.ring() != theta_alpha.ring() {
        return Err(Error::MismatchedGroup);
    }
    let ring = *theta_f.ring().base();
    let m = mul_matrix(theta_alpha)?;
    let x = solve_left(&ring, &m, theta_f.flat())?.ok_or(Error::NoSolution)?;
    let c = theta_f.ring().from_flat(x)?;
    let kernel = left_kernel(&ring, &m, theta_f.flat().len());
    debug_assert_eq!(&c.mul(theta_alpha)?, theta_f);
    Ok(StabilizationMultiple { c, kernel_log_size: kernel.log_size(), kernel_rank: kernel.rows().len() })
}

/// Coefficientwise CRT of per-prime elements. All inputs must share Γ_m, the generator
/// convention and one pinned integral eigenvector.
pub fn glue_crt(inputs: &[(GroupRingElement, Provenance)]) -> Result<AdelicElement> {
    let Some((first, p0)) = inputs.first() else {
        return Err(Error::InconsistentLevels("nothing to glue".into()));
    };
    if inputs.iter().any(|(_, pr)| !pr.pinned) {
        return Err(Error::NormalizationUnpinned);
    }
    let mut parts = Vec::new();
    for (el, pr) in inputs {
        if el.order() != first.order() {
            return Err(Error::InconsistentLevels(format!("orders {} and {}", el.order(), first.order())));
        }
        if el.ring().coeffs().dim() != 1 {
            return Err(Error::InconsistentLevels("cyclotomic coefficients cannot be glued".into()));
        }
        if pr.d_k != p0.d_k || pr.generator != p0.generator || pr.conductor != p0.conductor || pr.walk != p0.walk {
            return Err(Error::InconsistentLevels("Gamma_m conventions differ".into()));
        }
        if pr.eigenform != p0.eigenform {
            return Err(Error::NormalizationUnpinned);
        }
        let b = el.ring().base();
        if parts.iter().any(|&(q, _)| q == b.p()) {
            return Err(Error::InconsistentLevels(format!("prime {} appears twice", b.p())));
        }
        parts.push((b.p(), b.n()));
    }
    let mut coeffs = Vec::with_capacity(first.order());
    let mut modulus = 1;
    for i in 0..first.order() {
        let residues: Vec<(u64, u64)> =
            inputs.iter().map(|(el, _)| (el.coeff(i)[0], el.ring().base().modulus())).collect();
        let (x, m) = crt(&residues)?;
        coeffs.push(x);
        modulus = m;
    }
    Ok(AdelicElement { modulus, parts, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, n: u32) -> ResidueRing {
        ResidueRing::new(p, n).unwrap()
    }

    fn dummy(level: u64, element: GroupRingElement) -> ThetaElement {
        let provenance = Provenance {
            curve: String::new(),
            d_k: -20,
            p: element.ring().base().p(),
            n: element.ring().base().n(),
            conductor: 1,
            walk: vec![],
            generator: QuadForm::principal(-20),
            eigenform: vec![],
            pinned: true,
        };
        ThetaElement { level, element, provenance }
    }

    #[test]
    fn projection_of_norm_element() {
        let gamma = GammaQuotient::new(-20, 7).unwrap();
        let forms = gamma.group().elements().to_vec();
        let r = ring(7, 2);
        let raw = RawTheta { conductor: gamma.m0(), ring: r, forms: forms.clone(), coeffs: vec![1; forms.len()] };
        let t = theta_project(&raw, &gamma).unwrap();
        let k = (forms.len() / 7) as i64;
        assert_eq!(t, GroupRing::over_residue(7, r).unwrap().norm_element().scale_int(k));
        let trivial = GammaQuotient::new(-20, 1).unwrap();
        let raw1 = RawTheta { conductor: gamma.m0(), ring: r, forms, coeffs: (0..84).collect() };
        let aug = theta_project(&raw1, &trivial).unwrap();
        assert_eq!(aug.flat(), &[(83 * 84 / 2) % 49]);
    }

    #[test]
    fn involution_commutes_with_projection() {
        let gamma = GammaQuotient::new(-20, 7).unwrap();
        let forms = gamma.group().elements().to_vec();
        let r = ring(7, 1);
        let coeffs: Vec<u64> = (0..forms.len() as u64).map(|i| (i * i + 3) % 7).collect();
        let raw = RawTheta { conductor: gamma.m0(), ring: r, forms: forms.clone(), coeffs: coeffs.clone() };
        let inv_forms: Vec<QuadForm> = forms.iter().map(|f| f.inverse()).collect();
        let raw_star = RawTheta { conductor: gamma.m0(), ring: r, forms: inv_forms, coeffs };
        assert_eq!(theta_project(&raw, &gamma).unwrap().involution(), theta_project(&raw_star, &gamma).unwrap());
    }

    #[test]
    fn bd_examples() {
        let r = ring(5, 2);
        let g = GroupRing::over_residue(6, r).unwrap();
        let nrm = g.norm_element();
        assert_eq!(bd_element(&nrm).unwrap().element, nrm.scale_int(6));
        assert!(bd_element(&g.zero()).unwrap().element.is_zero());
        let theta = g.from_ints(&[3, 1, 4, 1, 5, 9]).unwrap();
        let l = bd_element(&theta).unwrap().element;
        assert_eq!(l.involution(), l);
        for f in factor_cyclotomic(6, 5, 2).unwrap() {
            let chi = Character::from_factor(6, f, 1).unwrap();
            let lhs = chi.eval(&l).unwrap();
            let rhs = chi.target().mul(&chi.eval(&theta).unwrap(), &chi.inverse().eval(&theta).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn stabilize_examples() {
        let r = ring(7, 1);
        let g1 = GroupRing::over_residue(1, r).unwrap();
        let g7 = GroupRing::over_residue(7, r).unwrap();
        let top = dummy(7, g7.monomial(2));
        let below = dummy(1, g1.from_ints(&[3]).unwrap());
        let s = p_stabilize(&top, &below, 1).unwrap();
        assert_eq!(s.element, g7.monomial(2).sub(&g7.norm_element().scale_int(3)).unwrap());
        // α = 2: 2^{-1}(γ² − 2^{-1}·3·N) with 2^{-1} = 4
        let s = p_stabilize(&top, &below, 2).unwrap();
        let expect = g7.monomial(2).sub(&g7.norm_element().scale_int(12)).unwrap().scale_int(4);
        assert_eq!(s.element, expect);
        assert_eq!(p_stabilize(&top, &below, 14), Err(Error::NonUnitAlpha));
        assert!(matches!(p_stabilize(&top, &top, 1), Err(Error::LevelMismatch(_))));
    }

    #[test]
    fn e_p_examples() {
        let ep = e_p_from_trace(2, -8, 5, 1, 1).unwrap();
        assert!(!ep.split);
        assert_eq!(ep.element.flat(), &[2]);
        assert!(ep.invertible);
        // split, m' = 1: (1 − α^{-1})²
        let ep = e_p_from_trace(-2, -20, 7, 2, 1).unwrap();
        let r = ring(7, 2);
        let a = unit_root_of(-2, 7, 2).unwrap();
        let t = r.sub(1, r.inv(a).unwrap());
        assert_eq!(ep.element.flat(), &[r.mul(t, t)]);
        assert!(ep.invertible);
        // α ≡ 1 mod 7
        let ep = e_p_from_trace(8, -20, 7, 1, 1).unwrap();
        assert!(!ep.invertible);
        assert_eq!(e_p_from_trace(7, -20, 7, 1, 1).unwrap_err(), Error::Supersingular(7));
    }

    #[test]
    fn e_p_with_frobenius() {
        let ep = e_p_from_trace(-2, -20, 7, 1, 3).unwrap();
        assert!(ep.split);
        assert_eq!(ep.element.order(), 3);
        assert_eq!(ep.invertible, is_group_ring_unit(&ep.element).unwrap());
        assert_eq!(ep.char_values.len(), factor_cyclotomic(3, 7, 1).unwrap().len());
    }

    #[test]
    fn multiple_examples() {
        let r = ring(5, 2);
        let g = GroupRing::over_residue(4, r).unwrap();
        let unit = g.from_ints(&[1, 5, 0, 0]).unwrap();
        let f = g.from_ints(&[2, 3, 0, 7]).unwrap();
        let sm = stabilization_multiple(&f, &unit).unwrap();
        assert_eq!(sm.c.mul(&unit).unwrap(), f);
        assert_eq!(sm.kernel_log_size, 0);
        let sm = stabilization_multiple(&g.zero(), &g.from_ints(&[1, 1, 1, 1]).unwrap()).unwrap();
        assert!(sm.c.mul(&g.norm_element()).unwrap().is_zero());
        assert_eq!(stabilization_multiple(&g.one(), &g.norm_element()).unwrap_err(), Error::NoSolution);
    }

    #[test]
    fn glue_examples() {
        let a = GroupRing::over_residue(1, ring(5, 1)).unwrap().from_ints(&[2]).unwrap();
        let b = GroupRing::over_residue(1, ring(7, 1)).unwrap().from_ints(&[3]).unwrap();
        let pa = dummy(1, a.clone()).provenance;
        let pb = Provenance { p: 7, ..pa.clone() };
        let g = glue_crt(&[(a.clone(), pa.clone()), (b.clone(), pb.clone())]).unwrap();
        assert_eq!((g.modulus, g.coeffs.clone()), (35, vec![17]));
        assert_eq!(g.reduce(5).unwrap(), vec![2]);
        let single = glue_crt(&[(a.clone(), pa.clone())]).unwrap();
        assert_eq!(single.coeffs, vec![2]);
        let unpinned = Provenance { pinned: false, ..pb.clone() };
        assert_eq!(glue_crt(&[(a.clone(), pa.clone()), (b.clone(), unpinned)]).unwrap_err(), Error::NormalizationUnpinned);
        let c = GroupRing::over_residue(2, ring(7, 1)).unwrap().zero();
        assert!(matches!(glue_crt(&[(a, pa), (c, pb)]), Err(Error::InconsistentLevels(_))));
    }
}
