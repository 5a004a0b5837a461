use anticyclo_core::algebra::{Algebra, QuotientMap};
use anticyclo_core::arith::cyclotomic::factor_cyclotomic;
use anticyclo_core::arith::howell::{left_kernel, HowellBasis};
use anticyclo_core::arith::residue::ResidueRing;
use anticyclo_core::curve::{admissible_sieve, EllipticCurveQ};
use anticyclo_core::fitting::{fitting_ideal, FinitePresentation, RingIdeal};
use anticyclo_core::group_ring::{Character, GroupRing, IsotypicDecomposition};
use anticyclo_core::quadratic::class_group::class_number_formula;
use anticyclo_core::quadratic::{reduced_forms, RingClassGroup};
use anticyclo_core::theta::{bd_element, glue_crt, Provenance};
use proptest::prelude::*;

fn residue(p: u64, n: u32) -> ResidueRing {
    ResidueRing::new(p, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn howell_span_is_closed(rows in prop::collection::vec(prop::collection::vec(0u64..49, 4), 1..5), c in prop::collection::vec(0u64..49, 5)) {
        let r = residue(7, 2);
        let h = HowellBasis::new(r, 4, &rows);
        let mut v = vec![0u64; 4];
        for (row, k) in rows.iter().zip(&c) {
            for (x, y) in v.iter_mut().zip(row) {
                *x = r.add(*x, r.mul(*k, *y));
            }
        }
        prop_assert!(h.contains(&v));
        let mut rev = rows.clone();
        rev.reverse();
        prop_assert_eq!(HowellBasis::new(r, 4, &rev).canonical(), h.canonical());
        let k = left_kernel(&r, &rows, 4);
        for u in k.rows() {
            for j in 0..4 {
                let s = u.iter().zip(&rows).fold(0, |acc, (a, row)| r.add(acc, r.mul(*a, row[j])));
                prop_assert_eq!(s, 0);
            }
        }
    }

    #[test]
    fn fitting_invariant_under_row_operations(a in prop::collection::vec(0i64..25, 8), t in 0i64..25) {
        let g = GroupRing::over_residue(4, residue(5, 2)).unwrap();
        let alg = Algebra::GroupRing(g.clone());
        let e = |s: &[i64]| g.from_ints(s).unwrap();
        let m = vec![vec![e(&a[0..4]), e(&a[4..8])]];
        let x = FinitePresentation::new(alg.clone(), vec![m[0].iter().map(|z| z.flat().to_vec()).collect()]).unwrap();
        // second column += t·γ·first column
        let shifted = m[0][1].add(&m[0][0].mul(&g.monomial(1)).unwrap().scale_int(t)).unwrap();
        let y = FinitePresentation::new(alg, vec![vec![m[0][0].flat().to_vec(), shifted.flat().to_vec()]]).unwrap();
        prop_assert_eq!(fitting_ideal(&x), fitting_ideal(&y));
    }

    #[test]
    fn fitting_base_change_to_characters(a in prop::collection::vec(0i64..7, 6)) {
        let g = GroupRing::over_residue(3, residue(7, 1)).unwrap();
        let alg = Algebra::GroupRing(g.clone());
        let m = vec![vec![g.from_ints(&a[0..3]).unwrap().flat().to_vec(), g.from_ints(&a[3..6]).unwrap().flat().to_vec()]];
        let x = FinitePresentation::new(alg.clone(), m).unwrap();
        for f in factor_cyclotomic(3, 7, 1).unwrap() {
            let q = QuotientMap::Character(Character::from_factor(3, f, 1).unwrap());
            prop_assert_eq!(fitting_ideal(&x.map(&q).unwrap()), fitting_ideal(&x).base_change(&q).unwrap());
        }
    }

    #[test]
    fn isotypic_round_trip(m in 1usize..13, coeffs in prop::collection::vec(0i64..49, 12)) {
        prop_assume!(m % 7 != 0);
        let r = residue(7, 2);
        let g = GroupRing::over_residue(m, r).unwrap();
        let a = g.from_ints(&coeffs[..m]).unwrap();
        let d = IsotypicDecomposition::new(m, r).unwrap();
        prop_assert_eq!(d.factors().iter().map(|f| f.degree()).sum::<usize>(), m);
        prop_assert_eq!(d.reconstruct(&d.split(&a).unwrap()).unwrap(), a);
    }

    #[test]
    fn bd_elements_are_symmetric(coeffs in prop::collection::vec(0i64..25, 10)) {
        let g = GroupRing::over_residue(10, residue(5, 2)).unwrap();
        let l = bd_element(&g.from_ints(&coeffs).unwrap()).unwrap().element;
        prop_assert_eq!(l.involution(), l);
    }

    #[test]
    fn crt_round_trip(a in prop::collection::vec(0i64..49, 3), b in prop::collection::vec(0i64..169, 3)) {
        let x = GroupRing::over_residue(3, residue(7, 2)).unwrap().from_ints(&a).unwrap();
        let y = GroupRing::over_residue(3, residue(13, 2)).unwrap().from_ints(&b).unwrap();
        let pa = Provenance {
            curve: "11a".into(), d_k: -20, p: 7, n: 2, conductor: 9, walk: vec![3, 3],
            generator: anticyclo_core::quadratic::QuadForm::principal(-20), eigenform: vec![2, -3], pinned: true,
        };
        let pb = Provenance { p: 13, ..pa.clone() };
        let glued = glue_crt(&[(x.clone(), pa), (y.clone(), pb)]).unwrap();
        prop_assert_eq!(glued.reduce(7).unwrap(), x.flat().to_vec());
        prop_assert_eq!(glued.reduce(13).unwrap(), y.flat().to_vec());
    }
}

#[test]
fn idempotents_are_orthogonal() {
    for m in [4usize, 6, 8, 12] {
        let r = residue(5, 2);
        let d = IsotypicDecomposition::new(m, r).unwrap();
        let g = GroupRing::over_residue(m, r).unwrap();
        let mut sum = g.zero();
        for i in 0..d.factors().len() {
            let ei = d.idempotent(i);
            sum = sum.add(&ei).unwrap();
            for j in 0..d.factors().len() {
                let prod = ei.mul(&d.idempotent(j)).unwrap();
                if i == j {
                    assert_eq!(prod, ei);
                } else {
                    assert!(prod.is_zero());
                }
            }
        }
        assert_eq!(sum, g.one());
    }
}

#[test]
fn class_numbers_match_the_conductor_formula() {
    for d_k in [-3i64, -4, -7, -8, -15, -20, -23] {
        let h_k = reduced_forms(d_k).unwrap().len() as u64;
        for c in 1..=12u64 {
            let direct = reduced_forms(d_k * (c * c) as i64).unwrap().len() as u64;
            assert_eq!(direct, class_number_formula(d_k, h_k, c), "d_K = {d_k}, c = {c}");
            assert_eq!(RingClassGroup::new(d_k, c).unwrap().order() as u64, direct);
        }
    }
}

#[test]
fn sieve_is_monotone_in_the_bound() {
    let e = EllipticCurveQ::curve_11a();
    let big = admissible_sieve(&e, -20, 7, 1, 300).unwrap();
    for bound in [50u64, 120, 200] {
        let small = admissible_sieve(&e, -20, 7, 1, bound).unwrap();
        assert_eq!(small[..], big[..small.len()]);
        assert!(big[small.len()..].iter().all(|a| a.ell > bound));
    }
}

#[test]
fn fitting_of_zero_and_unit() {
    let g = GroupRing::over_residue(5, residue(5, 1)).unwrap();
    let alg = Algebra::GroupRing(g.clone());
    let x = FinitePresentation::new(alg.clone(), vec![vec![g.one().flat().to_vec()]]).unwrap();
    assert_eq!(fitting_ideal(&x), RingIdeal::unit(alg));
}
