use std::collections::BTreeMap;

use anticyclo_core::arith::residue::ResidueRing;
use anticyclo_core::curve::{check_hypotheses, EllipticCurveQ, Status};
use anticyclo_core::group_ring::cyclotomic_at_generator;
use anticyclo_core::quadratic::QuadForm;
use anticyclo_core::quaternion::{brandt_matrix, integral_eigenvector, ClassSet, EichlerOrder, QuaternionAlgebra};
use anticyclo_core::theta::*;

fn setup() -> (ClassSet, Vec<i64>) {
    let cs = ClassSet::new(EichlerOrder::new(QuaternionAlgebra::new(11).unwrap(), 1).unwrap());
    let mut b = BTreeMap::new();
    b.insert(2, brandt_matrix(&cs, 2).unwrap());
    let eigen: BTreeMap<u64, i64> = [(2, -2)].into_iter().collect();
    let f = integral_eigenvector(&b, &eigen).unwrap();
    (cs, f.values)
}

fn provenance(p: u64, n: u32) -> Provenance {
    Provenance {
        curve: "11a".into(),
        d_k: -20,
        p,
        n,
        conductor: 0,
        walk: vec![],
        generator: QuadForm::principal(-20),
        eigenform: vec![],
        pinned: true,
    }
}

#[test]
fn tower_norm_compatibility_and_stabilization() {
    let (cs, f) = setup();
    let e = EllipticCurveQ::curve_11a();
    let ap = e.a_ell(7).unwrap();
    for n in 1..=2 {
        let ring = ResidueRing::new(7, n).unwrap();
        let tower = theta_tower(&cs, &f, 1, 2, &provenance(7, n)).unwrap();
        assert_eq!(tower.iter().map(|t| t.level).collect::<Vec<_>>(), vec![1, 7, 49]);
        // π θ_2 = a_p θ_1 − cores θ_0
        let lhs = tower[2].element.project(7).unwrap();
        let rhs = tower[1].element.scale(&[ring.reduce(ap as i128)]).sub(&tower[0].element.cores(7).unwrap()).unwrap();
        assert_eq!(lhs, rhs);

        let alpha = e.unit_root(7, n).unwrap();
        let st = stabilized_tower(&tower, alpha).unwrap();
        assert_eq!(st[1].element.project(7).unwrap(), st[0].element);

        // cores equals multiplication by Φ_p(γ^{m'}) on any lift
        let phi = cyclotomic_at_generator(st[1].element.ring()).unwrap();
        let lift = tower[1].element.lift(49, &[3, 1, 4, 1, 5, 2, 6]).unwrap();
        assert_eq!(phi.mul(&lift).unwrap(), tower[1].element.cores(49).unwrap());

        for r in 0..2 {
            let sm = stabilization_multiple(&tower[r + 1].element, &st[r].element).unwrap();
            assert_eq!(sm.c.mul(&st[r].element).unwrap(), tower[r + 1].element);
        }
        let ep = e_p_multiplier(&e, -20, 7, n, 1).unwrap();
        let po = check_hypotheses(&e, -20, 7, 1, false).unwrap();
        assert_eq!(ep.invertible, po.get("po").status == Status::Pass);
    }
}

/// Optimal embeddings of Z[√−5] into each left order, counted as trace-0 norm-5 elements
/// modulo the conjugation action of the units.
fn embedding_counts(cs: &ClassSet) -> Vec<usize> {
    use anticyclo_core::quaternion::enumerate::short_vectors;
    use anticyclo_core::quaternion::order::unit_count;
    use num_rational::BigRational;
    let alg = cs.algebra();
    let five = BigRational::from_integer(5.into());
    cs.left_orders()
        .iter()
        .map(|o| {
            let n = short_vectors(&o.gram(alg), &five)
                .into_iter()
                .filter(|(x, v)| *v == five && alg.trd(&o.element(x)) == BigRational::from_integer(0.into()))
                .count();
            n / (unit_count(alg, o) / 2)
        })
        .collect()
}

#[test]
fn conductor_one_theta() {
    use anticyclo_core::quaternion::GrossPointFamily;
    let (cs, f) = setup();
    let gp = GrossPointFamily::new(&cs, -20, 1).unwrap();
    let r = ResidueRing::new(7, 2).unwrap();
    let vals: Vec<u64> = f.iter().map(|&v| r.reduce(v as i128)).collect();
    let raw = theta_raw(&vals, &r, &gp).unwrap();
    assert_eq!(raw.coeffs.len(), 2);
    // two orientations at 11 each carry one full Pic(O_K)-orbit
    let counts = embedding_counts(&cs);
    let mut seen = vec![0usize; cs.len()];
    for pt in gp.points() {
        seen[pt.class_index] += 2;
    }
    assert_eq!(seen, counts);
    for (pt, c) in gp.points().iter().zip(&raw.coeffs) {
        assert_eq!(*c, vals[pt.class_index]);
    }
}
