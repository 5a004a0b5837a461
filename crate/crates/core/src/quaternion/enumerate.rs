//! Exact short-vector enumeration for positive definite rational Gram matrices.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

type RMat = Vec<Vec<BigRational>>;

fn rat(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn transform(g: &RMat, t: &[Vec<i64>]) -> RMat {
    let n = g.len();
    let mut out = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let mut s = BigRational::zero();
            for k in 0..n {
                if t[i][k] == 0 {
                    continue;
                }
                for l in 0..n {
                    if t[j][l] != 0 {
                        s += &g[k][l] * rat(t[i][k] * t[j][l]);
                    }
                }
            }
            out[j][i] = s.clone();
            out[i][j] = s;
        }
    }
    out
}

fn gso(g: &RMat) -> (RMat, Vec<BigRational>) {
    let n = g.len();
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    let mut b = vec![BigRational::zero(); n];
    for i in 0..n {
        for j in 0..i {
            let mut s = g[i][j].clone();
            for l in 0..j {
                s -= &mu[j][l] * &mu[i][l] * &b[l];
            }
            mu[i][j] = s / &b[j];
        }
        let mut s = g[i][i].clone();
        for l in 0..i {
            s -= &mu[i][l] * &mu[i][l] * &b[l];
        }
        b[i] = s;
    }
    (mu, b)
}

fn round(x: &BigRational) -> BigInt {
    (x + BigRational::new(BigInt::one(), BigInt::from(2))).floor().to_integer()
}

/// LLL reduction (δ = 3/4) of a Gram matrix; returns T with rows the reduced basis in the
/// original coordinates, and the reduced Gram matrix T G Tᵗ.
pub fn lll_gram(g: &RMat) -> (Vec<Vec<i64>>, RMat) {
    let n = g.len();
    let mut t: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    let delta = BigRational::new(BigInt::from(3), BigInt::from(4));
    let mut cur = g.clone();
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let (mu, _) = gso(&cur);
            let q = round(&mu[k][j]);
            if !q.is_zero() {
                let q = q.to_i64().expect("small reduction step");
                for c in 0..n {
                    t[k][c] -= q * t[j][c];
                }
                cur = transform(g, &t);
            }
        }
        let (mu, b) = gso(&cur);
        if b[k] >= (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &b[k - 1] {
            k += 1;
        } else {
            t.swap(k, k - 1);
            cur = transform(g, &t);
            k = (k - 1).max(1);
        }
    }
    (t, cur)
}

/// All nonzero x ∈ Zⁿ with x G xᵗ ≤ bound, together with their values. Both x and -x are
/// listed. The search is exact: LLL first, then Fincke-Pohst on the reduced form.
pub fn short_vectors(g: &RMat, bound: &BigRational) -> Vec<(Vec<i64>, BigRational)> {
    let n = g.len();
    let (t, red) = lll_gram(g);
    let (mu, b) = gso(&red);
    let mut out = Vec::new();
    let mut y = vec![0i64; n];
    recurse(n, &mu, &b, bound, &BigRational::zero(), &mut y, &mut out);
    out.into_iter()
        .filter(|(v, _)| v.iter().any(|&c| c != 0))
        .map(|(v, val)| {
            let x: Vec<i64> = (0..n).map(|c| (0..n).map(|i| v[i] * t[i][c]).sum()).collect();
            (x, val)
        })
        .collect()
}

// Enumerate coordinate `level-1` given the coordinates above it. With the GSO of the
// reduced Gram, Q(y) = Σ_i b_i (y_i + Σ_{j>i} mu_ji y_j)².
fn recurse(
    level: usize,
    mu: &RMat,
    b: &[BigRational],
    bound: &BigRational,
    used: &BigRational,
    y: &mut Vec<i64>,
    out: &mut Vec<(Vec<i64>, BigRational)>,
) {
    if level == 0 {
        out.push((y.clone(), used.clone()));
        return;
    }
    let i = level - 1;
    let n = y.len();
    let mut c = BigRational::zero();
    for j in i + 1..n {
        if y[j] != 0 {
            c -= &mu[j][i] * rat(y[j]);
        }
    }
    let start = c.floor().to_integer().to_i64().expect("bounded");
    let visit = |x: i64, y: &mut Vec<i64>, out: &mut Vec<(Vec<i64>, BigRational)>| -> bool {
        let d = rat(x) - &c;
        let val = used + &b[i] * &d * &d;
        if &val > bound {
            return false;
        }
        y[i] = x;
        recurse(i, mu, b, bound, &val, y, out);
        y[i] = 0;
        true
    };
    // distance to c grows monotonically in both directions from floor(c)
    let mut x = start + 1;
    while visit(x, y, out) {
        x += 1;
    }
    let mut x = start;
    while visit(x, y, out) {
        x -= 1;
    }
}

/// Vectors with x G xᵗ exactly equal to `target`.
pub fn vectors_of_value(g: &RMat, target: &BigRational) -> Vec<Vec<i64>> {
    short_vectors(g, target).into_iter().filter(|(_, v)| v == target).map(|(x, _)| x).collect()
}

/// The minimum of the form on nonzero vectors, searching up to `bound`.
pub fn minimum_up_to(g: &RMat, bound: &BigRational) -> Option<BigRational> {
    short_vectors(g, bound).into_iter().map(|(_, v)| v).min()
}

pub fn is_positive_definite(g: &RMat) -> bool {
    let (_, b) = gso(g);
    b.iter().all(|x| x.is_positive())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn imat(rows: &[&[i64]]) -> RMat {
        rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect()
    }

    fn brute(g: &RMat, bound: i64, range: i64) -> usize {
        let n = g.len();
        let mut count = 0;
        let total = (2 * range + 1).pow(n as u32);
        for idx in 0..total {
            let mut x = vec![0i64; n];
            let mut r = idx;
            for c in x.iter_mut() {
                *c = r % (2 * range + 1) - range;
                r /= 2 * range + 1;
            }
            if x.iter().all(|&v| v == 0) {
                continue;
            }
            let mut s = 0i64;
            for i in 0..n {
                for j in 0..n {
                    s += g[i][j].to_integer().to_i64().unwrap() * x[i] * x[j];
                }
            }
            if s <= bound {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn z4_counts() {
        let g = imat(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]]);
        // r_4(1) = 8, r_4(2) = 24
        assert_eq!(short_vectors(&g, &rat(1)).len(), 8);
        assert_eq!(short_vectors(&g, &rat(2)).len(), 8 + 24);
    }

    #[test]
    fn skewed_form_matches_brute_force() {
        // a badly reduced basis
        let g = imat(&[&[2, 5, 0, 1], &[5, 26, 3, 4], &[0, 3, 3, 1], &[1, 4, 1, 5]]);
        assert!(is_positive_definite(&g));
        for bound in [1, 3, 6, 10] {
            assert_eq!(short_vectors(&g, &rat(bound)).len(), brute(&g, bound, 12), "bound {bound}");
        }
    }

    #[test]
    fn lll_preserves_determinant() {
        let g = imat(&[&[10, 7, 3], &[7, 6, 2], &[3, 2, 4]]);
        let (t, red) = lll_gram(&g);
        assert_eq!(super::super::lattice::rat_det(&red), super::super::lattice::rat_det(&g));
        let dt = super::super::lattice::rat_det(
            &t.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect::<Vec<_>>(),
        );
        assert_eq!(dt.abs(), BigRational::one());
    }
}
