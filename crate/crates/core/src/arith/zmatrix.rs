//! Integer matrices over arbitrary precision: Hermite and Smith normal forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type ZMatrix = Vec<Vec<BigInt>>;

pub fn from_i64(rows: &[Vec<i64>]) -> ZMatrix {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

pub fn identity(n: usize) -> ZMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &ZMatrix, b: &ZMatrix) -> ZMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(BigInt::zero(), |acc, k| acc + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

/// Determinant by fraction-free (Bareiss) elimination.
pub fn det(a: &ZMatrix) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m = a.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(sw) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, sw);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Row-style Hermite normal form of the row lattice: nonzero rows only, pivots positive,
/// entries above a pivot reduced into [0, pivot).
pub fn hnf(rows: &ZMatrix, ncols: usize) -> ZMatrix {
    let mut m: ZMatrix = rows.iter().filter(|r| r.iter().any(|x| !x.is_zero())).cloned().collect();
    let mut out: ZMatrix = Vec::new();
    let mut pivot_cols = Vec::new();
    for col in 0..ncols {
        // combine all rows with nonzero entry at col into one via extended gcd
        let idx: Vec<usize> = (0..m.len()).filter(|&i| !m[i][col].is_zero()).collect();
        if idx.is_empty() {
            continue;
        }
        let mut piv = m[idx[0]].clone();
        let mut rest: Vec<Vec<BigInt>> = Vec::new();
        for &i in &idx[1..] {
            let other = &m[i];
            let a = piv[col].clone();
            let b = other[col].clone();
            let eg = a.extended_gcd(&b);
            let g = eg.gcd;
            let (x, y) = (eg.x, eg.y);
            let new_piv: Vec<BigInt> = piv.iter().zip(other.iter()).map(|(p, o)| &x * p + &y * o).collect();
            let ag = &a / &g;
            let bg = &b / &g;
            let new_other: Vec<BigInt> = piv.iter().zip(other.iter()).map(|(p, o)| &ag * o - &bg * p).collect();
            piv = new_piv;
            if new_other.iter().any(|v| !v.is_zero()) {
                rest.push(new_other);
            }
        }
        if piv[col].is_negative() {
            for v in piv.iter_mut() {
                *v = -v.clone();
            }
        }
        let mut next: ZMatrix = (0..m.len())
            .filter(|i| !idx.contains(i))
            .map(|i| m[i].clone())
            .collect();
        next.extend(rest);
        m = next;
        out.push(piv);
        pivot_cols.push(col);
    }
    for i in 0..out.len() {
        let col = pivot_cols[i];
        let pv = out[i][col].clone();
        for j in 0..i {
            let q = out[j][col].div_floor(&pv);
            if !q.is_zero() {
                let sub: Vec<BigInt> = out[i].iter().map(|v| v * &q).collect();
                for (x, s) in out[j].iter_mut().zip(sub) {
                    *x -= s;
                }
            }
        }
    }
    out
}

/// Smith normal form: returns (D, U, V) with U A V = D, D diagonal with d_i | d_{i+1},
/// d_i >= 0, and U, V unimodular.
pub fn smith_normal_form(a: &ZMatrix) -> (ZMatrix, ZMatrix, ZMatrix) {
    let nr = a.len();
    let nc = a.first().map_or(0, |r| r.len());
    let mut d = a.clone();
    let mut u = identity(nr);
    let mut v = identity(nc);
    let rows_op = |m: &mut ZMatrix, i: usize, j: usize, c: &BigInt| {
        // row_i -= c * row_j
        let rj = m[j].clone();
        for (x, y) in m[i].iter_mut().zip(rj.iter()) {
            *x -= c * y;
        }
    };
    let cols_op = |m: &mut ZMatrix, i: usize, j: usize, c: &BigInt| {
        // col_i -= c * col_j
        for row in m.iter_mut() {
            let y = row[j].clone();
            row[i] -= c * y;
        }
    };
    let swap_cols = |m: &mut ZMatrix, i: usize, j: usize| {
        for row in m.iter_mut() {
            row.swap(i, j);
        }
    };
    let mut t = 0;
    while t < nr.min(nc) {
        // smallest nonzero entry in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..nr {
            for j in t..nc {
                if !d[i][j].is_zero()
                    && best.map_or(true, |(bi, bj)| d[i][j].abs() < d[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        d.swap(t, bi);
        u.swap(t, bi);
        swap_cols(&mut d, t, bj);
        swap_cols(&mut v, t, bj);
        loop {
            let mut dirty = false;
            for i in t + 1..nr {
                if !d[i][t].is_zero() {
                    let q = d[i][t].div_floor(&d[t][t]);
                    rows_op(&mut d, i, t, &q);
                    rows_op(&mut u, i, t, &q);
                    if !d[i][t].is_zero() {
                        dirty = true;
                    }
                }
            }
            for j in t + 1..nc {
                if !d[t][j].is_zero() {
                    let q = d[t][j].div_floor(&d[t][t]);
                    cols_op(&mut d, j, t, &q);
                    cols_op(&mut v, j, t, &q);
                    if !d[t][j].is_zero() {
                        dirty = true;
                    }
                }
            }
            if !dirty {
                // divisibility of the remaining block
                let bad = (t + 1..nr)
                    .flat_map(|i| (t + 1..nc).map(move |j| (i, j)))
                    .find(|&(i, j)| !(&d[i][j] % &d[t][t]).is_zero());
                match bad {
                    None => break,
                    Some((i, _)) => {
                        // row_t += row_i
                        let m1 = BigInt::from(-1);
                        rows_op(&mut d, t, i, &m1);
                        rows_op(&mut u, t, i, &m1);
                        continue;
                    }
                }
            }
            // move the smallest entry of row t / column t to the pivot
            let mut best = (t, t);
            for i in t..nr {
                if !d[i][t].is_zero() && d[i][t].abs() < d[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..nc {
                if !d[t][j].is_zero() && d[t][j].abs() < d[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            if best.0 != t {
                d.swap(t, best.0);
                u.swap(t, best.0);
            }
            if best.1 != t {
                swap_cols(&mut d, t, best.1);
                swap_cols(&mut v, t, best.1);
            }
        }
        if d[t][t].is_negative() {
            for x in d[t].iter_mut() {
                *x = -x.clone();
            }
            for x in u[t].iter_mut() {
                *x = -x.clone();
            }
        }
        t += 1;
    }
    (d, u, v)
}

/// Inverse of a unimodular matrix.
pub fn unimodular_inverse(a: &ZMatrix) -> ZMatrix {
    let n = a.len();
    // Gauss-Jordan over Q with exact integer result.
    use num_rational::BigRational;
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<BigRational> = row.iter().map(|x| BigRational::from_integer(x.clone())).collect();
            r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero()).expect("singular matrix");
        m.swap(c, p);
        let inv = m[c][c].recip();
        for x in m[c].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..n {
            if i != c && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let rc = m[c].clone();
                for (x, y) in m[i].iter_mut().zip(rc.iter()) {
                    *x -= &f * y;
                }
            }
        }
    }
    m.into_iter()
        .map(|r| r[n..].iter().map(|x| x.to_integer()).collect())
        .collect()
}
